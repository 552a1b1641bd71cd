#include "qus/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qus/error.hpp"
#include "qus/nakagami.hpp"

namespace qus::imaging {

EnvelopeImage synthesize_envelope(const ParamMap& truth, double omega, std::uint64_t seed) {
    Rng rng(seed);
    Grid<double> amp(truth.width(), truth.height());
    for (std::size_t i = 0; i < amp.size(); ++i) {
        if (!truth.valid[i]) throw InvalidArgument("synthesize_envelope: ground truth has invalid pixels");
        amp[i] = sample_one(NakagamiParams(truth.m[i], omega), rng);
    }
    return EnvelopeImage(std::move(amp));
}

OmegaField OmegaField::global(double value) {
    if (!(value > 0.0) || !std::isfinite(value)) throw InvalidArgument("OmegaField: omega must be finite and > 0");
    OmegaField f;
    f.mode_ = OmegaMode::Global;
    f.scalar_ = value;
    return f;
}

OmegaField OmegaField::local(Grid<double> values, std::size_t side) {
    for (double v : values.values()) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("OmegaField: local omega must be finite and > 0");
    }
    OmegaField f;
    f.mode_ = OmegaMode::Local;
    f.side_ = side;
    f.local_ = std::move(values);
    return f;
}

std::string OmegaField::describe() const {
    return mode_ == OmegaMode::Global ? "global" : "local:" + std::to_string(side_);
}

OmegaField estimate_omega(const EnvelopeImage& img, OmegaMode mode, std::size_t side) {
    const auto& a = img.amplitudes();
    if (mode == OmegaMode::Global) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!img.in_roi(i)) continue;
            sum += a[i] * a[i];
            ++n;
        }
        if (n == 0) throw InvalidArgument("estimate_omega: empty ROI");
        if (sum == 0.0) throw InvalidArgument("estimate_omega: all-zero image");
        return OmegaField::global(sum / static_cast<double>(n));
    }
    if (side < 1 || side % 2 == 0) throw InvalidArgument("estimate_omega: local side must be odd");
    // Box sums of r^2 and ROI counts through summed-area tables.
    const std::size_t w = img.width(), h = img.height();
    std::vector<double> s((w + 1) * (h + 1), 0.0);
    std::vector<std::size_t> c((w + 1) * (h + 1), 0);
    bool any = false;
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t i = y * w + x;
            const bool in = img.in_roi(i);
            any = any || in;
            const double v = in ? a[i] * a[i] : 0.0;
            const std::size_t k = (y + 1) * (w + 1) + (x + 1);
            s[k] = v + s[k - 1] + s[k - (w + 1)] - s[k - (w + 1) - 1];
            c[k] = std::size_t(in) + c[k - 1] + c[k - (w + 1)] - c[k - (w + 1) - 1];
        }
    }
    if (!any) throw InvalidArgument("estimate_omega: empty ROI");
    Grid<double> out(w, h);
    const std::size_t half = side / 2;
    const double global_fallback = estimate_omega(img, OmegaMode::Global).scalar();
    for (std::size_t y = 0; y < h; ++y) {
        const std::size_t y0 = y >= half ? y - half : 0, y1 = std::min(h, y + half + 1);
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t x0 = x >= half ? x - half : 0, x1 = std::min(w, x + half + 1);
            auto box = [&](const auto& t) {
                return t[y1 * (w + 1) + x1] - t[y0 * (w + 1) + x1] - t[y1 * (w + 1) + x0] + t[y0 * (w + 1) + x0];
            };
            const std::size_t n = box(c);
            const double sum = box(s);
            out(x, y) = (n > 0 && sum > 0.0) ? sum / static_cast<double>(n) : global_fallback;
        }
    }
    return OmegaField::local(std::move(out), side);
}

PixelEstimate unicorn_pixel(double r, double score, double omega_hat, const UnicornOptions& opts) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    if (!(r > 0.0) || !std::isfinite(r) || !std::isfinite(score) || !(omega_hat > 0.0)) {
        return {nan, nan, PixelStatus::Singular};
    }
    const double denom = 2.0 / r - 2.0 * r / omega_hat;
    const double eps_d = opts.denominator_rel_eps * 2.0 / std::sqrt(omega_hat);
    if (!(std::abs(denom) >= eps_d)) return {nan, nan, PixelStatus::Singular};
    const double raw = (1.0 / r + score) / denom;
    if (!std::isfinite(raw)) return {nan, nan, PixelStatus::Singular};
    const double m = std::clamp(raw, opts.clamp_lo, opts.clamp_hi);
    return {m, raw, m == raw ? PixelStatus::Ok : PixelStatus::Clamped};
}

ParamMap unicorn_map(const EnvelopeImage& img, const ScoreField& score, const OmegaField& omega,
                     const UnicornOptions& opts) {
    if (!score.same_shape(img.width(), img.height())) throw InvalidArgument("unicorn_map: score field shape mismatch");
    if (omega.mode() == OmegaMode::Local && !omega.local_values().same_shape(img.width(), img.height())) {
        throw InvalidArgument("unicorn_map: omega field shape mismatch");
    }
    const double floor = opts.amplitude_rel_floor * img.max_value();
    ParamMap out(img.width(), img.height());
    std::size_t singular = 0, clamped = 0;
    const auto& a = img.amplitudes();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double r = std::max(a[i], floor);
        const auto est = unicorn_pixel(r, score[i], omega.at(i), opts);
        if (est.status == PixelStatus::Ok) {
            out.m[i] = est.m;
            out.valid[i] = 1;
        } else {
            (est.status == PixelStatus::Singular ? singular : clamped)++;
        }
    }
    const double n = static_cast<double>(a.size());
    out.meta["estimator"] = "unicorn";
    out.meta["window"] = "pixelwise";
    out.meta["omega_mode"] = omega.describe();
    out.meta["masked_fraction"] = std::to_string(static_cast<double>(singular + clamped) / n);
    out.meta["singular_fraction"] = std::to_string(static_cast<double>(singular) / n);
    out.meta["clamped_fraction"] = std::to_string(static_cast<double>(clamped) / n);
    return out;
}

}  // namespace qus::imaging
