#include "qus/window_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qus/error.hpp"
#include "qus/parallel.hpp"
#include "qus/special.hpp"

namespace qus {
namespace {

constexpr double kDeltaMin = 1e-12;

double mle_residual(double m, double delta) { return std::log(m) - digamma(m) - delta; }

// Reflect without repeating the edge sample: -1 -> 1, n -> n - 2.
std::size_t reflect_index(long i, long n) {
    if (n == 1) return 0;
    const long period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    if (i >= n) i = period - i;
    return static_cast<std::size_t>(i);
}

void gather_window(const Grid<double>& a, std::size_t cx, std::size_t cy, const WindowSpec& spec,
                   std::vector<double>& out) {
    out.clear();
    const long half = static_cast<long>(spec.side / 2);
    const long w = static_cast<long>(a.width());
    const long h = static_cast<long>(a.height());
    for (long dy = -half; dy <= half; ++dy) {
        const long y = static_cast<long>(cy) + dy;
        if (spec.border == BorderPolicy::Shrink && (y < 0 || y >= h)) continue;
        const std::size_t yy = spec.border == BorderPolicy::Shrink ? static_cast<std::size_t>(y) : reflect_index(y, h);
        for (long dx = -half; dx <= half; ++dx) {
            const long x = static_cast<long>(cx) + dx;
            if (spec.border == BorderPolicy::Shrink && (x < 0 || x >= w)) continue;
            const std::size_t xx = spec.border == BorderPolicy::Shrink ? static_cast<std::size_t>(x) : reflect_index(x, w);
            out.push_back(a(xx, yy));
        }
    }
}

double estimate_window(std::span<const double> win, Estimator est) {
    switch (est) {
        case Estimator::Moment: return moment_estimate(win).m_inv;
        case Estimator::MleTaylor: return mle_taylor(win);
        case Estimator::MleExact: return mle_exact(win);
    }
    throw InvalidArgument("unknown estimator");
}

}  // namespace

void WindowSpec::validate() const {
    if (side < 3 || side % 2 == 0) throw InvalidArgument("window side must be odd and >= 3, got " + std::to_string(side));
    if (stride < 1 || stride > side) throw InvalidArgument("window stride must be in [1, side], got " + std::to_string(stride));
}

WindowSpec WindowSpec::half_step(std::size_t side, BorderPolicy border) {
    return WindowSpec{side, (side + 1) / 2, border};
}

std::string to_string(BorderPolicy b) { return b == BorderPolicy::Shrink ? "shrink" : "reflect"; }

BorderPolicy border_policy_from_string(const std::string& s) {
    if (s == "shrink") return BorderPolicy::Shrink;
    if (s == "reflect") return BorderPolicy::Reflect;
    throw InvalidArgument("unknown border policy '" + s + "'");
}

std::string to_string(Estimator e) {
    switch (e) {
        case Estimator::Moment: return "moment";
        case Estimator::MleTaylor: return "mle_taylor";
        case Estimator::MleExact: return "mle_exact";
    }
    return "?";
}

Estimator estimator_from_string(const std::string& s) {
    if (s == "moment") return Estimator::Moment;
    if (s == "mle_taylor" || s == "mle") return Estimator::MleTaylor;
    if (s == "mle_exact") return Estimator::MleExact;
    throw InvalidArgument("unknown estimator '" + s + "'");
}

MomentEstimate moment_estimate(std::span<const double> window) {
    if (window.size() < 2) throw InvalidArgument("moment_estimate: need at least 2 samples");
    const double n = static_cast<double>(window.size());
    double s2 = 0.0;
    for (double r : window) s2 += r * r;
    const double omega = s2 / n;
    double var = 0.0;
    for (double r : window) {
        const double d = r * r - omega;
        var += d * d;
    }
    var /= n;
    if (!(var > kDeltaMin * omega * omega)) throw DegenerateWindow("moment_estimate: zero variance of r^2");
    return {omega * omega / var, omega};
}

double mle_delta(std::span<const double> window) {
    if (window.size() < 2) throw InvalidArgument("mle: need at least 2 samples");
    double s2 = 0.0;
    double slog = 0.0;
    for (double r : window) {
        if (!(r > 0.0)) throw DomainError("mle: amplitudes must be > 0");
        s2 += r * r;
        slog += std::log(r * r);
    }
    const double n = static_cast<double>(window.size());
    return std::log(s2 / n) - slog / n;
}

double mle_taylor(std::span<const double> window) {
    const double delta = mle_delta(window);
    if (!(delta > kDeltaMin)) throw DegenerateWindow("mle_taylor: log-moment gap is zero");
    return 1.0 / (2.0 * delta);
}

double mle_exact_from_delta(double delta) {
    if (!(delta > kDeltaMin) || !std::isfinite(delta)) throw DegenerateWindow("mle_exact: log-moment gap is zero");
    // log m - psi(m) decreases monotonically from +inf to 0, so the root is
    // unique. Minka's approximation seeds Newton; the bracket guards it.
    double m = (3.0 - delta + std::sqrt((delta - 3.0) * (delta - 3.0) + 24.0 * delta)) / (12.0 * delta);
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        const double f = mle_residual(m, delta);
        if (std::abs(f) < 1e-13) return m;
        if (f > 0.0) lo = m; else hi = m;
        const double df = 1.0 / m - trigamma(m);
        double next = m - f / df;
        if (!(next > lo && next < hi)) next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * m;
        if (next == m) break;
        m = next;
    }
    if (std::abs(mle_residual(m, delta)) < 1e-10) return m;
    throw NumericError("mle_exact: no convergence after 200 iterations (delta=" + std::to_string(delta) + ")");
}

double mle_exact(std::span<const double> window) { return mle_exact_from_delta(mle_delta(window)); }

ParamMap sliding_map(const EnvelopeImage& img, const WindowSpec& spec, Estimator est, const MapOptions& opts) {
    spec.validate();
    if (img.width() < spec.side || img.height() < spec.side) {
        throw InvalidArgument("sliding_map: image " + std::to_string(img.width()) + "x" +
                              std::to_string(img.height()) + " smaller than window " + std::to_string(spec.side));
    }
    Grid<double> amp = img.amplitudes();
    if (est != Estimator::Moment) {
        const double floor = 1e-6 * img.max_value();
        for (double& v : amp.values()) v = std::max(v, floor);
    }

    const std::size_t w = img.width();
    const std::size_t h = img.height();
    const std::size_t s = spec.stride;
    // Window centres at multiples of the stride; pixels copy the nearest centre.
    const std::size_t cols = (w + s - 1) / s;
    const std::size_t rows = (h + s - 1) / s;
    Grid<double> centre(cols, rows, std::numeric_limits<double>::quiet_NaN());

    parallel_for(rows, [&](std::size_t r0, std::size_t r1) {
        std::vector<double> buf;
        buf.reserve(spec.side * spec.side);
        for (std::size_t cy = r0; cy < r1; ++cy) {
            for (std::size_t cx = 0; cx < cols; ++cx) {
                gather_window(amp, cx * s, cy * s, spec, buf);
                try {
                    const double m = estimate_window(buf, est);
                    if (std::isfinite(m)) centre(cx, cy) = std::clamp(m, opts.clamp_lo, opts.clamp_hi);
                } catch (const DegenerateWindow&) {
                } catch (const DomainError&) {
                }
            }
        }
    }, opts.threads);

    ParamMap out(w, h);
    auto nearest = [s](std::size_t p, std::size_t count) {
        return std::min((p + s / 2) / s, count - 1);
    };
    for (std::size_t y = 0; y < h; ++y) {
        const std::size_t cy = nearest(y, rows);
        for (std::size_t x = 0; x < w; ++x) {
            const double v = centre(nearest(x, cols), cy);
            if (!std::isnan(v)) {
                out.m(x, y) = v;
                out.valid(x, y) = 1;
            }
        }
    }
    out.meta["estimator"] = to_string(est);
    out.meta["window"] = std::to_string(spec.side);
    out.meta["stride"] = std::to_string(spec.stride);
    out.meta["border"] = to_string(spec.border);
    return out;
}

ParamMap mean_of_maps(const std::vector<ParamMap>& maps) {
    if (maps.empty()) throw InvalidArgument("mean_of_maps: no maps");
    const std::size_t w = maps.front().width();
    const std::size_t h = maps.front().height();
    for (const auto& m : maps) {
        if (m.width() != w || m.height() != h) throw InvalidArgument("mean_of_maps: shape mismatch");
    }
    ParamMap out(w, h);
    for (std::size_t i = 0; i < w * h; ++i) {
        // Running mean: identical inputs reproduce the input bit-for-bit.
        double mean = 0.0;
        std::size_t k = 0;
        for (const auto& m : maps) {
            if (!m.valid[i]) continue;
            ++k;
            mean += (m.m[i] - mean) / static_cast<double>(k);
        }
        if (k) {
            out.m[i] = mean;
            out.valid[i] = 1;
        }
    }
    return out;
}

ParamMap wmc_map(const EnvelopeImage& img, const std::vector<WindowSpec>& specs, const MapOptions& opts) {
    if (specs.size() < 2) throw InvalidArgument("wmc_map: need at least 2 window specs");
    std::vector<ParamMap> maps;
    maps.reserve(specs.size());
    std::string sides;
    for (const auto& s : specs) {
        maps.push_back(sliding_map(img, s, Estimator::Moment, opts));
        if (!sides.empty()) sides += ',';
        sides += std::to_string(s.side);
    }
    ParamMap out = mean_of_maps(maps);
    out.meta["estimator"] = "wmc";
    out.meta["window"] = sides;
    return out;
}

}  // namespace qus
