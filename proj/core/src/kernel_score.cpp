#include "qus/kernel_score.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "qus/error.hpp"

namespace qus::score {
namespace {

constexpr double kSupport = 8.0;  // kernel truncated at 8 bandwidths

// Sorted-sample evaluation of sum K and sum K'.
double score_at(const std::vector<double>& sorted, double r, double h, bool reflect) {
    double k_sum = 0.0, dk_sum = 0.0;
    const double inv_h2 = 1.0 / (h * h);
    auto accumulate = [&](double centre, double sign) {
        // Samples x with |r - sign * x| < 8h.
        const double lo = sign > 0 ? r - kSupport * h : -(r + kSupport * h);
        const double hi = sign > 0 ? r + kSupport * h : -(r - kSupport * h);
        auto it = std::lower_bound(sorted.begin(), sorted.end(), lo);
        for (; it != sorted.end() && *it <= hi; ++it) {
            const double d = centre - sign * *it;
            const double k = std::exp(-0.5 * d * d * inv_h2);
            k_sum += k;
            dk_sum -= d * inv_h2 * k;
        }
    };
    accumulate(r, 1.0);
    if (reflect) accumulate(r, -1.0);
    if (!(k_sum > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return dk_sum / k_sum;
}

}  // namespace

double silverman_bandwidth(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 2) throw InvalidArgument("silverman_bandwidth: need at least 2 samples");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : s) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    auto q = [&](double p) {
        const double pos = p * static_cast<double>(n - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, n - 1);
        return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
    };
    const double iqr = q(0.75) - q(0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) throw InvalidArgument("silverman_bandwidth: samples have zero spread");
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

std::vector<double> kernel_score(std::span<const double> samples, std::span<const double> eval_points,
                                 const KernelOptions& opts) {
    if (samples.size() < opts.min_samples) {
        throw InvalidArgument("kernel_score: need at least " + std::to_string(opts.min_samples) + " samples, got " +
                              std::to_string(samples.size()));
    }
    const double h = opts.bandwidth > 0.0 ? opts.bandwidth : silverman_bandwidth(samples);
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out;
    out.reserve(eval_points.size());
    for (double r : eval_points) out.push_back(score_at(sorted, r, h, opts.reflect_at_zero));
    return out;
}

ScoreField kernel_score_by_region(const EnvelopeImage& img, const Grid<int>& labels, const KernelOptions& opts) {
    if (!labels.same_shape(img.width(), img.height())) throw InvalidArgument("kernel_score_by_region: label shape mismatch");
    std::map<int, std::vector<std::size_t>> regions;
    for (std::size_t i = 0; i < labels.size(); ++i) regions[labels[i]].push_back(i);
    ScoreField out(img.width(), img.height());
    const auto& a = img.amplitudes();
    for (const auto& [label, idx] : regions) {
        std::vector<double> vals;
        vals.reserve(idx.size());
        for (std::size_t i : idx) vals.push_back(a[i]);
        const auto s = kernel_score(vals, vals, opts);
        for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = s[k];
    }
    return out;
}

ScoreField kernel_score_local(const EnvelopeImage& img, std::size_t side, const KernelOptions& opts) {
    if (side < 3 || side % 2 == 0) throw InvalidArgument("kernel_score_local: side must be odd and >= 3");
    if (side * side < opts.min_samples) {
        throw InvalidArgument("kernel_score_local: window of " + std::to_string(side * side) + " pixels is below the " +
                              std::to_string(opts.min_samples) + "-sample minimum");
    }
    const std::size_t w = img.width(), h = img.height(), half = side / 2;
    ScoreField out(w, h);
    std::vector<double> win;
    for (std::size_t y = 0; y < h; ++y) {
        const std::size_t y0 = y >= half ? y - half : 0, y1 = std::min(h, y + half + 1);
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t x0 = x >= half ? x - half : 0, x1 = std::min(w, x + half + 1);
            win.clear();
            for (std::size_t yy = y0; yy < y1; ++yy) {
                for (std::size_t xx = x0; xx < x1; ++xx) win.push_back(img(xx, yy));
            }
            KernelOptions o = opts;
            o.min_samples = std::min(opts.min_samples, win.size());
            const double r = img(x, y);
            out(x, y) = kernel_score(win, std::span<const double>(&r, 1), o)[0];
        }
    }
    return out;
}

}  // namespace qus::score
