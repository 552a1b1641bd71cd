#include "qus/metrics.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>

#include "qus/error.hpp"

namespace qus::stats {

double mse(const ParamMap& estimate, const ParamMap& truth, const Mask* mask) {
    if (estimate.width() != truth.width() || estimate.height() != truth.height()) {
        throw InvalidArgument("mse: map shapes differ");
    }
    if (mask && !mask->same_shape(estimate.m)) throw InvalidArgument("mse: mask shape differs");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < estimate.m.size(); ++i) {
        if (!estimate.valid[i] || !truth.valid[i] || (mask && !(*mask)[i])) continue;
        const double d = estimate.m[i] - truth.m[i];
        sum += d * d;
        ++n;
    }
    if (n == 0) throw InvalidArgument("mse: empty comparison mask");
    return sum / static_cast<double>(n);
}

double rmse(const ParamMap& estimate, const ParamMap& truth, const Mask* mask) {
    return std::sqrt(mse(estimate, truth, mask));
}

double psnr_from_mse(double mse_value, double max_value) {
    if (mse_value == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(max_value * max_value / mse_value);
}

double psnr(const ParamMap& estimate, const ParamMap& truth, double max_value, const Mask* mask) {
    return psnr_from_mse(mse(estimate, truth, mask), max_value);
}

double mse(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) throw InvalidArgument("mse: length mismatch or empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
    return sum / static_cast<double>(a.size());
}

double rmse(std::span<const double> a, std::span<const double> b) { return std::sqrt(mse(a, b)); }

double student_t_two_sided(double t, double df) {
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 3) throw InvalidArgument("pearson: need at least 3 pairs");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw NumericError("pearson: correlation undefined for zero variance");
    double r = sxy / std::sqrt(sxx * syy);
    r = std::clamp(r, -1.0, 1.0);
    const double dof = static_cast<double>(n - 2);
    const double denom = 1.0 - r * r;
    const double t = denom <= 0.0 ? std::copysign(std::numeric_limits<double>::infinity(), r)
                                  : r * std::sqrt(dof / denom);
    return {r, t, student_t_two_sided(t, dof), n};
}

namespace {

struct Moments {
    double mean;
    double var;  // unbiased
    double n;
};

Moments sample_moments(std::span<const double> v, const char* who) {
    if (v.size() < 2) throw InvalidArgument(std::string(who) + ": each group needs at least 2 values");
    double mean = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) throw InvalidArgument(std::string(who) + ": non-finite value");
        mean += x;
    }
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, ss / static_cast<double>(v.size() - 1), static_cast<double>(v.size())};
}

}  // namespace

TTest welch_test(std::span<const double> a, std::span<const double> b) {
    const auto ma = sample_moments(a, "welch_test");
    const auto mb = sample_moments(b, "welch_test");
    const double va = ma.var / ma.n;
    const double vb = mb.var / mb.n;
    const double se2 = va + vb;
    const double diff = ma.mean - mb.mean;
    if (se2 == 0.0) {
        if (diff == 0.0) return {0.0, ma.n + mb.n - 2.0, 1.0};
        throw InvalidArgument("welch_test: both groups have zero variance");
    }
    const double t = diff / std::sqrt(se2);
    const double df = se2 * se2 / (va * va / (ma.n - 1.0) + vb * vb / (mb.n - 1.0));
    return {t, df, student_t_two_sided(t, df)};
}

TTest pooled_t_test(std::span<const double> a, std::span<const double> b) {
    const auto ma = sample_moments(a, "pooled_t_test");
    const auto mb = sample_moments(b, "pooled_t_test");
    const double df = ma.n + mb.n - 2.0;
    const double sp2 = ((ma.n - 1.0) * ma.var + (mb.n - 1.0) * mb.var) / df;
    const double se = std::sqrt(sp2 * (1.0 / ma.n + 1.0 / mb.n));
    const double diff = ma.mean - mb.mean;
    if (se == 0.0) {
        if (diff == 0.0) return {0.0, df, 1.0};
        throw InvalidArgument("pooled_t_test: both groups have zero variance");
    }
    const double t = diff / se;
    return {t, df, student_t_two_sided(t, df)};
}

std::string significance_stars(double p) {
    if (p < 1e-4) return "****";
    if (p < 1e-3) return "***";
    if (p < 1e-2) return "**";
    if (p < 0.05) return "*";
    return "ns";
}

}  // namespace qus::stats
