#include "qus/nakagami.hpp"

#include <cmath>
#include <string>

#include "qus/error.hpp"
#include "qus/special.hpp"

namespace qus {
namespace {

void require_finite(double r, const char* fn) {
    if (!std::isfinite(r)) throw InvalidArgument(std::string(fn) + ": non-finite amplitude");
}

void require_positive_r(double r, const char* fn) {
    require_finite(r, fn);
    if (r <= 0.0) throw DomainError(std::string(fn) + ": amplitude must be > 0");
}

// Regularized lower incomplete gamma P(a, x): series for x < a + 1,
// Lentz continued fraction otherwise.
double regularized_lower_gamma(double a, double x) {
    if (x <= 0.0) return 0.0;
    const double log_prefix = a * std::log(x) - x - log_gamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        for (int n = 1; n < 1000; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        return sum * std::exp(log_prefix);
    }
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 - std::exp(log_prefix) * h;
}

}  // namespace

NakagamiParams::NakagamiParams(double m, double omega) : m_(m), omega_(omega) {
    if (!std::isfinite(m) || !std::isfinite(omega) || m <= 0.0 || omega <= 0.0) {
        throw InvalidArgument("NakagamiParams: m and omega must be finite and > 0 (m=" +
                              std::to_string(m) + ", omega=" + std::to_string(omega) + ")");
    }
}

double pdf(double r, const NakagamiParams& p) {
    require_finite(r, "pdf");
    if (r < 0.0) return 0.0;
    if (r == 0.0) {
        // r^(2m-1) at the origin: finite only for m >= 1/2.
        if (p.m() > 0.5) return 0.0;
        if (p.m() == 0.5) return 2.0 / gamma_fn(0.5) * std::sqrt(0.5 / p.omega());
        return INFINITY;
    }
    return std::exp(log_pdf(r, p));
}

double log_pdf(double r, const NakagamiParams& p) {
    require_positive_r(r, "log_pdf");
    const double m = p.m();
    const double ratio = m / p.omega();
    return std::log(2.0) - log_gamma(m) + m * std::log(ratio) + (2.0 * m - 1.0) * std::log(r) -
           ratio * r * r;
}

double log_likelihood(const std::vector<double>& rs, const NakagamiParams& p) {
    double sum = 0.0;
    for (double r : rs) sum += log_pdf(r, p);
    return sum;
}

double analytic_score(double r, const NakagamiParams& p) {
    require_positive_r(r, "analytic_score");
    return (2.0 * p.m() - 1.0) / r - 2.0 * p.m() * r / p.omega();
}

double cdf(double r, const NakagamiParams& p) {
    require_finite(r, "cdf");
    if (r <= 0.0) return 0.0;
    return regularized_lower_gamma(p.m(), p.m() / p.omega() * r * r);
}

double sample_one(const NakagamiParams& p, Rng& rng) {
    // Gamma(shape m, scale Omega/m) has mean Omega.
    return std::sqrt(rng.gamma(p.m()) * (p.omega() / p.m()));
}

std::vector<double> sample(const NakagamiParams& p, std::size_t n, Rng& rng) {
    if (n == 0) throw InvalidArgument("sample: n must be >= 1");
    std::vector<double> out(n);
    for (auto& v : out) v = sample_one(p, rng);
    return out;
}

std::vector<double> sample(const NakagamiParams& p, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return sample(p, n, rng);
}

}  // namespace qus
