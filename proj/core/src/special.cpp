#include "qus/special.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "qus/error.hpp"

namespace qus {
namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

void require_positive(double x, const char* fn) {
    if (!std::isfinite(x) || x <= 0.0) {
        throw DomainError(std::string(fn) + ": argument must be finite and > 0, got " +
                          std::to_string(x));
    }
}

// Lanczos series A_g(x) for argument x >= 0.5; Gamma(x) = sqrt(2 pi) t^(x-0.5) e^-t A
// with t = x - 1 + g + 0.5.
double lanczos_sum(double x) {
    double a = kLanczos[0];
    const double z = x - 1.0;
    for (std::size_t i = 1; i < kLanczos.size(); ++i) a += kLanczos[i] / (z + static_cast<double>(i));
    return a;
}

// Root of digamma and the Taylor coefficients psi^(k)(x0)/k! about it.
constexpr double kRootHi = 1.4616321449683622;
constexpr double kRootLo = 9.549995429965697e-17;
constexpr std::array<double, 9> kRootTaylor = {
    0.9676722454476212,   -0.4427631689835921,  0.258499760955651,
    -0.16394270544240652, 0.10782405069126237,  -0.07219956125645471,
    0.04880428816414311,  -0.03316112647484736, 0.022597648232218104};

}  // namespace

double gamma_fn(double x) {
    require_positive(x, "gamma_fn");
    if (x < 0.5) return gamma_fn(x + 1.0) / x;
    if (x > 171.6) return INFINITY;
    const double t = x - 0.5 + kLanczosG;
    // Split the power to avoid overflow of t^(x-0.5) before e^-t tames it.
    const double half = std::pow(t, 0.5 * (x - 0.5));
    return std::sqrt(2.0 * std::numbers::pi) * half * (half * std::exp(-t)) * lanczos_sum(x);
}

double log_gamma(double x) {
    require_positive(x, "log_gamma");
    if (x < 0.5) return log_gamma(x + 1.0) - std::log(x);
    if (x < 20.0) return std::log(gamma_fn(x));
    const double t = x - 0.5 + kLanczosG;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (x - 0.5) * std::log(t) - t +
           std::log(lanczos_sum(x));
}

double digamma(double x) {
    require_positive(x, "digamma");
    const double dx = (x - kRootHi) - kRootLo;
    if (std::abs(dx) < 0.05) {
        double acc = 0.0;
        for (auto it = kRootTaylor.rbegin(); it != kRootTaylor.rend(); ++it) acc = acc * dx + *it;
        return acc * dx;
    }
    double shift = 0.0;
    while (x < 10.0) {
        shift -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    // Bernoulli tail: B2k / (2k x^2k), k = 1..7
    const double tail =
        inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 -
        inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 * (1.0 / 12)))))));
    return shift + std::log(x) - 0.5 * inv - tail;
}

double trigamma(double x) {
    require_positive(x, "trigamma");
    double acc = 0.0;
    while (x < 10.0) {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    const double tail = inv * (1.0 + inv * (0.5 + inv * (1.0 / 6 - inv2 * (1.0 / 30 -
                        inv2 * (1.0 / 42 - inv2 * (1.0 / 30 - inv2 * (5.0 / 66)))))));
    return acc + tail;
}

}  // namespace qus
