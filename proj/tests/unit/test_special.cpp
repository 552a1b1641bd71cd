#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qus/error.hpp"
#include "qus/special.hpp"

namespace {

// Reference values from 40-digit mpmath evaluations.
struct Ref {
    double x, gamma, lgamma, digamma, trigamma;
};
constexpr Ref kRefs[] = {
    {0.1, 9.5135076986687312858, 2.252712651734205902, -10.423754940411076232, 101.4332991507927477},
    {0.5, 1.7724538509055160273, 0.57236494292470008707, -1.9635100260214234794, 4.9348022005446793094},
    {1.0, 1.0, 0.0, -0.57721566490153286061, 1.6449340668482264365},
    {1.5, 0.88622692545275801365, -0.12078223763524522235, 0.036489973978576520559, 0.93480220054467930942},
    {2.5, 1.3293403881791370205, 0.28468287047291915963, 0.70315664064524318723, 0.49035775610023486497},
    {7.3, 1271.4236336639088399, 7.1478925230222486921, 1.9178203356379860723, 0.14679576813142710199},
    {30.0, 8.8417619937397019545e+30, 71.25703896716800901, 3.3844381326855248766, 0.033895060357739944214},
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

TEST(Special, ClassicalIdentities) {
    EXPECT_NEAR(qus::gamma_fn(0.5), std::sqrt(std::numbers::pi), 1e-14);
    EXPECT_NEAR(qus::gamma_fn(5.0), 24.0, 1e-11);
    EXPECT_NEAR(qus::digamma(1.0), -0.5772156649015329, 1e-14);
}

TEST(Special, MatchesHighPrecisionReference) {
    for (const auto& r : kRefs) {
        SCOPED_TRACE(r.x);
        EXPECT_LT(rel(qus::gamma_fn(r.x), r.gamma), 1e-12);
        if (r.lgamma != 0.0) EXPECT_LT(rel(qus::log_gamma(r.x), r.lgamma), 1e-12);
        else EXPECT_NEAR(qus::log_gamma(r.x), 0.0, 1e-15);
        EXPECT_LT(rel(qus::digamma(r.x), r.digamma), 1e-10);
        EXPECT_LT(rel(qus::trigamma(r.x), r.trigamma), 1e-10);
    }
}

TEST(Special, DigammaNearItsRoot) {
    // psi(1.46) = -0.0015805619870834176761 (mpmath)
    EXPECT_LT(rel(qus::digamma(1.46), -0.0015805619870834176761), 1e-10);
    EXPECT_LT(std::abs(qus::digamma(1.4616321449683622)), 1e-15);
}

TEST(Special, RecurrencesHoldAcrossTheRange) {
    for (double x = 0.05; x < 50.0; x *= 1.37) {
        SCOPED_TRACE(x);
        EXPECT_LT(rel(qus::gamma_fn(x + 1.0), x * qus::gamma_fn(x)), 1e-12);
        EXPECT_NEAR(qus::digamma(x + 1.0), qus::digamma(x) + 1.0 / x, 1e-10 * std::max(1.0, std::abs(qus::digamma(x))));
        EXPECT_NEAR(qus::log_gamma(x), std::log(qus::gamma_fn(x)), 1e-12 * std::max(1.0, std::abs(qus::log_gamma(x))));
    }
}

TEST(Special, DigammaIsDerivativeOfLogGamma) {
    for (double x : {0.3, 0.9, 2.0, 4.5, 17.0}) {
        const double h = 1e-5 * x;
        const double fd = (qus::log_gamma(x + h) - qus::log_gamma(x - h)) / (2 * h);
        EXPECT_NEAR(qus::digamma(x), fd, 1e-7 * std::max(1.0, std::abs(fd)));
    }
}

TEST(Special, RejectsNonPositiveArguments) {
    for (double x : {0.0, -1.0, -0.5, double(NAN), double(INFINITY)}) {
        EXPECT_THROW(qus::gamma_fn(x), qus::DomainError);
        EXPECT_THROW(qus::digamma(x), qus::DomainError);
        EXPECT_THROW(qus::trigamma(x), qus::DomainError);
        EXPECT_THROW(qus::log_gamma(x), qus::DomainError);
    }
}

}  // namespace
