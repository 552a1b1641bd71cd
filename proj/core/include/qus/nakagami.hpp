#pragma once

#include <cstddef>
#include <vector>

#include "qus/rng.hpp"

namespace qus {

/// Shape m and scale Omega = E[R^2] of a Nakagami envelope distribution.
class NakagamiParams {
public:
    /// Throws InvalidArgument unless both values are finite and positive.
    NakagamiParams(double m, double omega);

    double m() const noexcept { return m_; }
    double omega() const noexcept { return omega_; }

    bool operator==(const NakagamiParams&) const = default;

private:
    double m_;
    double omega_;
};

/// Density of the envelope amplitude. Zero for r < 0.
double pdf(double r, const NakagamiParams& p);

/// Natural log of the density; requires r > 0.
double log_pdf(double r, const NakagamiParams& p);

/// Sum of log_pdf over i.i.d. samples (the sample log-likelihood).
double log_likelihood(const std::vector<double>& rs, const NakagamiParams& p);

/// d/dr log p(r) = (2m - 1)/r - 2 m r / Omega; requires r > 0.
double analytic_score(double r, const NakagamiParams& p);

/// Cumulative distribution P(R <= r), via the regularized lower incomplete gamma.
double cdf(double r, const NakagamiParams& p);

/// n exact draws: R = sqrt(Y), Y ~ Gamma(shape m, mean Omega).
std::vector<double> sample(const NakagamiParams& p, std::size_t n, Rng& rng);
std::vector<double> sample(const NakagamiParams& p, std::size_t n, std::uint64_t seed);

/// One draw, for per-pixel synthesis.
double sample_one(const NakagamiParams& p, Rng& rng);

}  // namespace qus
