#pragma once

namespace qus {

/// Gamma function for x > 0. Lanczos approximation (g = 7, nine terms) with
/// upward recurrence below 0.5. Throws DomainError for x <= 0 or non-finite x.
double gamma_fn(double x);

/// log Gamma(x) for x > 0, stable for large arguments.
double log_gamma(double x);

/// Digamma psi(x) = d/dx log Gamma(x) for x > 0.
///
/// Arguments below 10 are shifted up with psi(x) = psi(x + 1) - 1/x and the
/// asymptotic Bernoulli series finishes the job. Near the positive root
/// x0 ~ 1.4616 a Taylor expansion about x0 keeps the relative error small where
/// the recurrence would lose everything to cancellation.
double digamma(double x);

/// Trigamma psi'(x) for x > 0, used by the Newton step of the exact MLE.
double trigamma(double x);

}  // namespace qus
