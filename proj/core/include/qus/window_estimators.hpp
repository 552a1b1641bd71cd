#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qus/image.hpp"

namespace qus {

enum class BorderPolicy { Shrink, Reflect };

/// Square sliding window. Side must be odd and >= 3, 1 <= stride <= side.
struct WindowSpec {
    std::size_t side = 9;
    std::size_t stride = 1;
    BorderPolicy border = BorderPolicy::Shrink;

    /// Throws InvalidArgument on a malformed spec.
    void validate() const;
    /// Stride of ceil(side / 2), the default step for the MLE maps.
    static WindowSpec half_step(std::size_t side, BorderPolicy border = BorderPolicy::Shrink);
};

std::string to_string(BorderPolicy b);
BorderPolicy border_policy_from_string(const std::string& s);

struct MomentEstimate {
    double m_inv;  // the shape estimate (inverse normalized variance of r^2)
    double omega_hat;
};

/// Inverse-normalized-variance estimator with population (1/N) moments:
/// omega = mean(r^2), m = omega^2 / mean((r^2 - omega)^2).
/// Throws DegenerateWindow when the variance of r^2 vanishes.
MomentEstimate moment_estimate(std::span<const double> window);

/// log(mean r^2) - mean(log r^2). Throws DomainError if any r <= 0.
double mle_delta(std::span<const double> window);

/// Closed-form ML approximation m = 1 / (2 delta).
double mle_taylor(std::span<const double> window);

/// Root of log(m) - digamma(m) = delta. Newton's method inside a shrinking
/// bracket; the returned root satisfies |log m - psi(m) - delta| < 1e-10.
double mle_exact(std::span<const double> window);
double mle_exact_from_delta(double delta);

enum class Estimator { Moment, MleTaylor, MleExact };
std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& s);

struct MapOptions {
    double clamp_lo = 0.01;
    double clamp_hi = 10.0;
    unsigned threads = 0;
};

/// Windowed estimate at every pixel (or every stride-th pixel with
/// nearest-centre fill). Degenerate windows become invalid pixels; all valid
/// estimates are clamped to [clamp_lo, clamp_hi]. Zero amplitudes are lifted
/// to 1e-6 x image max before the MLE estimators take logarithms.
ParamMap sliding_map(const EnvelopeImage& img, const WindowSpec& spec, Estimator est,
                     const MapOptions& opts = {});

/// Window-modulated compounding: pixel-wise mean of moment maps over K >= 2
/// window specs. A pixel is invalid only if every constituent is invalid.
ParamMap wmc_map(const EnvelopeImage& img, const std::vector<WindowSpec>& specs,
                 const MapOptions& opts = {});

/// Pixel-wise mean of already computed maps, same masking rule as wmc_map.
ParamMap mean_of_maps(const std::vector<ParamMap>& maps);

}  // namespace qus
