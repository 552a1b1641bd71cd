#pragma once

#include <span>
#include <vector>

#include "qus/image.hpp"

namespace qus::score {

struct KernelOptions {
    /// Gaussian bandwidth; <= 0 selects Silverman's rule
    /// h = 0.9 min(sd, IQR / 1.34) n^(-1/5).
    double bandwidth = 0.0;
    /// Add mirror images of the samples about r = 0 (boundary correction for
    /// non-negative amplitudes).
    bool reflect_at_zero = false;
    std::size_t min_samples = 100;
};

double silverman_bandwidth(std::span<const double> samples);

/// d/dr log p_hat(r) of a Gaussian kernel density estimate at each evaluation
/// point. Points with no kernel support return NaN. Throws InvalidArgument
/// when fewer than opts.min_samples samples are given.
std::vector<double> kernel_score(std::span<const double> samples, std::span<const double> eval_points,
                                 const KernelOptions& opts = {});

/// Kernel score of every pixel against the amplitudes of its own region
/// (pixels sharing a label).
ScoreField kernel_score_by_region(const EnvelopeImage& img, const Grid<int>& labels, const KernelOptions& opts = {});

/// Kernel score of every pixel against the side x side window around it
/// (clipped at the border). side * side must reach opts.min_samples.
ScoreField kernel_score_local(const EnvelopeImage& img, std::size_t side, const KernelOptions& opts = {});

}  // namespace qus::score
