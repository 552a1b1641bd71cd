#pragma once

#include <span>
#include <string>
#include <vector>

#include "qus/network.hpp"

namespace qus::score {

/// One term of the denoising objective: a clean normalized image, a standard
/// normal noise field of the same shape, and the perturbation scale.
struct DenoisingSample {
    const Grid<double>* clean;
    const Grid<double>* noise;
    double sigma;
};

/// Per-pixel weight on the squared residual.
///   Uniform:   every pixel counts equally.
///   Amplitude: weight (x + sigma u)^2, the squared perturbed amplitude. The
///              pointwise minimizer is unchanged, but the 1/x part of
///              Nakagami scores stays square-integrable for m <= 1 and the
///              density jump at x = 0 no longer dominates the objective.
enum class LossWeighting { Uniform, Amplitude };
std::string to_string(LossWeighting w);
LossWeighting loss_weighting_from_string(const std::string& s);

struct LossOptions {
    /// Also evaluate the mirrored perturbation (-u) for every sample. Both
    /// signs are equally likely under the noise law, so the expectation is
    /// unchanged while the O(sigma) noise term of the estimate cancels.
    bool antithetic = true;
    LossWeighting weighting = LossWeighting::Uniform;
};

struct LossResult {
    double loss = 0.0;           // mean of w |u + sigma s(R + sigma u)|^2 over samples and pixels
    double noise_energy = 0.0;   // mean of w u^2 over the same terms (the loss of a zero model)
    std::vector<double> grad;    // d loss / d params
};

/// AR-DAE objective and its parameter gradient by reverse-mode differentiation.
/// Throws InvalidArgument for sigma <= 0 or shape mismatches, NumericError
/// when the loss is not finite.
LossResult ardae_loss(const ScoreModel& model, std::span<const DenoisingSample> batch, const LossOptions& opts = {});

/// Same computation reusing a caller-owned workspace.
LossResult ardae_loss(const ScoreModel& model, std::span<const DenoisingSample> batch, const LossOptions& opts,
                      Workspace& ws);

}  // namespace qus::score
