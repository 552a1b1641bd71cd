#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qus/ardae.hpp"
#include "qus/network.hpp"

namespace qus::score {

/// How the per-sample perturbation scale is drawn from the annealed delta.
enum class SigmaMode {
    AbsNormal,  // sigma = |N(0, delta^2)|
    Fixed,      // sigma = delta
};
std::string to_string(SigmaMode m);
SigmaMode sigma_mode_from_string(const std::string& s);

struct TrainConfig {
    std::size_t epochs = 50;
    double learning_rate = 2e-4;
    std::size_t lr_halve_epoch = 25;  // epochs from this index on run at half rate
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t batch_size = 8;
    std::size_t crop = 256;           // reduced to the image size for small images
    /// delta anneals linearly from delta_max_rel to delta_min_rel times the
    /// standard deviation of the normalized training amplitudes.
    double delta_max_rel = 0.1;
    double delta_min_rel = 0.001;
    SigmaMode sigma_mode = SigmaMode::AbsNormal;
    bool antithetic = true;
    LossWeighting weighting = LossWeighting::Amplitude;
    bool augment_flip = true;
    bool augment_rotate = true;       // multiples of 90 degrees
    std::uint64_t seed = 0;
    double divergence_factor = 10.0;
    std::size_t divergence_patience = 100;

    void validate() const;
};

struct StepRecord {
    std::size_t epoch;
    std::size_t step;
    double delta;
    double learning_rate;
    double loss;
    double excess;  // loss minus the noise energy of the batch
};

struct TrainResult {
    ScoreModel model;
    std::vector<StepRecord> history;
    std::size_t epochs_completed = 0;
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss, double mean_excess)>;

/// Fits the score model with AdamW (decoupled weight decay) on random crops,
/// flips and quarter-turn rotations of the normalized training images.
/// Deterministic for a fixed seed. When `start` is given training resumes
/// from its parameters at epoch `start_epoch`.
/// Throws InvalidArgument for an empty dataset and TrainingFailure when the
/// loss stays above divergence_factor x its initial value for
/// divergence_patience consecutive steps.
TrainResult train(const std::vector<EnvelopeImage>& dataset, const TrainConfig& cfg, const Architecture& arch,
                  const EpochCallback& on_epoch = {}, const ScoreModel* start = nullptr, std::size_t start_epoch = 0);

/// delta for an epoch (before multiplying by the data standard deviation).
double annealed_delta_rel(const TrainConfig& cfg, std::size_t epoch);

}  // namespace qus::score
