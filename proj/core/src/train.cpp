#include "qus/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qus/error.hpp"
#include "qus/rng.hpp"

namespace qus::score {
namespace {

struct AdamW {
    std::vector<double> m, v;
    std::size_t t = 0;

    explicit AdamW(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

    void step(std::vector<double>& theta, const std::vector<double>& g, double lr, const TrainConfig& cfg) {
        ++t;
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
        const double decay = 1.0 - lr * cfg.weight_decay;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            theta[i] = theta[i] * decay - lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.adam_eps);
        }
    }
};

// Random crop, optional horizontal flip and quarter-turn rotation.
Grid<double> augment(const Grid<double>& src, const TrainConfig& cfg, Rng& rng) {
    const std::size_t cw = std::min(cfg.crop, src.width());
    const std::size_t ch = std::min(cfg.crop, src.height());
    const std::size_t ox = static_cast<std::size_t>(rng.below(src.width() - cw + 1));
    const std::size_t oy = static_cast<std::size_t>(rng.below(src.height() - ch + 1));
    const bool flip = cfg.augment_flip && rng.below(2) == 1;
    std::size_t turns = 0;
    if (cfg.augment_rotate) turns = cw == ch ? rng.below(4) : 2 * rng.below(2);

    const std::size_t ow = (turns % 2) ? ch : cw;
    const std::size_t oh = (turns % 2) ? cw : ch;
    Grid<double> out(ow, oh);
    for (std::size_t y = 0; y < ch; ++y) {
        for (std::size_t x = 0; x < cw; ++x) {
            const double v = src(ox + (flip ? cw - 1 - x : x), oy + y);
            std::size_t tx = x, ty = y;
            switch (turns) {
                case 1: tx = ch - 1 - y; ty = x; break;
                case 2: tx = cw - 1 - x; ty = ch - 1 - y; break;
                case 3: tx = y; ty = cw - 1 - x; break;
                default: break;
            }
            out(tx, ty) = v;
        }
    }
    return out;
}

}  // namespace

std::string to_string(SigmaMode m) { return m == SigmaMode::AbsNormal ? "abs-normal" : "fixed"; }

SigmaMode sigma_mode_from_string(const std::string& s) {
    if (s == "abs-normal") return SigmaMode::AbsNormal;
    if (s == "fixed") return SigmaMode::Fixed;
    throw InvalidArgument("unknown sigma mode '" + s + "'");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw InvalidArgument("train: epochs must be >= 1");
    if (batch_size < 1) throw InvalidArgument("train: batch size must be >= 1");
    if (crop < 3) throw InvalidArgument("train: crop must be >= 3");
    if (!(learning_rate > 0.0)) throw InvalidArgument("train: learning rate must be > 0");
    if (!(delta_min_rel > 0.0) || delta_max_rel < delta_min_rel) {
        throw InvalidArgument("train: need delta_max >= delta_min > 0");
    }
}

double annealed_delta_rel(const TrainConfig& cfg, std::size_t epoch) {
    if (cfg.epochs <= 1) return cfg.delta_max_rel;
    const double t = static_cast<double>(std::min(epoch, cfg.epochs - 1)) / static_cast<double>(cfg.epochs - 1);
    return cfg.delta_max_rel + (cfg.delta_min_rel - cfg.delta_max_rel) * t;
}

TrainResult train(const std::vector<EnvelopeImage>& dataset, const TrainConfig& cfg, const Architecture& arch,
                  const EpochCallback& on_epoch, const ScoreModel* start, std::size_t start_epoch) {
    cfg.validate();
    if (dataset.empty()) throw InvalidArgument("train: empty dataset");

    std::vector<Grid<double>> normalized;
    normalized.reserve(dataset.size());
    double rms_sum = 0.0, s1 = 0.0, s2 = 0.0, count = 0.0;
    for (const auto& img : dataset) {
        const double rms = image_rms(img.amplitudes());
        rms_sum += rms;
        Grid<double> x = img.amplitudes();
        for (double& v : x.values()) {
            v /= rms;
            s1 += v;
            s2 += v * v;
        }
        count += static_cast<double>(x.size());
        normalized.push_back(std::move(x));
    }
    const double data_std = std::sqrt(std::max(s2 / count - (s1 / count) * (s1 / count), 1e-12));

    TrainResult result;
    if (start) {
        if (!(start->arch == arch)) throw InvalidArgument("train: resume model has a different architecture");
        result.model = *start;
    } else {
        result.model = ScoreModel::initialized(arch, cfg.seed);
    }
    result.model.norm.training_rms = rms_sum / static_cast<double>(dataset.size());

    AdamW opt(result.model.params.size());
    Workspace ws;
    std::vector<std::size_t> order(normalized.size());
    double initial_loss = NAN;
    std::size_t over_limit = 0;
    std::size_t step = 0;
    const LossOptions loss_opts{cfg.antithetic, cfg.weighting};

    for (std::size_t epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
        // Per-epoch stream so that resuming at an epoch replays the same draws.
        Rng rng = Rng(cfg.seed ^ 0x5eedf00dULL).split(epoch);
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

        const double delta = annealed_delta_rel(cfg, epoch) * data_std;
        const double lr = epoch >= cfg.lr_halve_epoch ? 0.5 * cfg.learning_rate : cfg.learning_rate;
        double epoch_loss = 0.0, epoch_excess = 0.0;
        std::size_t epoch_steps = 0;

        for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg.batch_size) {
            const std::size_t b1 = std::min(order.size(), b0 + cfg.batch_size);
            std::vector<Grid<double>> crops, noises;
            crops.reserve(b1 - b0);
            noises.reserve(b1 - b0);
            std::vector<DenoisingSample> batch;
            for (std::size_t i = b0; i < b1; ++i) {
                crops.push_back(augment(normalized[order[i]], cfg, rng));
                Grid<double> u(crops.back().width(), crops.back().height());
                for (double& v : u.values()) v = rng.normal();
                noises.push_back(std::move(u));
            }
            for (std::size_t i = 0; i < crops.size(); ++i) {
                double sigma = delta;
                if (cfg.sigma_mode == SigmaMode::AbsNormal) {
                    do { sigma = std::abs(rng.normal()) * delta; } while (sigma == 0.0);
                }
                batch.push_back({&crops[i], &noises[i], sigma});
            }

            LossResult lr_res = ardae_loss(result.model, batch, loss_opts, ws);
            if (std::isnan(initial_loss)) initial_loss = lr_res.loss;
            if (lr_res.loss > cfg.divergence_factor * initial_loss) {
                if (++over_limit >= cfg.divergence_patience) {
                    throw TrainingFailure("train: loss diverged (" + std::to_string(lr_res.loss) + " vs initial " +
                                          std::to_string(initial_loss) + ")");
                }
            } else {
                over_limit = 0;
            }
            opt.step(result.model.params, lr_res.grad, lr, cfg);
            const double excess = lr_res.loss - lr_res.noise_energy;
            result.history.push_back({epoch, step++, delta, lr, lr_res.loss, excess});
            epoch_loss += lr_res.loss;
            epoch_excess += excess;
            ++epoch_steps;
        }
        result.epochs_completed = epoch + 1;
        if (on_epoch) {
            on_epoch(epoch, epoch_loss / static_cast<double>(epoch_steps),
                     epoch_excess / static_cast<double>(epoch_steps));
        }
    }
    return result;
}

}  // namespace qus::score
