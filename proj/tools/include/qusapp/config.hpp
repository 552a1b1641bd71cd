#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qus/imaging.hpp"
#include "qus/train.hpp"
#include "qus/window_estimators.hpp"

namespace qusapp {

namespace fs = std::filesystem;

struct PhantomSection {
    std::string source = "builtin";  // builtin | directory
    std::string pattern = "two-region";
    std::size_t count = 1;
    std::size_t width = 64;
    std::size_t height = 64;
    std::size_t cell = 8;            // checkerboard cell side
    fs::path directory;              // PGM files when source = directory
    double omega = 1.0;
};

struct TrainSection {
    std::string source = "builtin";  // builtin (own phantom set) | simulated (the run's envelopes)
    std::string pattern = "glyph";
    std::size_t images = 64;
    std::size_t size = 64;
    std::size_t glyph_size = 28;     // glyphs are drawn at this size, then resampled to `size`
    qus::score::TrainConfig cfg;
    std::size_t channels = 16;
    std::size_t depth = 6;
    std::string head = "nakagami";
    double basis_floor = 0.05;
    std::string checkpoint = "model.qsc";
    fs::path resume;
};

struct EstimateSection {
    std::vector<std::string> estimators{"moment", "mle", "wmc", "unicorn"};
    std::size_t window = 9;
    std::size_t stride = 1;
    std::size_t mle_stride = 0;      // 0 = half the window (rounded up)
    qus::BorderPolicy border = qus::BorderPolicy::Shrink;
    std::vector<std::size_t> wmc_windows{9, 11, 13};
    std::string score = "analytic";  // analytic | kernel | checkpoint
    fs::path checkpoint;             // empty: the run's own trained model
    std::size_t kernel_window = 15;
    bool kernel_reflect = false;
    std::string omega_mode = "global";  // global | local | known
    std::size_t omega_window = 9;
    std::string filter = "median";      // median | average | none
    std::size_t filter_side = 7;
};

struct EvaluateSection {
    double psnr_max = 2.0;
    fs::path cohort;  // CSV with id,feature,reference columns
};

struct ExperimentConfig {
    fs::path output = "qus-run";
    std::uint64_t seed = 0;
    unsigned threads = 0;  // 0: QUS_THREADS or 1
    PhantomSection phantom;
    TrainSection train;
    EstimateSection estimate;
    EvaluateSection evaluate;

    /// Throws qus::ConfigError for inconsistent settings.
    void validate() const;

    /// Sorted key = value lines of every setting that influences results
    /// (output directory and thread count excluded).
    std::string canonical() const;
    std::string hash() const;
    /// Hash of the settings that shape a trained model (epochs excluded so a
    /// resumed run can extend training).
    std::string train_hash() const;
};

/// INI text with [run], [phantom], [train], [estimate] and [evaluate]
/// sections. Unknown sections or keys are configuration errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const fs::path& path);

/// Command-line overrides; negative/empty means "not given".
struct Overrides {
    std::string output;
    long long seed = -1;
    int threads = -1;
};
void apply(ExperimentConfig& cfg, const Overrides& o);

}  // namespace qusapp
