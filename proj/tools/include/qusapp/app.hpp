#pragma once

#include <map>
#include <string>
#include <vector>

#include "qusapp/config.hpp"

namespace qusapp {

/// Process exit codes. Command-line usage errors count as configuration
/// errors; 1 is reserved for unexpected internal failures.
enum ExitCode : int { kOk = 0, kInternal = 1, kConfigError = 2, kDataError = 3, kNumericFailure = 4 };

/// Maps an exception onto an exit code: configuration problems give 2,
/// unreadable or inconsistent data 3, numeric and training failures 4.
int exit_code_for(const std::exception& e);

/// Output layout (relative to the run directory):
///   phantoms/<name>.pfm          ground-truth m map
///   envelopes/<name>.pfm         simulated envelope
///   model.qsc, loss.csv          trained score model and its loss history
///   maps/<name>__<method>.pfm    one map per estimator per image
///   metrics.csv, table.csv       per-image and per-method PSNR / RMSE
///   cohort_roc.csv, cohort_box.csv, cohort_summary.txt   when a cohort is given
///   manifest.json                config hash, version, stages, file checksums
///   timings.json                 wall-clock seconds per stage (not checksummed)
struct StageResult {
    std::vector<std::string> written;  // paths relative to the run directory
};

StageResult cmd_simulate(const ExperimentConfig& cfg);
StageResult cmd_train(const ExperimentConfig& cfg);
StageResult cmd_estimate(const ExperimentConfig& cfg);
StageResult cmd_evaluate(const ExperimentConfig& cfg);
/// simulate, train (when a UNICORN map needs the run's own model), estimate,
/// evaluate.
StageResult cmd_compare(const ExperimentConfig& cfg);

/// Runs one subcommand by name, updating manifest.json and timings.json.
void run_command(const std::string& name, const ExperimentConfig& cfg);

/// Method identifiers used in file names and tables, in configuration order.
std::vector<std::string> method_ids(const ExperimentConfig& cfg);

/// Rewrites manifest.json from the files currently in the run directory.
void write_manifest(const ExperimentConfig& cfg, const std::vector<std::string>& stages);

}  // namespace qusapp
