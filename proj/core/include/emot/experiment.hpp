#pragma once

// Experiment commands and their on-disk formats.
//
// Every CSV starts with a "# schema=<name>/<version>" line followed by a
// header whose column names carry units (_s seconds, _J joules, _m metres).
// Reals are written with 17 significant digits so reruns compare bytewise.
// Each command finishes by writing manifest.json, which lists every file it
// produced.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "emot/baselines.hpp"
#include "emot/config.hpp"
#include "emot/evo.hpp"

namespace emot::experiment {

inline constexpr const char* kMetricsSchema = "emot.metrics/1";
inline constexpr const char* kTrainingSchema = "emot.training/1";
inline constexpr const char* kArchiveHistorySchema = "emot.archive_history/1";
inline constexpr const char* kArchiveSchema = "emot.archive/1";
inline constexpr const char* kSummarySchema = "emot.summary/1";
inline constexpr const char* kTrajectorySchema = "emot.trajectory/1";
inline constexpr const char* kDevicesSchema = "emot.devices/1";
inline constexpr const char* kFrontSchema = "emot.front/1";
inline constexpr const char* kParetoSummarySchema = "emot.pareto_summary/1";
inline constexpr const char* kManifestSchema = "emot.manifest/1";

std::string version();
std::string format_double(double v);

/// Runs the evolutionary training and writes config.json, metrics.csv,
/// training.csv, archive_history.csv, archive.json, checkpoints/ep_NNN.bin
/// and manifest.json into `out_dir`.
evo::RunResult cmd_train(const config::ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                         std::ostream* log = nullptr);

struct EvalRequest {
  std::optional<std::filesystem::path> checkpoint;  // learned policy
  std::optional<baselines::BaselineKind> baseline;  // or a baseline trajectory
  std::vector<std::uint64_t> seeds;                 // empty: the run's evaluation seeds
};

struct EvalRow {
  std::string policy;
  std::uint64_t seed = 0;
  double f1 = 0.0;
  double f2 = 0.0;
};

/// Writes summary.csv, trajectory_<seed>.csv per seed and manifest.json.
/// Throws std::runtime_error when the checkpoint does not fit the config.
std::vector<EvalRow> cmd_evaluate(const config::ExperimentConfig& cfg, const EvalRequest& req,
                                  const std::filesystem::path& out_dir);

/// Reads archive.json and config.json from a training run directory and
/// writes front.json and pareto_summary.json next to them, extending the
/// manifest. Throws std::runtime_error on an empty archive.
void cmd_pareto(const std::filesystem::path& run_dir);

}  // namespace emot::experiment
