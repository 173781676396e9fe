#pragma once

// Evolutionary multi-objective training: warm-up of one task per preference
// weight, then generations of task selection, policy-gradient training,
// performance-buffer pruning and external Pareto archive maintenance.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emot/checkpoint.hpp"
#include "emot/momdp.hpp"
#include "emot/mopg.hpp"
#include "emot/pareto.hpp"
#include "emot/weights.hpp"

namespace emot::evo {

enum class UpdateRule { PPO, TDL };

std::string to_string(UpdateRule rule);
/// Accepts "ppo" and "tdl" (any case); throws std::invalid_argument otherwise.
UpdateRule parse_update_rule(std::string_view name);

struct ReferencePoint {
  bool automatic = true;
  double f1_ref = 0.0;  // seconds, used when not automatic
  double f2_ref = 0.0;  // joules
};

struct EvoConfig {
  int n_tasks = 10;
  int warmup_iters = 60;
  int generations = 500;
  int buffer_size = 2;
  ReferencePoint reference;
  int kmeans_k = 3;
  int eval_episodes = 3;
  bool archive_crowding_prune = false;  // above 200 entries keep the 50 least crowded
  int workers = 1;

  void validate() const;
};

struct RunConfig {
  momdp::EnvConfig env;
  EvoConfig evo;
  UpdateRule rule = UpdateRule::TDL;
  mopg::NetworkConfig net;
  mopg::PpoConfig ppo;
  mopg::TdlConfig tdl;

  void validate() const;
};

/// w_i = (i/(n-1), 1 - i/(n-1)). Throws std::invalid_argument for n < 2.
std::vector<WeightVector> init_weights(int n);

/// For every weight, the index of the population member maximizing w . F
/// (lowest index on ties). Throws std::invalid_argument on an empty population.
std::vector<std::size_t> task_update(std::span<const WeightVector> weights, std::span<const pareto::MaxPoint> population);

/// Indices (ascending) kept after assigning each member to the weight of
/// highest cosine similarity with (F - z_ref) and keeping, per weight, the
/// `buffer_size` members farthest from z_ref. A member at z_ref goes to
/// weight 0.
std::vector<std::size_t> buffer_prune(std::span<const pareto::MaxPoint> population,
                                      std::span<const WeightVector> weights, const pareto::MaxPoint& z_ref,
                                      std::size_t buffer_size);

struct Member {
  mopg::TaskTuple task;
  pareto::ObjectivePoint objectives;  // SI, mean over evaluation seeds
  int generation = 0;
  int task_index = 0;
};

struct ArchiveItem {
  nn::GaussianPolicy policy;
  nn::VectorCritic critic;
  WeightVector weight;
  int generation = 0;
  int task_index = 0;
};

using Archive = pareto::ParetoArchive<ArchiveItem>;

struct IterationRecord {
  int generation = 0;  // 0 is the warm-up stage
  int task = 0;
  int iteration = 0;
  double mean_f1 = 0.0;  // sampled training episodes, SI
  double mean_f2 = 0.0;
  double weighted_return = 0.0;
  mopg::UpdateDiagnostics diag;
  double global_std_mean = 0.0;
};

struct TaskRecord {
  int task = 0;
  WeightVector weight;
  std::size_t parent = 0;  // population index selected by task_update (generation >= 1)
  pareto::ObjectivePoint objectives;
  double weighted_return = 0.0;  // w . scaled maximization objectives of the evaluated policy
};

struct GenerationRecord {
  int generation = 0;
  std::vector<TaskRecord> tasks;
  std::vector<pareto::ObjectivePoint> archive_points;
  double hypervolume = 0.0;  // SI maximization coordinates, pinned reference
  std::optional<double> sparsity;
  std::size_t population_size = 0;
};

struct RunResult {
  Archive archive;
  std::vector<GenerationRecord> generations;
  std::vector<IterationRecord> iterations;
  pareto::MaxPoint hv_reference;  // SI maximization coordinates
  pareto::ClusteredFront front;
};

using ProgressFn = std::function<void(const GenerationRecord&)>;

/// Fixed evaluation seeds shared by every policy of a run.
std::vector<std::uint64_t> evaluation_seeds(std::uint64_t master, int count);

/// Trains one task for `iterations` policy-gradient iterations.
std::vector<IterationRecord> train_task(mopg::TaskTuple& task, const RunConfig& cfg, int iterations,
                                        std::uint64_t seed, int generation, int task_index);

/// Deterministic for a given seed regardless of the worker count.
RunResult run(const RunConfig& cfg, std::uint64_t seed, const ProgressFn& progress = {});

/// Hypervolume of the archive points that dominate `ref`.
double archive_hypervolume(std::span<const pareto::MaxPoint> points, const pareto::MaxPoint& ref);

}  // namespace emot::evo
