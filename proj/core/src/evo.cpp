#include "emot/evo.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "emot/agent.hpp"
#include "emot/seeds.hpp"

namespace emot::evo {

std::string to_string(UpdateRule rule) { return rule == UpdateRule::PPO ? "ppo" : "tdl"; }

UpdateRule parse_update_rule(std::string_view name) {
  std::string lower(name);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "ppo") return UpdateRule::PPO;
  if (lower == "tdl") return UpdateRule::TDL;
  throw std::invalid_argument("unknown update rule '" + std::string(name) + "' (expected ppo or tdl)");
}

void EvoConfig::validate() const {
  if (n_tasks < 2) throw std::invalid_argument("EvoConfig: n_tasks must be >= 2");
  if (warmup_iters < 0) throw std::invalid_argument("EvoConfig: warmup_iters must be >= 0");
  if (generations < 0) throw std::invalid_argument("EvoConfig: generations must be >= 0");
  if (buffer_size < 1) throw std::invalid_argument("EvoConfig: buffer_size must be >= 1");
  if (kmeans_k < 1) throw std::invalid_argument("EvoConfig: kmeans_k must be >= 1");
  if (eval_episodes < 1) throw std::invalid_argument("EvoConfig: eval_episodes must be >= 1");
  if (workers < 1) throw std::invalid_argument("EvoConfig: workers must be >= 1");
  if (!reference.automatic && (!std::isfinite(reference.f1_ref) || !std::isfinite(reference.f2_ref))) {
    throw std::invalid_argument("EvoConfig: explicit reference point must be finite");
  }
}

void RunConfig::validate() const {
  env.validate();
  evo.validate();
  net.validate();
  ppo.validate();
  tdl.validate();
}

std::vector<WeightVector> init_weights(int n) {
  if (n < 2) throw std::invalid_argument("init_weights: need n >= 2");
  std::vector<WeightVector> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double a = static_cast<double>(i) / static_cast<double>(n - 1);
    out.emplace_back(std::vector<double>{a, 1.0 - a});
  }
  return out;
}

std::vector<std::size_t> task_update(std::span<const WeightVector> weights,
                                     std::span<const pareto::MaxPoint> population) {
  if (population.empty()) throw std::invalid_argument("task_update: empty population");
  std::vector<std::size_t> picks;
  picks.reserve(weights.size());
  for (const WeightVector& w : weights) {
    if (w.size() != 2) throw std::invalid_argument("task_update: expected 2-objective weights");
    std::size_t best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < population.size(); ++j) {
      const double v = w[0] * population[j].x + w[1] * population[j].y;
      if (v > best_v) {
        best_v = v;
        best = j;
      }
    }
    picks.push_back(best);
  }
  return picks;
}

std::vector<std::size_t> buffer_prune(std::span<const pareto::MaxPoint> population,
                                      std::span<const WeightVector> weights, const pareto::MaxPoint& z_ref,
                                      std::size_t buffer_size) {
  if (weights.empty()) throw std::invalid_argument("buffer_prune: no weights");
  if (buffer_size < 1) throw std::invalid_argument("buffer_prune: buffer_size must be >= 1");
  std::vector<std::vector<std::size_t>> buffers(weights.size());
  std::vector<double> dist(population.size());
  for (std::size_t j = 0; j < population.size(); ++j) {
    const double vx = population[j].x - z_ref.x;
    const double vy = population[j].y - z_ref.y;
    dist[j] = std::hypot(vx, vy);
    std::size_t best = 0;
    if (dist[j] > 0.0) {
      double best_cos = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < weights.size(); ++i) {
        const double wn = std::hypot(weights[i][0], weights[i][1]);
        const double c = (weights[i][0] * vx + weights[i][1] * vy) / (wn * dist[j]);
        if (c > best_cos) {
          best_cos = c;
          best = i;
        }
      }
    }
    buffers[best].push_back(j);
  }
  std::vector<std::size_t> kept;
  for (std::vector<std::size_t>& b : buffers) {
    std::stable_sort(b.begin(), b.end(), [&](std::size_t a, std::size_t c) { return dist[a] > dist[c]; });
    if (b.size() > buffer_size) b.resize(buffer_size);
    kept.insert(kept.end(), b.begin(), b.end());
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<std::uint64_t> evaluation_seeds(std::uint64_t master, int count) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < count; ++i) seeds.push_back(derive_seed(master, "eval", {static_cast<std::uint64_t>(i)}));
  return seeds;
}

std::vector<IterationRecord> train_task(mopg::TaskTuple& task, const RunConfig& cfg, int iterations,
                                        std::uint64_t seed, int generation, int task_index) {
  const int horizon = cfg.env.horizon;
  const int n_episodes = std::max(1, (cfg.ppo.steps_per_iter + horizon - 1) / horizon);
  const std::span<const double> gammas(cfg.env.reward.discounts);
  std::vector<IterationRecord> log;
  log.reserve(static_cast<std::size_t>(iterations));
  for (int it = 0; it < iterations; ++it) {
    const auto iu = static_cast<std::uint64_t>(it);
    const agent::CollectedBatch c =
        agent::collect_batch(task.policy, cfg.env, task.weight.values(), n_episodes, derive_seed(seed, "collect", {iu}));
    IterationRecord rec;
    rec.generation = generation;
    rec.task = task_index;
    rec.iteration = it;
    for (const agent::EpisodeSummary& e : c.episodes) {
      rec.mean_f1 += e.objectives.f1;
      rec.mean_f2 += e.objectives.f2;
      rec.weighted_return += e.weighted_return;
    }
    const double ne = static_cast<double>(c.episodes.size());
    rec.mean_f1 /= ne;
    rec.mean_f2 /= ne;
    rec.weighted_return /= ne;
    const std::uint64_t update_seed = derive_seed(seed, "update", {iu});
    rec.diag = cfg.rule == UpdateRule::PPO ? mopg::mopg_ppo_update(task, c.batch, gammas, cfg.ppo, update_seed)
                                           : mopg::tdl_update(task, c.batch, gammas, cfg.tdl, cfg.ppo, update_seed);
    double s = 0.0;
    for (const double g : task.policy.global_std()) s += g;
    rec.global_std_mean = s / static_cast<double>(task.policy.global_std().size());
    log.push_back(rec);
  }
  return log;
}

double archive_hypervolume(std::span<const pareto::MaxPoint> points, const pareto::MaxPoint& ref) {
  std::vector<pareto::MaxPoint> inside;
  for (const pareto::MaxPoint& p : points) {
    if (p.x >= ref.x && p.y >= ref.y) inside.push_back(p);
  }
  return pareto::hypervolume(inside, ref);
}

namespace {

// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index writes
// only its own outputs, so results do not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Trained {
  std::vector<IterationRecord> log;
};

void train_and_evaluate(std::vector<Member>& offspring, const RunConfig& cfg, int iterations, std::uint64_t seed,
                        int generation, std::span<const std::uint64_t> eval_seeds,
                        std::vector<IterationRecord>& log_out) {
  std::vector<Trained> logs(offspring.size());
  parallel_for(offspring.size(), cfg.evo.workers, [&](std::size_t i) {
    Member& m = offspring[i];
    const std::uint64_t s =
        derive_seed(seed, "train", {static_cast<std::uint64_t>(generation), static_cast<std::uint64_t>(i)});
    logs[i].log = train_task(m.task, cfg, iterations, s, generation, static_cast<int>(i));
    m.objectives = agent::evaluate_policy(m.task.policy, cfg.env, eval_seeds);
    m.generation = generation;
    m.task_index = static_cast<int>(i);
  });
  for (Trained& t : logs) log_out.insert(log_out.end(), t.log.begin(), t.log.end());
}

std::vector<pareto::MaxPoint> scaled_points(const std::vector<Member>& members, const momdp::RewardConfig& reward) {
  std::vector<pareto::MaxPoint> out;
  out.reserve(members.size());
  for (const Member& m : members) out.push_back(agent::scaled_max(m.objectives, reward));
  return out;
}

void archive_offspring(Archive& archive, const std::vector<Member>& offspring, const EvoConfig& evo) {
  for (const Member& m : offspring) {
    archive.insert(pareto::to_max(m.objectives),
                   ArchiveItem{m.task.policy, m.task.critic, m.task.weight, m.generation, m.task_index});
  }
  constexpr std::size_t kCrowdingTrigger = 200;
  constexpr std::size_t kCrowdingKeep = 50;
  if (evo.archive_crowding_prune && archive.size() > kCrowdingTrigger) {
    const std::vector<std::size_t> keep = pareto::crowding_select(archive.points(), kCrowdingKeep);
    std::vector<Archive::Entry> kept;
    for (const std::size_t i : keep) kept.push_back(std::move(archive.entries()[i]));
    archive.entries() = std::move(kept);
  }
}

GenerationRecord make_record(int generation, const std::vector<Member>& offspring,
                             const std::vector<std::size_t>& parents, const std::vector<Member>& population,
                             const Archive& archive, const pareto::MaxPoint& hv_ref, const momdp::RewardConfig& reward) {
  GenerationRecord rec;
  rec.generation = generation;
  for (std::size_t i = 0; i < offspring.size(); ++i) {
    TaskRecord t;
    t.task = static_cast<int>(i);
    t.weight = offspring[i].task.weight;
    t.parent = parents.empty() ? i : parents[i];
    t.objectives = offspring[i].objectives;
    const pareto::MaxPoint s = agent::scaled_max(t.objectives, reward);
    t.weighted_return = t.weight[0] * s.x + t.weight[1] * s.y;
    rec.tasks.push_back(t);
  }
  const std::vector<pareto::MaxPoint> pts = archive.points();
  for (const pareto::MaxPoint& p : pts) rec.archive_points.push_back(pareto::to_objective(p));
  rec.hypervolume = archive_hypervolume(pts, hv_ref);
  rec.sparsity = pareto::sparsity(pts);
  rec.population_size = population.size();
  return rec;
}

}  // namespace

RunResult run(const RunConfig& cfg, std::uint64_t seed, const ProgressFn& progress) {
  cfg.validate();
  const std::vector<WeightVector> weights = init_weights(cfg.evo.n_tasks);
  const std::size_t state_dim = momdp::Environment(cfg.env).observation_dim();
  const std::vector<std::uint64_t> eval_seeds = evaluation_seeds(seed, cfg.evo.eval_episodes);
  const momdp::RewardConfig& reward = cfg.env.reward;
  const pareto::ObjectivePoint explicit_ref{cfg.evo.reference.f1_ref, cfg.evo.reference.f2_ref};

  RunResult res;
  std::vector<Member> offspring(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    offspring[i].task = mopg::make_task(weights[i], state_dim, agent::kActionDim, cfg.net, cfg.ppo, cfg.tdl,
                                        derive_seed(seed, "init", {static_cast<std::uint64_t>(i)}));
  }
  train_and_evaluate(offspring, cfg, cfg.evo.warmup_iters, seed, 0, eval_seeds, res.iterations);
  archive_offspring(res.archive, offspring, cfg.evo);
  res.hv_reference =
      cfg.evo.reference.automatic ? pareto::auto_reference(res.archive.points()) : pareto::to_max(explicit_ref);

  std::vector<Member> population = offspring;
  res.generations.push_back(make_record(0, offspring, {}, population, res.archive, res.hv_reference, reward));
  if (progress) progress(res.generations.back());

  for (int g = 1; g <= cfg.evo.generations; ++g) {
    const std::vector<std::size_t> parents = task_update(weights, scaled_points(population, reward));
    for (std::size_t i = 0; i < weights.size(); ++i) {
      offspring[i].task = population[parents[i]].task;
      offspring[i].task.weight = weights[i];
      mopg::set_learning_rates(offspring[i].task, cfg.ppo);
    }
    train_and_evaluate(offspring, cfg, cfg.evo.warmup_iters, seed, g, eval_seeds, res.iterations);

    std::vector<Member> combined = population;
    combined.insert(combined.end(), offspring.begin(), offspring.end());
    const std::vector<pareto::MaxPoint> pts = scaled_points(combined, reward);
    const pareto::MaxPoint z_ref =
        cfg.evo.reference.automatic ? pareto::auto_reference(pts) : agent::scaled_max(explicit_ref, reward);
    const std::vector<std::size_t> keep =
        buffer_prune(pts, weights, z_ref, static_cast<std::size_t>(cfg.evo.buffer_size));
    population.clear();
    for (const std::size_t j : keep) population.push_back(combined[j]);

    archive_offspring(res.archive, offspring, cfg.evo);
    res.generations.push_back(make_record(g, offspring, parents, population, res.archive, res.hv_reference, reward));
    if (progress) progress(res.generations.back());
  }

  std::vector<pareto::ObjectivePoint> front;
  for (const Archive::Entry& e : res.archive.entries()) front.push_back(pareto::to_objective(e.point));
  res.front = pareto::pareto_analysis(front, static_cast<std::size_t>(cfg.evo.kmeans_k));
  return res;
}

}  // namespace emot::evo
