#include "emot/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "emot/agent.hpp"
#include "emot/checkpoint.hpp"

#ifndef EMOT_VERSION
#define EMOT_VERSION "0.0.0"
#endif

namespace emot::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

std::string version() { return EMOT_VERSION; }

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Tracks every file a command writes so the manifest can list them.
class OutputDir {
 public:
  explicit OutputDir(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

  std::ofstream open(const std::string& rel) {
    const fs::path p = root_ / rel;
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    files_.push_back(rel);
    return out;
  }

  void record(const std::string& rel) { files_.push_back(rel); }
  [[nodiscard]] const fs::path& root() const { return root_; }
  [[nodiscard]] const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path root_;
  std::vector<std::string> files_;
};

json file_inventory(const fs::path& root, const std::vector<std::string>& files) {
  json list = json::array();
  for (const std::string& f : files) {
    list.push_back({{"path", f}, {"bytes", static_cast<std::uint64_t>(fs::file_size(root / f))}});
  }
  return list;
}

void write_manifest(OutputDir& dir, const std::string& command, const config::ExperimentConfig& cfg,
                    const std::string& started) {
  json m{
      {"schema", kManifestSchema},
      {"command", command},
      {"code_version", version()},
      {"config_hash", hex64(config::config_hash(cfg))},
      {"seed", cfg.seed},
      {"started_utc", started},
      {"finished_utc", utc_now()},
      {"files", file_inventory(dir.root(), dir.files())},
  };
  std::ofstream out(dir.root() / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest");
  out << m.dump(2) << '\n';
}

void write_json(OutputDir& dir, const std::string& rel, const json& j) {
  std::ofstream out = dir.open(rel);
  out << j.dump(2) << '\n';
}

std::string checkpoint_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "checkpoints/ep_%03zu.bin", i);
  return buf;
}

void write_metrics(OutputDir& dir, const evo::RunResult& res) {
  std::ofstream out = dir.open("metrics.csv");
  out << "# schema=" << kMetricsSchema << '\n';
  out << "generation,task,w_delay,w_energy,f1_s,f2_J,weighted_return,archive_size,hypervolume_sJ,sparsity\n";
  for (const evo::GenerationRecord& g : res.generations) {
    const std::string sparsity = g.sparsity ? format_double(*g.sparsity) : "";
    for (const evo::TaskRecord& t : g.tasks) {
      out << g.generation << ',' << t.task << ',' << format_double(t.weight[0]) << ',' << format_double(t.weight[1])
          << ',' << format_double(t.objectives.f1) << ',' << format_double(t.objectives.f2) << ','
          << format_double(t.weighted_return) << ',' << g.archive_points.size() << ','
          << format_double(g.hypervolume) << ',' << sparsity << '\n';
    }
  }
}

void write_training(OutputDir& dir, const evo::RunResult& res) {
  std::ofstream out = dir.open("training.csv");
  out << "# schema=" << kTrainingSchema << '\n';
  out << "generation,task,iteration,mean_f1_s,mean_f2_J,weighted_return,surrogate_before,surrogate_after,mean_kl,"
         "policy_loss,critic_loss,target_kl_mean_max,target_kl_full_max,indicator_fraction,global_std_mean,"
         "minibatch_steps\n";
  for (const evo::IterationRecord& r : res.iterations) {
    out << r.generation << ',' << r.task << ',' << r.iteration << ',' << format_double(r.mean_f1) << ','
        << format_double(r.mean_f2) << ',' << format_double(r.weighted_return) << ','
        << format_double(r.diag.surrogate_before) << ',' << format_double(r.diag.surrogate_after) << ','
        << format_double(r.diag.mean_kl) << ',' << format_double(r.diag.policy_loss) << ','
        << format_double(r.diag.critic_loss) << ',' << format_double(r.diag.target_kl_mean_max) << ','
        << format_double(r.diag.target_kl_full_max) << ',' << format_double(r.diag.indicator_fraction) << ','
        << format_double(r.global_std_mean) << ',' << r.diag.minibatch_steps << '\n';
  }
}

void write_archive_history(OutputDir& dir, const evo::RunResult& res) {
  std::ofstream out = dir.open("archive_history.csv");
  out << "# schema=" << kArchiveHistorySchema << '\n';
  out << "generation,f1_s,f2_J\n";
  for (const evo::GenerationRecord& g : res.generations) {
    for (const pareto::ObjectivePoint& p : g.archive_points) {
      out << g.generation << ',' << format_double(p.f1) << ',' << format_double(p.f2) << '\n';
    }
  }
}

void write_archive(OutputDir& dir, const evo::RunResult& res) {
  json points = json::array();
  const auto& entries = res.archive.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string rel = checkpoint_name(i);
    const fs::path p = dir.root() / rel;
    fs::create_directories(p.parent_path());
    nn::save_checkpoint(p, entries[i].payload.policy, entries[i].payload.critic);
    dir.record(rel);
    const pareto::ObjectivePoint o = pareto::to_objective(entries[i].point);
    points.push_back({{"f1_s", o.f1},
                      {"f2_J", o.f2},
                      {"weight", {entries[i].payload.weight[0], entries[i].payload.weight[1]}},
                      {"generation", entries[i].payload.generation},
                      {"task", entries[i].payload.task_index},
                      {"checkpoint", rel}});
  }
  const pareto::ObjectivePoint ref = pareto::to_objective(res.hv_reference);
  write_json(dir, "archive.json",
             {{"schema", kArchiveSchema}, {"hv_reference", {{"f1_s", ref.f1}, {"f2_J", ref.f2}}}, {"points", points}});
}

void write_trajectory(OutputDir& dir, std::uint64_t seed, const momdp::EpisodeLedger& ledger) {
  std::ofstream out = dir.open("trajectory_" + std::to_string(seed) + ".csv");
  out << "# schema=" << kTrajectorySchema << '\n';
  out << "clock,x_m,y_m,accepted_task_ids,upload_delay_s,wait_delay_s,queue_delay_s,slot_energy_J,flight_energy_J,"
         "penalized\n";
  out << 0 << ',' << format_double(ledger.initial_pose.x) << ',' << format_double(ledger.initial_pose.y)
      << ",,0,0,0,0,0,0\n";
  for (const momdp::SlotRecord& s : ledger.slots) {
    std::string ids;
    for (std::size_t i = 0; i < s.accepted_tasks.size(); ++i) {
      if (i) ids += ';';
      ids += std::to_string(s.accepted_tasks[i]);
    }
    out << s.clock + 1 << ',' << format_double(s.pose.x) << ',' << format_double(s.pose.y) << ',' << ids << ','
        << format_double(s.upload_delay) << ',' << format_double(s.wait_delay) << ','
        << format_double(s.queue_delay) << ',' << format_double(s.slot_energy()) << ','
        << format_double(s.flight_energy) << ',' << (s.penalized ? 1 : 0) << '\n';
  }
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read '" + p.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed JSON in '" + p.string() + "': " + e.what());
  }
}

}  // namespace

evo::RunResult cmd_train(const config::ExperimentConfig& cfg, const fs::path& out_dir, std::ostream* log) {
  cfg.validate();
  const std::string started = utc_now();
  OutputDir dir(out_dir);
  write_json(dir, "config.json", config::to_json(cfg));

  const int total = cfg.run.evo.generations;
  evo::RunResult res = evo::run(cfg.run, cfg.seed, [&](const evo::GenerationRecord& g) {
    if (!log) return;
    double mean_w = 0.0;
    for (const evo::TaskRecord& t : g.tasks) mean_w += t.weighted_return;
    mean_w /= static_cast<double>(g.tasks.size());
    *log << "generation " << g.generation << '/' << total << "  archive=" << g.archive_points.size()
         << "  hv=" << g.hypervolume << "  mean_weighted_return=" << mean_w << std::endl;
  });

  write_metrics(dir, res);
  write_training(dir, res);
  write_archive_history(dir, res);
  write_archive(dir, res);
  write_manifest(dir, "train", cfg, started);
  return res;
}

std::vector<EvalRow> cmd_evaluate(const config::ExperimentConfig& cfg, const EvalRequest& req, const fs::path& out_dir) {
  cfg.validate();
  if (req.checkpoint.has_value() == req.baseline.has_value()) {
    throw std::invalid_argument("evaluate: give exactly one of a checkpoint or a baseline kind");
  }
  const std::string started = utc_now();
  const momdp::EnvConfig& env = cfg.run.env;
  std::vector<std::uint64_t> seeds = req.seeds;
  if (seeds.empty()) seeds = evo::evaluation_seeds(cfg.seed, cfg.run.evo.eval_episodes);

  std::optional<nn::Checkpoint> ckpt;
  std::string label;
  baselines::BaselineConfig base = cfg.baseline;
  if (req.checkpoint) {
    ckpt = nn::load_checkpoint(*req.checkpoint);
    const std::size_t obs = momdp::Environment(env).observation_dim();
    if (ckpt->policy.state_dim() != obs || ckpt->policy.action_dim() != agent::kActionDim) {
      throw std::runtime_error("checkpoint network expects state dim " + std::to_string(ckpt->policy.state_dim()) +
                               " and action dim " + std::to_string(ckpt->policy.action_dim()) +
                               ", config needs " + std::to_string(obs) + " and " +
                               std::to_string(agent::kActionDim));
    }
    label = req.checkpoint->filename().string();
  } else {
    base.kind = *req.baseline;
    label = baselines::to_string(base.kind);
  }

  OutputDir dir(out_dir);
  std::vector<EvalRow> rows;
  for (const std::uint64_t s : seeds) {
    const momdp::RolloutResult r =
        ckpt ? agent::deterministic_rollout(ckpt->policy, env, s) : baselines::baseline_rollout(base, env, s);
    const momdp::Objectives o = momdp::episode_objectives(r.ledger);
    rows.push_back({label, s, o.f1, o.f2});
    write_trajectory(dir, s, r.ledger);
  }
  {
    std::ofstream out = dir.open("summary.csv");
    out << "# schema=" << kSummarySchema << '\n';
    out << "policy,seed,f1_s,f2_J\n";
    for (const EvalRow& r : rows) {
      out << r.policy << ',' << r.seed << ',' << format_double(r.f1) << ',' << format_double(r.f2) << '\n';
    }
  }
  {
    // The layout depends only on the config, so it is shared by every seed.
    const momdp::Environment layout(env);
    std::ofstream out = dir.open("devices.csv");
    out << "# schema=" << kDevicesSchema << '\n';
    out << "gd,x_m,y_m,coverage_radius_m\n";
    for (const env::GroundDevice& d : layout.devices()) {
      out << d.id << ',' << format_double(d.position.x) << ',' << format_double(d.position.y) << ','
          << format_double(env.limits.coverage_radius()) << '\n';
    }
  }
  write_manifest(dir, ckpt ? "evaluate" : "baseline", cfg, started);
  return rows;
}

void cmd_pareto(const fs::path& run_dir) {
  const std::string started = utc_now();
  const config::ExperimentConfig cfg = config::from_json(read_json(run_dir / "config.json"));
  const json archive = read_json(run_dir / "archive.json");
  if (archive.value("schema", "") != kArchiveSchema) throw std::runtime_error("archive.json: unexpected schema");
  const json& pts = archive.at("points");
  if (!pts.is_array() || pts.empty()) throw std::runtime_error("archive.json: the archive is empty");

  std::vector<pareto::ObjectivePoint> points;
  std::vector<pareto::MaxPoint> maxed;
  for (const json& p : pts) {
    points.push_back({p.at("f1_s").get<double>(), p.at("f2_J").get<double>()});
    maxed.push_back(pareto::to_max(points.back()));
  }
  const pareto::MaxPoint ref = pareto::to_max(
      {archive.at("hv_reference").at("f1_s").get<double>(), archive.at("hv_reference").at("f2_J").get<double>()});

  const pareto::ClusteredFront front = pareto::pareto_analysis(points, static_cast<std::size_t>(cfg.run.evo.kmeans_k));
  json clusters = json::array();
  for (const pareto::Cluster& c : front.clusters) {
    json members = json::array();
    json polyline = json::array();
    for (const std::size_t i : c.members) {
      members.push_back({{"archive_index", i}, {"checkpoint", pts[i].at("checkpoint")}});
    }
    for (const pareto::ObjectivePoint& v : c.polyline) polyline.push_back({{"f1_s", v.f1}, {"f2_J", v.f2}});
    clusters.push_back({{"members", members}, {"polyline", polyline}});
  }

  // Extend the run's manifest with the new files.
  const fs::path manifest_path = run_dir / "manifest.json";
  json manifest = fs::exists(manifest_path) ? read_json(manifest_path) : json{{"schema", kManifestSchema}};
  OutputDir dir(run_dir);
  write_json(dir, "front.json", {{"schema", kFrontSchema}, {"k", cfg.run.evo.kmeans_k}, {"clusters", clusters}});
  const std::optional<double> sp = pareto::sparsity(maxed);
  write_json(dir, "pareto_summary.json",
             {{"schema", kParetoSummarySchema},
              {"n_points", points.size()},
              {"n_clusters", front.clusters.size()},
              {"hypervolume_sJ", evo::archive_hypervolume(maxed, ref)},
              {"hv_reference", {{"f1_s", -ref.x}, {"f2_J", -ref.y}}},
              {"sparsity", sp ? json(*sp) : json(nullptr)}});

  json files = json::array();
  for (const json& f : manifest.value("files", json::array())) {
    const std::string p = f.value("path", "");
    if (p != "front.json" && p != "pareto_summary.json") files.push_back(f);
  }
  for (const json& f : file_inventory(run_dir, dir.files())) files.push_back(f);
  manifest["files"] = files;
  manifest["pareto_started_utc"] = started;
  manifest["pareto_finished_utc"] = utc_now();
  std::ofstream out(manifest_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest");
  out << manifest.dump(2) << '\n';
}

}  // namespace emot::experiment
