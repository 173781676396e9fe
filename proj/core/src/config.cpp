#include "emot/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "emot/seeds.hpp"

namespace emot::config {

using nlohmann::json;

namespace {

// Reads one JSON object, tracking consumed keys so leftovers can be reported.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "must be an object");
  }

  const json& raw(const std::string& key) {
    const auto it = j_.find(key);
    if (it == j_.end()) throw ConfigError("missing required field '" + full(key) + "'");
    used_.insert(key);
    return *it;
  }

  double num(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) fail(full(key), "must be a number");
    return v.get<double>();
  }

  int integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(full(key), "must be an integer");
    const auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) fail(full(key), "out of range");
    return static_cast<int>(x);
  }

  std::uint64_t u64(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(full(key), "must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_boolean()) fail(full(key), "must be true or false");
    return v.get<bool>();
  }

  std::string str(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) fail(full(key), "must be a string");
    return v.get<std::string>();
  }

  std::array<double, 2> pair(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      fail(full(key), "must be an array of two numbers");
    }
    return {v[0].get<double>(), v[1].get<double>()};
  }

  std::vector<std::size_t> widths(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) fail(full(key), "must be an array of positive integers");
    std::vector<std::size_t> out;
    for (const json& w : v) {
      if (!w.is_number_integer() || w.get<std::int64_t>() < 1) fail(full(key), "must be an array of positive integers");
      out.push_back(w.get<std::size_t>());
    }
    return out;
  }

  Node child(const std::string& key) { return Node(raw(key), full(key)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.contains(it.key())) throw ConfigError("unknown field '" + full(it.key()) + "'");
    }
  }

  template <class Fn>
  auto guarded(const std::string& key, Fn&& fn) {
    const std::string value = str(key);
    try {
      return fn(value);
    } catch (const std::invalid_argument& e) {
      fail(full(key), e.what());
    }
  }

 private:
  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError("field '" + path + "' " + what);
  }
  [[nodiscard]] std::string full(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

momdp::RewardMode parse_reward_mode(const std::string& s) {
  if (s == "objective") return momdp::RewardMode::Objective;
  if (s == "slot") return momdp::RewardMode::Slot;
  throw std::invalid_argument("must be \"objective\" or \"slot\"");
}

std::string reward_mode_name(momdp::RewardMode m) { return m == momdp::RewardMode::Slot ? "slot" : "objective"; }

momdp::EnvConfig read_env(Node n) {
  momdp::EnvConfig e;
  e.n_gds = n.integer("n_gds");
  e.horizon = n.integer("horizon");
  e.gd_transmit_power_w = n.num("gd_transmit_power_w");
  e.layout_seed = n.u64("layout_seed");
  e.scheduler_kind = n.guarded("scheduler", [](const std::string& s) { return sched::parse_scheduler_kind(s); });

  Node lim = n.child("limits");
  e.limits.altitude_m = lim.num("altitude_m");
  e.limits.v_max = lim.num("v_max");
  e.limits.theta_max = lim.num("theta_max_rad");
  e.limits.slot_seconds = lim.num("slot_seconds");
  e.limits.x_max = lim.num("x_max");
  e.limits.y_max = lim.num("y_max");
  lim.finish();

  Node ch = n.child("channel");
  e.channel.a_env = ch.num("a_env");
  e.channel.b_env = ch.num("b_env");
  e.channel.carrier_hz = ch.num("carrier_hz");
  e.channel.light_speed = ch.num("light_speed");
  e.channel.loss_los_db = ch.num("loss_los_db");
  e.channel.loss_nlos_db = ch.num("loss_nlos_db");
  e.channel.bandwidth_hz = ch.num("bandwidth_hz");
  e.channel.noise_power_w = ch.num("noise_power_w");
  ch.finish();

  Node pp = n.child("propulsion");
  e.propulsion.p1_w = pp.num("p1_w");
  e.propulsion.p2_w = pp.num("p2_w");
  e.propulsion.v_tip = pp.num("v_tip");
  e.propulsion.v_induced = pp.num("v_induced");
  e.propulsion.d0 = pp.num("d0");
  e.propulsion.rho = pp.num("rho");
  e.propulsion.solidity = pp.num("solidity");
  e.propulsion.disc_area = pp.num("disc_area");
  pp.finish();

  Node cp = n.child("compute");
  e.compute.kappa = cp.num("kappa");
  e.compute.cpu_hz = cp.num("cpu_hz");
  e.compute.rx_power_w = cp.num("rx_power_w");
  cp.finish();

  Node tg = n.child("task_gen");
  e.task_gen.period_slots = tg.integer("period_slots");
  e.task_gen.min_bits = tg.num("min_bits");
  e.task_gen.max_bits = tg.num("max_bits");
  e.task_gen.min_cycles_per_bit = tg.num("min_cycles_per_bit");
  e.task_gen.max_cycles_per_bit = tg.num("max_cycles_per_bit");
  tg.finish();

  Node rw = n.child("reward");
  e.reward.penalty_w = rw.num("penalty_w");
  e.reward.discounts = rw.pair("discounts");
  e.reward.mode = rw.guarded("mode", parse_reward_mode);
  e.reward.learning_scales = rw.pair("learning_scales");
  rw.finish();

  Node sa = n.child("sa");
  e.sa.t_init = sa.num("t_init");
  e.sa.t_min = sa.num("t_min");
  e.sa.cooling = sa.num("cooling");
  e.sa.max_iters = sa.integer("max_iters");
  e.sa.inner_moves = sa.integer("inner_moves");
  sa.finish();

  n.finish();
  return e;
}

json write_env(const momdp::EnvConfig& e) {
  return json{
      {"n_gds", e.n_gds},
      {"horizon", e.horizon},
      {"gd_transmit_power_w", e.gd_transmit_power_w},
      {"layout_seed", e.layout_seed},
      {"scheduler", std::string(sched::to_string(e.scheduler_kind))},
      {"limits",
       {{"altitude_m", e.limits.altitude_m},
        {"v_max", e.limits.v_max},
        {"theta_max_rad", e.limits.theta_max},
        {"slot_seconds", e.limits.slot_seconds},
        {"x_max", e.limits.x_max},
        {"y_max", e.limits.y_max}}},
      {"channel",
       {{"a_env", e.channel.a_env},
        {"b_env", e.channel.b_env},
        {"carrier_hz", e.channel.carrier_hz},
        {"light_speed", e.channel.light_speed},
        {"loss_los_db", e.channel.loss_los_db},
        {"loss_nlos_db", e.channel.loss_nlos_db},
        {"bandwidth_hz", e.channel.bandwidth_hz},
        {"noise_power_w", e.channel.noise_power_w}}},
      {"propulsion",
       {{"p1_w", e.propulsion.p1_w},
        {"p2_w", e.propulsion.p2_w},
        {"v_tip", e.propulsion.v_tip},
        {"v_induced", e.propulsion.v_induced},
        {"d0", e.propulsion.d0},
        {"rho", e.propulsion.rho},
        {"solidity", e.propulsion.solidity},
        {"disc_area", e.propulsion.disc_area}}},
      {"compute", {{"kappa", e.compute.kappa}, {"cpu_hz", e.compute.cpu_hz}, {"rx_power_w", e.compute.rx_power_w}}},
      {"task_gen",
       {{"period_slots", e.task_gen.period_slots},
        {"min_bits", e.task_gen.min_bits},
        {"max_bits", e.task_gen.max_bits},
        {"min_cycles_per_bit", e.task_gen.min_cycles_per_bit},
        {"max_cycles_per_bit", e.task_gen.max_cycles_per_bit}}},
      {"reward",
       {{"penalty_w", e.reward.penalty_w},
        {"discounts", e.reward.discounts},
        {"mode", reward_mode_name(e.reward.mode)},
        {"learning_scales", e.reward.learning_scales}}},
      {"sa",
       {{"t_init", e.sa.t_init},
        {"t_min", e.sa.t_min},
        {"cooling", e.sa.cooling},
        {"max_iters", e.sa.max_iters},
        {"inner_moves", e.sa.inner_moves}}},
  };
}

}  // namespace

void ExperimentConfig::validate() const {
  run.validate();
  baseline.validate();
  if (output_dir.empty()) throw std::invalid_argument("ExperimentConfig: output_dir must not be empty");
}

ExperimentConfig from_json(const json& j) {
  ExperimentConfig cfg;
  Node root(j, "");
  cfg.seed = root.u64("seed");
  cfg.output_dir = root.str("output_dir");
  cfg.run.rule = root.guarded("update_rule", [](const std::string& s) { return evo::parse_update_rule(s); });
  cfg.run.env = read_env(root.child("env"));

  Node net = root.child("network");
  cfg.run.net.hidden = net.widths("hidden");
  cfg.run.net.init_global_std = net.num("init_global_std");
  net.finish();

  Node ppo = root.child("ppo");
  cfg.run.ppo.clip_eps = ppo.num("clip_eps");
  cfg.run.ppo.epochs = ppo.integer("epochs");
  cfg.run.ppo.minibatch = ppo.integer("minibatch");
  cfg.run.ppo.steps_per_iter = ppo.integer("steps_per_iter");
  cfg.run.ppo.entropy_coef = ppo.num("entropy_coef");
  cfg.run.ppo.learning_rate = ppo.num("learning_rate");
  cfg.run.ppo.critic_learning_rate = ppo.num("critic_learning_rate");
  cfg.run.ppo.gae_lambda = ppo.num("gae_lambda");
  cfg.run.ppo.normalize_advantage = ppo.boolean("normalize_advantage");
  ppo.finish();

  Node tdl = root.child("tdl");
  cfg.run.tdl.kl_budget = tdl.num("kl_budget");
  cfg.run.tdl.phi = tdl.num("phi");
  cfg.run.tdl.improve_old_prob = tdl.num("improve_old_prob");
  tdl.finish();

  Node evo = root.child("evo");
  cfg.run.evo.n_tasks = evo.integer("n_tasks");
  cfg.run.evo.warmup_iters = evo.integer("warmup_iters");
  cfg.run.evo.generations = evo.integer("generations");
  cfg.run.evo.buffer_size = evo.integer("buffer_size");
  cfg.run.evo.kmeans_k = evo.integer("kmeans_k");
  cfg.run.evo.eval_episodes = evo.integer("eval_episodes");
  cfg.run.evo.archive_crowding_prune = evo.boolean("archive_crowding_prune");
  cfg.run.evo.workers = evo.integer("workers");
  Node ref = evo.child("reference");
  cfg.run.evo.reference.automatic = ref.boolean("automatic");
  cfg.run.evo.reference.f1_ref = ref.num("f1_ref");
  cfg.run.evo.reference.f2_ref = ref.num("f2_ref");
  ref.finish();
  evo.finish();

  Node base = root.child("baseline");
  cfg.baseline.kind = base.guarded("kind", [](const std::string& s) { return baselines::parse_baseline_kind(s); });
  cfg.baseline.circle_radius_fraction = base.num("circle_radius_fraction");
  cfg.baseline.spiral_max_radius_fraction = base.num("spiral_max_radius_fraction");
  base.finish();

  root.finish();
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  const evo::RunConfig& r = cfg.run;
  return json{
      {"seed", cfg.seed},
      {"output_dir", cfg.output_dir},
      {"update_rule", evo::to_string(r.rule)},
      {"env", write_env(r.env)},
      {"network", {{"hidden", r.net.hidden}, {"init_global_std", r.net.init_global_std}}},
      {"ppo",
       {{"clip_eps", r.ppo.clip_eps},
        {"epochs", r.ppo.epochs},
        {"minibatch", r.ppo.minibatch},
        {"steps_per_iter", r.ppo.steps_per_iter},
        {"entropy_coef", r.ppo.entropy_coef},
        {"learning_rate", r.ppo.learning_rate},
        {"critic_learning_rate", r.ppo.critic_learning_rate},
        {"gae_lambda", r.ppo.gae_lambda},
        {"normalize_advantage", r.ppo.normalize_advantage}}},
      {"tdl", {{"kl_budget", r.tdl.kl_budget}, {"phi", r.tdl.phi}, {"improve_old_prob", r.tdl.improve_old_prob}}},
      {"evo",
       {{"n_tasks", r.evo.n_tasks},
        {"warmup_iters", r.evo.warmup_iters},
        {"generations", r.evo.generations},
        {"buffer_size", r.evo.buffer_size},
        {"kmeans_k", r.evo.kmeans_k},
        {"eval_episodes", r.evo.eval_episodes},
        {"archive_crowding_prune", r.evo.archive_crowding_prune},
        {"workers", r.evo.workers},
        {"reference",
         {{"automatic", r.evo.reference.automatic},
          {"f1_ref", r.evo.reference.f1_ref},
          {"f2_ref", r.evo.reference.f2_ref}}}}},
      {"baseline",
       {{"kind", baselines::to_string(cfg.baseline.kind)},
        {"circle_radius_fraction", cfg.baseline.circle_radius_fraction},
        {"spiral_max_radius_fraction", cfg.baseline.spiral_max_radius_fraction}}},
  };
}

ExperimentConfig parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line number for the diagnostic.
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ConfigError("JSON syntax error at line " + std::to_string(line) + ": " + e.what());
  }
  return from_json(j);
}

ExperimentConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string canonical_dump(const ExperimentConfig& cfg) { return to_json(cfg).dump(); }

std::uint64_t config_hash(const ExperimentConfig& cfg) { return fnv1a64(canonical_dump(cfg)); }

}  // namespace emot::config
