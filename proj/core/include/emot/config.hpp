#pragma once

// Experiment configuration as a strict JSON tree: every field is required and
// unknown keys are rejected, so no constant is ever filled in silently.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "emot/baselines.hpp"
#include "emot/evo.hpp"

namespace emot::config {

struct ExperimentConfig {
  evo::RunConfig run;
  baselines::BaselineConfig baseline;
  std::uint64_t seed = 1;
  std::string output_dir = "runs/default";

  void validate() const;
};

/// Raised for malformed, incomplete or invalid configuration; the message
/// names the offending field path (e.g. env.channel.a_env) or file line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ExperimentConfig from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

ExperimentConfig parse(const std::string& text);
ExperimentConfig load(const std::filesystem::path& path);

/// Compact dump with sorted keys; numbers use shortest round-trip form.
std::string canonical_dump(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace emot::config
