#pragma once

#include "sedge/detector.hpp"
#include "sedge/eval.hpp"
#include "sedge/tree.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace sedge {

/// Invalid configuration (maps to the config exit code).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PathConfig {
  std::string train_dataset;
  std::string test_dataset;
  std::string model;
  std::string output;
};

/// Everything a run needs. Serialized as nested JSON objects "forest",
/// "channels", "detect", "eval" and "paths" plus top-level "threads" and
/// "deterministic"; every key is optional and unknown keys are rejected.
struct RunConfig {
  ForestParams forest;
  ChannelParams channels;
  DetectOptions detect;
  int eval_thresholds = 99;
  double eval_tolerance = kDefaultTolerance;
  int nms_border = 0;
  PathConfig paths;
  int threads = 0;  // 0: SEDGE_THREADS or hardware concurrency
  bool deterministic = true;

  void validate() const;
  EvalOptions eval_options() const;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& cfg);

/// Set one parameter by its sweep name from a JSON-literal or bare string
/// value; throws ConfigError listing valid names on an unknown name.
void set_parameter(RunConfig& cfg, const std::string& name, const std::string& value);
const std::vector<std::string>& sweep_parameter_names();

/// Set a dotted config key such as "forest.n_patches" (or "threads").
/// Does not validate; call RunConfig::validate after the last change.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

std::string to_string(GainType g);
std::string to_string(Discretizer d);
std::string to_string(TreeSchedule s);

}  // namespace sedge
