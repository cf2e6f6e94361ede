#ifndef PCURL_CONFIG_HPP_
#define PCURL_CONFIG_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pcurl/curriculum.hpp"
#include "pcurl/env.hpp"
#include "pcurl/optimizer.hpp"
#include "pcurl/rewards.hpp"

namespace pcurl {

// Full experiment description. Every field has a default, so a
// default-constructed config runs end to end.
//
// Text form is flat "key = value" lines with dotted section names
// ("optim.learning_rate = 0.01"); '#' starts a comment. Any key can be
// overridden from the environment as PCURL_<KEY> with dots replaced by
// underscores and letters upper-cased (PCURL_OPTIM_LEARNING_RATE).
struct ExperimentConfig {
  std::uint64_t seed = 0;
  Preset preset = Preset::kPcurl;
  Scale scale = Scale::kDesk;
  // Explicit stage list; empty means "use the preset".
  std::vector<StageConfig> stages;

  // Toy scale that trains in about a second; lengths here are tokens, not
  // the hundreds used for real models.
  EnvDims env{4, 4, 12, 28, 28};
  int init_think = 3;
  double init_sharpness = 2.5;
  double init_explore = 1.5;

  int data_size = 600;
  DifficultyLaw difficulty = DifficultyLaw::uniform();
  int validation_size = 200;
  bool filter = true;
  int filter_trials = 8;
  double filter_threshold = 0.5;

  int group_size = 16;
  double temperature = 1.0;
  int prompts_per_step = 128;
  int workers = 1;

  RewardCoefficients coef;
  double w = 0.25;
  LengthRewardConfig length{-1.0, 0.0, 18, LengthMode::kDynamic};
  OptimConfig optim{0.2, 1e-3, 0.4, true};

  int g_eval = 1;
  bool greedy_validation = false;
  // 0 keeps the preset cadence.
  int validation_every = 0;
  bool plateau_stop = false;
  int plateau_patience = 3;
  int summary_samples = 16;

  std::string output_dir = "runs/default";
  bool record_wall_time = false;

  // Defaults with the scale-dependent values (validation size, minibatches)
  // filled in.
  static ExperimentConfig defaults(Scale scale);

  // Stages actually run: explicit ones, or the preset's with the cadence
  // override applied.
  std::vector<StageConfig> resolved_stages() const;

  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

// Ordered key/value view; the order is the canonical serialization order.
std::vector<std::pair<std::string, std::string>> to_entries(const ExperimentConfig& cfg);

// Throws ConfigError on an unknown key or bad value.
ExperimentConfig from_entries(const std::map<std::string, std::string>& entries);

std::string serialize(const ExperimentConfig& cfg);
// Throws ParseError (with line) on malformed lines, ConfigError on bad values.
std::map<std::string, std::string> parse_entries(const std::string& text);
ExperimentConfig parse_config(const std::string& text);

// PCURL_OPTIM_LEARNING_RATE for "optim.learning_rate".
std::string env_var_name(const std::string& key);

// Applies PCURL_* environment overrides for every known key (including the
// keys of explicit stages). getenv is injectable for tests.
using GetEnvFn = std::function<const char*(const char*)>;
std::map<std::string, std::string> apply_env_overrides(std::map<std::string, std::string> entries,
                                                       GetEnvFn getenv_fn);

}  // namespace pcurl

#endif  // PCURL_CONFIG_HPP_
