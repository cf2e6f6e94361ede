#include "pcurl/config.hpp"

#include <functional>
#include <set>
#include <sstream>

#include "pcurl/error.hpp"
#include "pcurl/metrics.hpp"

namespace pcurl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::logic_error&) {
  }
  throw ConfigError("bad real for " + key + ": '" + v + "'");
}

long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used == v.size()) return x;
  } catch (const std::logic_error&) {
  }
  throw ConfigError("bad integer for " + key + ": '" + v + "'");
}

int to_int(const std::string& key, const std::string& v) {
  return static_cast<int>(to_integer(key, v));
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used == v.size() && v.find('-') == std::string::npos) return x;
  } catch (const std::logic_error&) {
  }
  throw ConfigError("bad unsigned integer for " + key + ": '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("bad boolean for " + key + ": '" + v + "'");
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

struct Binding {
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define PCURL_REAL(KEY, FIELD)                                                     \
  Binding {                                                                        \
    KEY, [](const ExperimentConfig& c) { return format_real(c.FIELD); },           \
        [](ExperimentConfig& c, const std::string& v) { c.FIELD = to_real(KEY, v); } \
  }
#define PCURL_INT(KEY, FIELD)                                                      \
  Binding {                                                                        \
    KEY, [](const ExperimentConfig& c) { return std::to_string(c.FIELD); },        \
        [](ExperimentConfig& c, const std::string& v) { c.FIELD = to_int(KEY, v); } \
  }
#define PCURL_BOOL(KEY, FIELD)                                                      \
  Binding {                                                                         \
    KEY, [](const ExperimentConfig& c) { return from_bool(c.FIELD); },              \
        [](ExperimentConfig& c, const std::string& v) { c.FIELD = to_bool(KEY, v); } \
  }

// Canonical order. "scale" is handled first by from_entries.
const std::vector<Binding>& bindings() {
  static const std::vector<Binding> table = {
      {"seed", [](const ExperimentConfig& c) { return std::to_string(c.seed); },
       [](ExperimentConfig& c, const std::string& v) { c.seed = to_u64("seed", v); }},
      {"preset", [](const ExperimentConfig& c) { return to_string(c.preset); },
       [](ExperimentConfig& c, const std::string& v) { c.preset = parse_preset(v); }},
      {"scale", [](const ExperimentConfig& c) { return to_string(c.scale); },
       [](ExperimentConfig& c, const std::string& v) { c.scale = parse_scale(v); }},
      PCURL_INT("env.buckets", env.buckets),
      PCURL_INT("env.answers", env.answers),
      PCURL_INT("env.k_max", env.k_max),
      PCURL_INT("env.t_cap", env.t_cap),
      PCURL_INT("env.max_len", env.max_len),
      PCURL_INT("env.init_think", init_think),
      PCURL_REAL("env.init_sharpness", init_sharpness),
      PCURL_REAL("env.init_explore", init_explore),
      PCURL_INT("data.size", data_size),
      {"data.difficulty", [](const ExperimentConfig& c) { return c.difficulty.to_string(); },
       [](ExperimentConfig& c, const std::string& v) { c.difficulty = DifficultyLaw::parse(v); }},
      PCURL_INT("data.validation_size", validation_size),
      PCURL_BOOL("data.filter", filter),
      PCURL_INT("data.filter_trials", filter_trials),
      PCURL_REAL("data.filter_threshold", filter_threshold),
      PCURL_INT("rollout.group_size", group_size),
      PCURL_REAL("rollout.temperature", temperature),
      PCURL_INT("rollout.prompts_per_step", prompts_per_step),
      PCURL_INT("rollout.workers", workers),
      PCURL_REAL("reward.alpha", coef.alpha),
      PCURL_REAL("reward.beta", coef.beta),
      PCURL_REAL("reward.gamma", coef.gamma),
      PCURL_REAL("reward.w", w),
      {"length.mode", [](const ExperimentConfig& c) { return to_string(c.length.mode); },
       [](ExperimentConfig& c, const std::string& v) { c.length.mode = parse_length_mode(v); }},
      PCURL_REAL("length.r_min", length.r_len_min),
      PCURL_REAL("length.r_max", length.r_len_max),
      PCURL_INT("length.l_max", length.l_max),
      PCURL_REAL("optim.clip_eps", optim.clip_eps),
      PCURL_REAL("optim.kl_coef", optim.kl_coef),
      PCURL_REAL("optim.learning_rate", optim.learning_rate),
      PCURL_BOOL("optim.adaptive_moments", optim.adaptive_moments),
      {"optim.kl", [](const ExperimentConfig& c) { return to_string(c.optim.kl); },
       [](ExperimentConfig& c, const std::string& v) { c.optim.kl = parse_kl_estimator(v); }},
      PCURL_INT("optim.minibatches", optim.minibatches),
      PCURL_INT("validation.g_eval", g_eval),
      PCURL_BOOL("validation.greedy", greedy_validation),
      PCURL_INT("validation.every", validation_every),
      PCURL_INT("validation.summary_samples", summary_samples),
      PCURL_BOOL("curriculum.plateau_stop", plateau_stop),
      PCURL_INT("curriculum.plateau_patience", plateau_patience),
      {"output.dir", [](const ExperimentConfig& c) { return c.output_dir; },
       [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; }},
      PCURL_BOOL("output.record_wall_time", record_wall_time),
  };
  return table;
}

#undef PCURL_REAL
#undef PCURL_INT
#undef PCURL_BOOL

std::string stage_key(std::size_t i, const char* field) {
  return "stage" + std::to_string(i) + "." + field;
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults(Scale scale) {
  ExperimentConfig c;
  c.scale = scale;
  if (scale == Scale::kPaperRatio) {
    c.validation_size = 1000;
    c.data_size = 3000;
    c.optim.minibatches = 4;
  }
  return c;
}

std::vector<StageConfig> ExperimentConfig::resolved_stages() const {
  if (!stages.empty()) return stages;
  auto out = plan_default(preset, scale).stages;
  if (validation_every > 0) {
    for (auto& s : out) s.validation_every = validation_every;
  }
  return out;
}

void ExperimentConfig::validate() const {
  env.validate();
  length.validate();
  optim.validate();
  if (data_size < 2) throw ConfigError("data.size must be >= 2");
  if (validation_size < 1 || validation_size >= data_size) {
    throw ConfigError("data.validation_size must be in [1, data.size)");
  }
  if (filter_trials < 1) throw ConfigError("data.filter_trials must be >= 1");
  if (!(filter_threshold >= 0.0 && filter_threshold <= 1.0)) {
    throw ConfigError("data.filter_threshold must lie in [0,1]");
  }
  if (group_size < 2) throw ConfigError("rollout.group_size must be >= 2");
  if (!(temperature > 0.0)) throw ConfigError("rollout.temperature must be > 0");
  if (prompts_per_step < 1) throw ConfigError("rollout.prompts_per_step must be >= 1");
  if (workers < 1) throw ConfigError("rollout.workers must be >= 1");
  if (!(w > 0.0 && w <= 1.0)) throw ConfigError("reward.w must lie in (0,1]");
  if (g_eval < 1) throw ConfigError("validation.g_eval must be >= 1");
  if (validation_every < 0) throw ConfigError("validation.every must be >= 0");
  if (summary_samples < 1) throw ConfigError("validation.summary_samples must be >= 1");
  if (plateau_patience < 1) throw ConfigError("curriculum.plateau_patience must be >= 1");
  if (init_think < 0) throw ConfigError("env.init_think must be >= 0");
  for (const auto& s : resolved_stages()) s.validate();
}

std::vector<std::pair<std::string, std::string>> to_entries(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& b : bindings()) out.emplace_back(b.key, b.get(cfg));
  out.emplace_back("stages.count", std::to_string(cfg.stages.size()));
  for (std::size_t i = 0; i < cfg.stages.size(); ++i) {
    const auto& s = cfg.stages[i];
    out.emplace_back(stage_key(i, "name"), to_string(s.name));
    out.emplace_back(stage_key(i, "weight"), s.weight_variant.to_string());
    out.emplace_back(stage_key(i, "dylr"), from_bool(s.dylr));
    out.emplace_back(stage_key(i, "budget"), std::to_string(s.step_budget));
    out.emplace_back(stage_key(i, "validation_every"), std::to_string(s.validation_every));
    out.emplace_back(stage_key(i, "shuffle_seed"), std::to_string(s.shuffle_seed));
    out.emplace_back(stage_key(i, "allow_dylr_any_stage"), from_bool(s.allow_dylr_any_stage));
  }
  return out;
}

ExperimentConfig from_entries(const std::map<std::string, std::string>& entries) {
  Scale scale = Scale::kDesk;
  if (auto it = entries.find("scale"); it != entries.end()) scale = parse_scale(it->second);
  ExperimentConfig cfg = ExperimentConfig::defaults(scale);

  std::set<std::string> used;
  for (const auto& b : bindings()) {
    if (auto it = entries.find(b.key); it != entries.end()) {
      b.set(cfg, it->second);
      used.insert(b.key);
    }
  }

  std::size_t count = 0;
  if (auto it = entries.find("stages.count"); it != entries.end()) {
    const auto n = to_integer("stages.count", it->second);
    if (n < 0) throw ConfigError("stages.count must be >= 0");
    count = static_cast<std::size_t>(n);
    used.insert("stages.count");
  }
  for (std::size_t i = 0; i < count; ++i) {
    StageConfig s;
    s.shuffle_seed = i;
    auto field = [&](const char* name) -> const std::string* {
      const auto key = stage_key(i, name);
      auto it = entries.find(key);
      if (it == entries.end()) return nullptr;
      used.insert(key);
      return &it->second;
    };
    if (auto v = field("name")) s.name = parse_stage_name(*v);
    if (auto v = field("weight")) s.weight_variant = WeightVariant::parse(*v);
    if (auto v = field("dylr")) s.dylr = to_bool("dylr", *v);
    if (auto v = field("budget")) s.step_budget = to_int("budget", *v);
    if (auto v = field("validation_every")) s.validation_every = to_int("validation_every", *v);
    if (auto v = field("shuffle_seed")) s.shuffle_seed = to_u64("shuffle_seed", *v);
    if (auto v = field("allow_dylr_any_stage")) {
      s.allow_dylr_any_stage = to_bool("allow_dylr_any_stage", *v);
    }
    cfg.stages.push_back(s);
  }

  for (const auto& [key, value] : entries) {
    if (!used.count(key)) throw ConfigError("unknown config key: " + key);
  }
  return cfg;
}

std::string serialize(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : to_entries(cfg)) out += k + " = " + v + "\n";
  return out;
}

std::map<std::string, std::string> parse_entries(const std::string& text) {
  std::map<std::string, std::string> entries;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", lineno);
    if (entries.count(key)) throw ParseError("duplicate key " + key, lineno);
    entries[key] = value;
  }
  return entries;
}

ExperimentConfig parse_config(const std::string& text) {
  return from_entries(parse_entries(text));
}

std::string env_var_name(const std::string& key) {
  std::string out = "PCURL_";
  for (char c : key) {
    out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

std::map<std::string, std::string> apply_env_overrides(std::map<std::string, std::string> entries,
                                                       GetEnvFn getenv_fn) {
  // Complete the key set so unset keys can be overridden too.
  auto complete = [&](const std::map<std::string, std::string>& e) {
    std::map<std::string, std::string> full;
    for (auto& [k, v] : to_entries(from_entries(e))) full[k] = v;
    return full;
  };
  auto full = complete(entries);
  for (auto& [k, v] : full) {
    if (const char* value = getenv_fn(env_var_name(k).c_str())) v = value;
  }
  // A stage count override introduces keys that were not present before.
  auto again = complete(full);
  for (auto& [k, v] : again) {
    if (full.count(k)) continue;
    if (const char* value = getenv_fn(env_var_name(k).c_str())) v = value;
  }
  return again;
}

}  // namespace pcurl
