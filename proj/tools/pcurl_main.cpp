// Command-line entry point: run, compare, curves, filter-report, selfcheck.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pcurl/config.hpp"
#include "pcurl/curves.hpp"
#include "pcurl/error.hpp"
#include "pcurl/experiment.hpp"
#include "pcurl/selfcheck.hpp"

namespace fs = std::filesystem;
using namespace pcurl;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct CommonFlags {
  std::string config;
  std::string preset;
  std::string scale;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value config file");
  cmd->add_option("--preset", f.preset, "pcurl | vanilla | odsw_only | dylr_only");
  cmd->add_option("--scale", f.scale, "desk | paper_ratio");
  cmd->add_option("--seed", f.seed, "top-level seed");
  cmd->add_option("--workers", f.workers, "rollout worker threads");
}

// defaults < config file < PCURL_* environment < command-line flags.
ExperimentConfig load_config(const CommonFlags& f) {
  std::map<std::string, std::string> entries;
  if (!f.config.empty()) entries = parse_entries(read_file(f.config));
  if (!f.scale.empty()) entries["scale"] = f.scale;
  entries = apply_env_overrides(entries, [](const char* k) -> const char* { return std::getenv(k); });
  if (!f.preset.empty()) entries["preset"] = f.preset;
  if (!f.scale.empty()) entries["scale"] = f.scale;
  if (f.seed) entries["seed"] = std::to_string(*f.seed);
  if (f.workers) entries["rollout.workers"] = std::to_string(*f.workers);
  if (!f.out.empty()) entries["output.dir"] = f.out;
  return from_entries(entries);
}

int cmd_run(const CommonFlags& f) {
  const auto cfg = load_config(f);
  ExperimentResult result;
  const int status = run_experiment(cfg, &result);
  std::cout << "preset " << to_string(cfg.preset) << " seed " << cfg.seed << ": "
            << result.metrics.size() << " steps, final validation accuracy "
            << result.final_validation_accuracy << '\n';
  if (result.aborted) std::cerr << "aborted: " << result.error << '\n';
  std::cout << "artifacts in " << cfg.output_dir << '\n';
  return status;
}

int cmd_compare(const CommonFlags& f, const std::vector<std::string>& presets, int seeds) {
  auto base = load_config(f);
  const fs::path root = f.out.empty() ? fs::path("runs/compare") : fs::path(f.out);
  fs::create_directories(root);
  std::ofstream table(root / "comparison.csv", std::ios::binary);
  if (!table) throw IoError("cannot write comparison table");
  table << "seed,preset,final_validation_accuracy";
  for (int b = 0; b < base.env.buckets; ++b) table << ",length_bucket" << b;
  table << '\n';
  int status = 0;
  for (int s = 0; s < seeds; ++s) {
    for (const auto& p : presets) {
      auto cfg = base;
      cfg.seed = static_cast<std::uint64_t>(s);
      cfg.preset = parse_preset(p);
      cfg.output_dir = (root / (p + "_seed" + std::to_string(s))).string();
      ExperimentResult r;
      status = std::max(status, run_experiment(cfg, &r));
      table << s << ',' << p << ',' << format_real(r.final_validation_accuracy);
      for (const auto& b : r.final_buckets) table << ',' << format_real(b.mean_response_length);
      table << '\n';
      std::cout << p << " seed " << s << ": " << r.final_validation_accuracy << '\n';
    }
  }
  std::cout << "comparison table in " << (root / "comparison.csv").string() << '\n';
  return status;
}

int cmd_filter_report(const CommonFlags& f, std::optional<int> trials,
                      std::optional<double> threshold, const std::string& out) {
  auto cfg = load_config(f);
  if (trials) cfg.filter_trials = *trials;
  if (threshold) cfg.filter_threshold = *threshold;
  cfg.validate();
  const auto prompts =
      make_prompt_set(cfg.data_size, derive_seed(cfg.seed, "env"), cfg.difficulty, cfg.env);
  const auto init = template_policy(cfg.env, cfg.init_think, cfg.init_sharpness, cfg.init_explore);
  Rng rng(derive_seed(cfg.seed, "filter"));
  const auto result = difficulty_filter(prompts, init, cfg.filter_trials, cfg.filter_threshold,
                                        rng, cfg.temperature, cfg.env.max_len);
  const auto table = result.report.to_table();
  std::cout << table;
  if (!out.empty()) {
    std::ofstream os(out, std::ios::binary);
    if (!os) throw IoError("cannot write " + out);
    os << table;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Progressive curriculum RL laboratory on a synthetic verifiable task"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  auto* run = app.add_subcommand("run", "run one experiment");
  add_common(run, run_flags);
  run->add_option("--out", run_flags.out, "output directory");

  CommonFlags cmp_flags;
  std::vector<std::string> presets{"pcurl", "vanilla"};
  int seeds = 5;
  auto* compare = app.add_subcommand("compare", "run presets over seeds and tabulate");
  add_common(compare, cmp_flags);
  compare->add_option("--out", cmp_flags.out, "output root");
  compare->add_option("--presets", presets, "presets to compare")->delimiter(',');
  compare->add_option("--seeds", seeds, "seeds 0..N-1")->check(CLI::PositiveNumber);

  std::string metrics, curves_out, stage;
  auto* curves = app.add_subcommand("curves", "export plot-ready series from a metrics file");
  curves->add_option("--metrics", metrics, "metrics.csv")->required();
  curves->add_option("--out", curves_out, "output directory")->required();
  curves->add_option("--stage", stage, "only rows of this stage");

  CommonFlags filter_flags;
  std::optional<int> trials;
  std::optional<double> threshold;
  std::string filter_out;
  auto* filter = app.add_subcommand("filter-report", "difficulty filter with the initial policy");
  add_common(filter, filter_flags);
  filter->add_option("--trials", trials, "rollouts per prompt");
  filter->add_option("--threshold", threshold, "remove prompts whose accuracy is above this");
  filter->add_option("--out", filter_out, "write the table here too");

  int fd_seeds = 20;
  auto* selfcheck = app.add_subcommand("selfcheck", "formula point checks and gradient check");
  selfcheck->add_option("--seeds", fd_seeds, "random gradient instances");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_flags);
    if (*compare) return cmd_compare(cmp_flags, presets, seeds);
    if (*curves) {
      const auto set = emit_curves(metrics, curves_out,
                                   stage.empty() ? std::nullopt : std::optional(stage));
      std::cout << set.series.size() << " series written to " << curves_out << '\n';
      return 0;
    }
    if (*filter) return cmd_filter_report(filter_flags, trials, threshold, filter_out);
    if (*selfcheck) return run_selfcheck(std::cout, fd_seeds) ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
