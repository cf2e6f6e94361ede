#include "pcurl/experiment.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "pcurl/checkpoint.hpp"
#include "pcurl/error.hpp"

namespace pcurl {

namespace fs = std::filesystem;

ExperimentResult train(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;

  const auto prompts = make_prompt_set(cfg.data_size, derive_seed(cfg.seed, "env"),
                                       cfg.difficulty, cfg.env);
  CurriculumPlan plan;
  plan.stages = cfg.resolved_stages();
  split_validation(prompts, cfg.validation_size, derive_seed(cfg.seed, "split"), plan);

  const PolicyParams init = template_policy(cfg.env, cfg.init_think, cfg.init_sharpness, cfg.init_explore);
  if (cfg.filter) {
    Rng filter_rng(derive_seed(cfg.seed, "filter"));
    auto filtered = difficulty_filter(plan.dataset, init, cfg.filter_trials,
                                      cfg.filter_threshold, filter_rng, cfg.temperature,
                                      cfg.env.max_len);
    if (filtered.kept.empty()) throw ConfigError("difficulty filter removed every prompt");
    plan.dataset = std::move(filtered.kept);
    result.filter_report = std::move(filtered.report);
  }
  result.train_size = static_cast<int>(plan.dataset.size());

  TrainingSetup setup;
  setup.rollout = {cfg.group_size, cfg.temperature, cfg.env.max_len, cfg.workers};
  setup.prompts_per_step = cfg.prompts_per_step;
  setup.length = cfg.length;
  setup.coef = cfg.coef;
  setup.w = cfg.w;
  setup.optim = cfg.optim;
  setup.validation = {cfg.g_eval, cfg.greedy_validation, cfg.temperature, cfg.env.max_len};
  setup.ref_params = init;
  setup.dataset = plan.dataset;
  setup.validation_set = plan.validation_set;
  setup.plateau_stop = cfg.plateau_stop;
  setup.plateau_patience = cfg.plateau_patience;
  setup.record_wall_time = cfg.record_wall_time;
  setup.seed = cfg.seed;

  TrainState state;
  state.params = init;
  for (const auto& stage : plan.stages) {
    const std::size_t first_row = state.metrics_log.size();
    try {
      state = run_stage(std::move(state), stage, setup);
    } catch (const StageAborted& e) {
      state = e.state();
      result.aborted = true;
      result.error = e.what();
      break;
    }
    StageSummary s;
    s.name = to_string(stage.name);
    s.steps = static_cast<int>(state.metrics_log.size() - first_row);
    s.best_validation_accuracy = state.best_checkpoint->accuracy;
    s.best_step = state.best_checkpoint->step;
    s.best_params = state.best_checkpoint->params;
    result.stages.push_back(std::move(s));
  }

  result.metrics = std::move(state.metrics_log);
  result.final_params = state.params;
  if (!result.stages.empty()) {
    result.final_validation_accuracy = result.stages.back().best_validation_accuracy;
  }
  Rng summary_rng(derive_seed(cfg.seed, "summary"));
  ValidationSettings summary{cfg.summary_samples, false, cfg.temperature, cfg.env.max_len};
  result.final_buckets = bucket_summary(result.final_params, plan.validation_set,
                                        cfg.env.buckets, summary, summary_rng);
  return result;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  return os;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, ExperimentResult* out) {
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  open_out(dir / "config.txt") << serialize(cfg);

  ExperimentResult result = train(cfg);

  {
    auto os = open_out(dir / "metrics.csv");
    write_metrics(os, result.metrics);
  }
  {
    auto os = open_out(dir / "buckets.csv");
    write_bucket_metrics(os, result.metrics);
  }
  {
    auto os = open_out(dir / "histogram.csv");
    write_histograms(os, result.metrics);
  }
  if (result.filter_report) open_out(dir / "filter_report.csv") << result.filter_report->to_table();

  for (std::size_t i = 0; i < result.stages.size(); ++i) {
    const auto& s = result.stages[i];
    auto os = open_out(dir / ("checkpoint_" + std::to_string(i) + "_" + s.name + ".txt"));
    write_checkpoint(os, {s.best_params, static_cast<int>(i), s.best_step, cfg.seed});
  }

  nlohmann::ordered_json summary;
  summary["seed"] = cfg.seed;
  summary["preset"] = to_string(cfg.preset);
  summary["scale"] = to_string(cfg.scale);
  summary["train_size"] = result.train_size;
  summary["steps"] = result.metrics.size();
  summary["final_validation_accuracy"] = result.final_validation_accuracy;
  summary["aborted"] = result.aborted;
  auto& stages = summary["stages"] = nlohmann::json::array();
  for (const auto& s : result.stages) {
    stages.push_back({{"name", s.name},
                      {"steps", s.steps},
                      {"best_validation_accuracy", s.best_validation_accuracy},
                      {"best_step", s.best_step}});
  }
  auto& buckets = summary["final_buckets"] = nlohmann::json::array();
  for (std::size_t b = 0; b < result.final_buckets.size(); ++b) {
    const auto& s = result.final_buckets[b];
    buckets.push_back({{"bucket", b},
                       {"prompts", s.groups},
                       {"mean_response_length", s.mean_response_length},
                       {"accuracy", s.accuracy}});
  }
  open_out(dir / "summary.json") << summary.dump(2) << '\n';

  if (result.aborted) open_out(dir / "error.txt") << result.error << '\n';
  const int status = result.aborted ? 2 : 0;
  if (out != nullptr) *out = std::move(result);
  return status;
}

}  // namespace pcurl
