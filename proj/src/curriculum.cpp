#include "pcurl/curriculum.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <sstream>

namespace pcurl {

std::string to_string(StageName name) {
  switch (name) {
    case StageName::kEasy:
      return "easy";
    case StageName::kMedium:
      return "medium";
    case StageName::kHard:
      return "hard";
    case StageName::kSingle:
      return "single";
  }
  return "single";
}

StageName parse_stage_name(const std::string& text) {
  if (text == "easy") return StageName::kEasy;
  if (text == "medium") return StageName::kMedium;
  if (text == "hard") return StageName::kHard;
  if (text == "single") return StageName::kSingle;
  throw ConfigError("unknown stage name: " + text);
}

void StageConfig::validate() const {
  if (step_budget < 1) throw ConfigError("stage step budget must be >= 1");
  if (validation_every < 1) throw ConfigError("validation cadence must be >= 1");
  if (dylr && name != StageName::kHard && !allow_dylr_any_stage) {
    throw ConfigError("length reward is reserved for the hard stage");
  }
}

std::string to_string(Preset p) {
  switch (p) {
    case Preset::kPcurl:
      return "pcurl";
    case Preset::kVanilla:
      return "vanilla";
    case Preset::kOdswOnly:
      return "odsw_only";
    case Preset::kDylrOnly:
      return "dylr_only";
  }
  return "pcurl";
}

Preset parse_preset(const std::string& text) {
  if (text == "pcurl") return Preset::kPcurl;
  if (text == "vanilla") return Preset::kVanilla;
  if (text == "odsw_only") return Preset::kOdswOnly;
  if (text == "dylr_only") return Preset::kDylrOnly;
  throw ConfigError("unknown preset: " + text);
}

std::string to_string(Scale s) { return s == Scale::kDesk ? "desk" : "paper_ratio"; }

Scale parse_scale(const std::string& text) {
  if (text == "desk") return Scale::kDesk;
  if (text == "paper_ratio") return Scale::kPaperRatio;
  throw ConfigError("unknown scale: " + text);
}

int CurriculumPlan::total_steps() const {
  int n = 0;
  for (const auto& s : stages) n += s.step_budget;
  return n;
}

CurriculumPlan plan_default(Preset preset, Scale scale) {
  const int div = scale == Scale::kDesk ? 4 : 1;
  const int every = scale == Scale::kDesk ? 5 : 10;
  const int easy = 100 / div;
  const int medium = 100 / div;
  const int hard = 200 / div;

  auto stage = [&](StageName name, WeightVariant v, bool dylr, int budget,
                   std::uint64_t index) {
    StageConfig s;
    s.name = name;
    s.weight_variant = v;
    s.dylr = dylr;
    s.step_budget = budget;
    s.validation_every = every;
    s.shuffle_seed = index;
    return s;
  };

  CurriculumPlan plan;
  switch (preset) {
    case Preset::kPcurl:
    case Preset::kOdswOnly: {
      const bool dylr = preset == Preset::kPcurl;
      plan.stages = {stage(StageName::kEasy, WeightVariant::easy(), false, easy, 0),
                     stage(StageName::kMedium, WeightVariant::medium(), false, medium, 1),
                     stage(StageName::kHard, WeightVariant::hard(), dylr, hard, 2)};
      break;
    }
    case Preset::kVanilla:
      plan.stages = {stage(StageName::kSingle, WeightVariant::none(), false,
                           easy + medium + hard, 0)};
      break;
    case Preset::kDylrOnly: {
      auto s = stage(StageName::kSingle, WeightVariant::none(), true, easy + medium + hard, 0);
      s.allow_dylr_any_stage = true;
      plan.stages = {s};
      break;
    }
  }
  return plan;
}

void split_validation(std::vector<PromptSpec> prompts, int validation_size,
                      std::uint64_t seed, CurriculumPlan& plan) {
  if (validation_size < 1 || static_cast<std::size_t>(validation_size) >= prompts.size()) {
    throw ConfigError("validation size must be in [1, prompts)");
  }
  Rng rng(seed);
  shuffle(prompts.begin(), prompts.end(), rng);
  auto by_id = [](const PromptSpec& a, const PromptSpec& b) { return a.id < b.id; };
  plan.validation_set.assign(prompts.begin(), prompts.begin() + validation_size);
  plan.dataset.assign(prompts.begin() + validation_size, prompts.end());
  std::sort(plan.validation_set.begin(), plan.validation_set.end(), by_id);
  std::sort(plan.dataset.begin(), plan.dataset.end(), by_id);
}

std::vector<std::size_t> stage_order(std::size_t n, std::uint64_t seed,
                                     std::uint64_t shuffle_seed) {
  Rng rng(derive_seed(seed, "shuffle", {shuffle_seed}));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order.begin(), order.end(), rng);
  return order;
}

std::string FilterReport::to_table() const {
  std::ostringstream os;
  os << "dataset,data_size,filter_rate\n";
  auto line = [&](const FilterRow& r) {
    char rate[32];
    std::snprintf(rate, sizeof rate, "%.1f%%", 100.0 * r.filter_rate());
    os << r.dataset << ',' << r.kept << ',' << rate << '\n';
  };
  for (const auto& r : rows) line(r);
  line(overall);
  return os.str();
}

FilterResult difficulty_filter(const std::vector<PromptSpec>& prompts, const TrialFn& trial,
                               int trials, double threshold, Rng& rng) {
  if (prompts.empty()) throw InputError("difficulty filter needs prompts");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ConfigError("threshold must lie in [0,1]");
  }

  int buckets = 0;
  for (const auto& p : prompts) buckets = std::max(buckets, p.bucket + 1);
  FilterResult out;
  out.report.rows.resize(static_cast<std::size_t>(buckets));
  for (int b = 0; b < buckets; ++b) {
    out.report.rows[static_cast<std::size_t>(b)].dataset = "bucket_" + std::to_string(b);
  }
  out.report.overall.dataset = "total";

  for (const auto& p : prompts) {
    int correct = 0;
    for (int k = 0; k < trials; ++k) correct += trial(p, rng) ? 1 : 0;
    out.report.correct_counts.push_back(correct);
    const bool keep = static_cast<double>(correct) / trials <= threshold;
    auto& row = out.report.rows[static_cast<std::size_t>(p.bucket)];
    ++row.total;
    ++out.report.overall.total;
    if (keep) {
      ++row.kept;
      ++out.report.overall.kept;
      out.kept.push_back(p);
    }
  }
  return out;
}

FilterResult difficulty_filter(const std::vector<PromptSpec>& prompts,
                               const PolicyParams& params, int trials, double threshold,
                               Rng& rng, double temperature, int max_len) {
  const Vocabulary vocab(params.vocab() - 2);
  TrialFn trial = [&](const PromptSpec& p, Rng& r) {
    const auto y = sample_response(params, p, temperature, max_len, r);
    return score_response(p, y, max_len, vocab).acc;
  };
  return difficulty_filter(prompts, trial, trials, threshold, rng);
}

namespace {

void check_validation_inputs(const std::vector<PromptSpec>& prompts,
                             const ValidationSettings& settings) {
  if (prompts.empty()) throw ConfigError("validation set is empty");
  if (settings.g_eval < 1) throw ConfigError("g_eval must be >= 1");
}

// Calls fn(prompt, score) for every evaluation response.
template <typename Fn>
void for_each_eval(const PolicyParams& params, const std::vector<PromptSpec>& prompts,
                   const ValidationSettings& settings, Rng& rng, Fn&& fn) {
  const Vocabulary vocab(params.vocab() - 2);
  for (const auto& p : prompts) {
    if (settings.greedy) {
      const auto y = greedy_response(params, p, settings.max_len);
      fn(p, score_response(p, y, settings.max_len, vocab));
      continue;
    }
    for (int k = 0; k < settings.g_eval; ++k) {
      const auto y = sample_response(params, p, settings.temperature, settings.max_len, rng);
      fn(p, score_response(p, y, settings.max_len, vocab));
    }
  }
}

}  // namespace

double evaluate_validation(const PolicyParams& params,
                           const std::vector<PromptSpec>& validation_set,
                           const ValidationSettings& settings, Rng& rng) {
  check_validation_inputs(validation_set, settings);
  long correct = 0;
  long total = 0;
  for_each_eval(params, validation_set, settings, rng,
                [&](const PromptSpec&, const ScoreResult& s) {
                  correct += s.acc ? 1 : 0;
                  ++total;
                });
  return static_cast<double>(correct) / static_cast<double>(total);
}

std::vector<BucketStats> bucket_summary(const PolicyParams& params,
                                        const std::vector<PromptSpec>& prompts,
                                        int buckets, const ValidationSettings& settings,
                                        Rng& rng) {
  check_validation_inputs(prompts, settings);
  std::vector<BucketStats> out(static_cast<std::size_t>(buckets));
  std::vector<int> last_id(out.size(), -1);
  for_each_eval(params, prompts, settings, rng, [&](const PromptSpec& p, const ScoreResult& s) {
    auto& b = out.at(static_cast<std::size_t>(p.bucket));
    if (last_id[static_cast<std::size_t>(p.bucket)] != p.id) {
      ++b.groups;
      last_id[static_cast<std::size_t>(p.bucket)] = p.id;
    }
    ++b.responses;
    b.mean_response_length += s.reasoning_length;
    b.accuracy += s.acc ? 1.0 : 0.0;
  });
  for (auto& b : out) {
    if (b.responses > 0) {
      b.mean_response_length /= b.responses;
      b.accuracy /= b.responses;
    }
  }
  return out;
}

namespace {

struct StepTotals {
  double reward = 0.0, acc = 0.0, format = 0.0, len = 0.0, length = 0.0;
  long responses = 0;
};

std::vector<std::span<const BatchGroup>> split_minibatches(
    const std::vector<BatchGroup>& groups, int parts) {
  std::vector<std::span<const BatchGroup>> out;
  const std::size_t n = groups.size();
  const auto k = static_cast<std::size_t>(std::max(1, parts));
  std::size_t begin = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t end = begin + n / k + (j < n % k ? 1 : 0);
    if (end > begin) out.emplace_back(groups.data() + begin, end - begin);
    begin = end;
  }
  return out;
}

}  // namespace

TrainState run_stage(TrainState state, const StageConfig& stage, const TrainingSetup& setup) {
  stage.validate();
  if (setup.dataset.empty()) throw ConfigError("training dataset is empty");
  if (setup.prompts_per_step < 1) throw ConfigError("prompts_per_step must be >= 1");
  if (!state.params.same_shape(setup.ref_params)) {
    throw ConfigError("reference params shape mismatch");
  }

  const std::size_t n = setup.dataset.size();
  Rng shuffle_rng(derive_seed(setup.seed, "shuffle", {stage.shuffle_seed}));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order.begin(), order.end(), shuffle_rng);
  std::size_t cursor = 0;

  const bool length_active = stage.dylr && setup.length.mode != LengthMode::kOff;
  const int buckets = state.params.buckets();
  Optimizer optimizer(setup.optim);
  state.best_checkpoint.reset();
  int evals_without_gain = 0;

  for (int k = 0; k < stage.step_budget; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const PolicyParams before = state.params;
    ++state.step;

    std::vector<PromptSpec> prompts;
    prompts.reserve(static_cast<std::size_t>(setup.prompts_per_step));
    for (int j = 0; j < setup.prompts_per_step; ++j) {
      if (cursor == n) {
        shuffle(order.begin(), order.end(), shuffle_rng);
        cursor = 0;
      }
      prompts.push_back(setup.dataset[order[cursor++]]);
    }

    MetricsRecord rec;
    rec.step = state.step;
    rec.stage = to_string(stage.name);
    rec.buckets.assign(static_cast<std::size_t>(buckets), BucketStats{});
    StepTotals totals;

    try {
      auto rollouts = collect_batch(state.params, prompts, setup.rollout,
                                    derive_seed(setup.seed, "rollout",
                                                {static_cast<std::uint64_t>(state.step)}));
      std::vector<BatchGroup> batch;
      batch.reserve(rollouts.size());
      for (auto& g : rollouts) {
        const auto parts = assign_rewards(g, setup.length, setup.coef, length_active);
        const auto base = base_advantages(g.rewards);
        auto weighted = reweight_advantages(base, g.group_acc, stage.weight_variant, setup.w,
                                            length_active);

        auto& bs = rec.buckets.at(static_cast<std::size_t>(g.prompt.bucket));
        ++bs.groups;
        ++rec.group_acc_histogram[static_cast<std::size_t>(histogram_bin(g.group_acc))];
        for (std::size_t i = 0; i < parts.size(); ++i) {
          totals.reward += parts[i].total;
          totals.acc += parts[i].r_acc;
          totals.format += parts[i].r_format;
          totals.len += parts[i].r_len;
          totals.length += g.scores[i].reasoning_length;
          ++totals.responses;
          ++bs.responses;
          bs.mean_response_length += g.scores[i].reasoning_length;
          bs.accuracy += g.scores[i].acc ? 1.0 : 0.0;
        }
        batch.push_back({std::move(g), std::move(weighted.per_response)});
      }

      for (auto chunk : split_minibatches(batch, setup.optim.minibatches)) {
        const auto grad = surrogate_gradient(state.params, chunk, setup.ref_params, setup.optim);
        optimizer.step(state.params, grad);
      }
      if (!state.params.all_finite()) {
        throw NumericalError("non-finite parameters after update at step " +
                             std::to_string(state.step));
      }
    } catch (const NumericalError& e) {
      TrainState preserved = state;
      preserved.params = state.best_checkpoint ? state.best_checkpoint->params : before;
      throw StageAborted(std::string("stage ") + to_string(stage.name) + " aborted: " + e.what(),
                         std::move(preserved));
    }

    const double count = static_cast<double>(totals.responses);
    rec.mean_reward = totals.reward / count;
    rec.mean_acc_reward = totals.acc / count;
    rec.mean_format_reward = totals.format / count;
    rec.mean_len_reward = totals.len / count;
    rec.mean_response_length = totals.length / count;
    for (auto& bs : rec.buckets) {
      if (bs.responses > 0) {
        bs.mean_response_length /= bs.responses;
        bs.accuracy /= bs.responses;
      }
    }

    bool stop = false;
    if ((k + 1) % stage.validation_every == 0 || k + 1 == stage.step_budget) {
      Rng val_rng(derive_seed(setup.seed, "validation", {static_cast<std::uint64_t>(state.step)}));
      const double acc = evaluate_validation(state.params, setup.validation_set,
                                             setup.validation, val_rng);
      rec.validation_accuracy = acc;
      if (!state.best_checkpoint || acc > state.best_checkpoint->accuracy) {
        state.best_checkpoint = Checkpoint{state.params, acc, state.step};
        evals_without_gain = 0;
      } else {
        ++evals_without_gain;
        stop = setup.plateau_stop && evals_without_gain >= setup.plateau_patience;
      }
    }

    if (setup.record_wall_time) {
      rec.wall_time_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
    }
    state.metrics_log.push_back(std::move(rec));
    if (setup.on_record) setup.on_record(state.metrics_log.back());
    if (stop) break;
  }

  if (state.best_checkpoint) state.params = state.best_checkpoint->params;
  ++state.stage_index;
  return state;
}

}  // namespace pcurl
