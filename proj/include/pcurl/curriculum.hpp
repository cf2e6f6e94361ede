#ifndef PCURL_CURRICULUM_HPP_
#define PCURL_CURRICULUM_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pcurl/env.hpp"
#include "pcurl/error.hpp"
#include "pcurl/metrics.hpp"
#include "pcurl/odsw.hpp"
#include "pcurl/optimizer.hpp"
#include "pcurl/rewards.hpp"
#include "pcurl/rollout.hpp"

// Progressive easy -> medium -> hard curriculum: stage configs, the one-off
// difficulty filter, validation and best-checkpoint selection.

namespace pcurl {

enum class StageName { kEasy, kMedium, kHard, kSingle };

std::string to_string(StageName name);
StageName parse_stage_name(const std::string& text);

struct StageConfig {
  StageName name = StageName::kEasy;
  WeightVariant weight_variant;
  bool dylr = false;
  int step_budget = 1;
  int validation_every = 5;
  std::uint64_t shuffle_seed = 0;
  // Lets the length reward run outside the hard stage (ablations).
  bool allow_dylr_any_stage = false;

  // Throws ConfigError on a zero budget/cadence or a misplaced dylr flag.
  void validate() const;
  bool operator==(const StageConfig&) const = default;
};

enum class Preset { kPcurl, kVanilla, kOdswOnly, kDylrOnly };
enum class Scale { kDesk, kPaperRatio };

std::string to_string(Preset p);
Preset parse_preset(const std::string& text);
std::string to_string(Scale s);
Scale parse_scale(const std::string& text);

struct CurriculumPlan {
  std::vector<StageConfig> stages;
  // Shared by every stage; each stage shuffles its own order.
  std::vector<PromptSpec> dataset;
  std::vector<PromptSpec> validation_set;

  int total_steps() const;
};

// Stage layout for a preset. Data is attached separately.
CurriculumPlan plan_default(Preset preset, Scale scale);

// Splits prompts into a training part and a disjoint validation part of
// validation_size prompts, chosen by a seeded shuffle.
void split_validation(std::vector<PromptSpec> prompts, int validation_size,
                      std::uint64_t seed, CurriculumPlan& plan);

// Visiting order of a stage over a dataset of n prompts: a permutation of
// 0..n-1 drawn from the stage's shuffle stream.
std::vector<std::size_t> stage_order(std::size_t n, std::uint64_t seed,
                                     std::uint64_t shuffle_seed);

struct FilterRow {
  std::string dataset;
  int total = 0;
  int kept = 0;
  double filter_rate() const {
    return total == 0 ? 0.0 : static_cast<double>(total - kept) / total;
  }
};

struct FilterReport {
  std::vector<FilterRow> rows;  // one per difficulty bucket
  FilterRow overall;
  std::vector<int> correct_counts;  // per input prompt, same order

  // "dataset,data_size,filter_rate" with the rate in percent.
  std::string to_table() const;
};

struct FilterResult {
  std::vector<PromptSpec> kept;
  FilterReport report;
};

// One rollout trial for a prompt; returns whether it was correct.
using TrialFn = std::function<bool(const PromptSpec&, Rng&)>;

// Keeps a prompt iff correct/trials <= threshold.
FilterResult difficulty_filter(const std::vector<PromptSpec>& prompts, const TrialFn& trial,
                               int trials, double threshold, Rng& rng);
FilterResult difficulty_filter(const std::vector<PromptSpec>& prompts,
                               const PolicyParams& params, int trials, double threshold,
                               Rng& rng, double temperature = 1.0, int max_len = 64);

struct ValidationSettings {
  int g_eval = 1;
  bool greedy = false;
  double temperature = 1.0;
  int max_len = 64;
};

double evaluate_validation(const PolicyParams& params,
                           const std::vector<PromptSpec>& validation_set,
                           const ValidationSettings& settings, Rng& rng);

// Per-bucket mean reasoning length and accuracy of the policy on a prompt set.
std::vector<BucketStats> bucket_summary(const PolicyParams& params,
                                        const std::vector<PromptSpec>& prompts,
                                        int buckets, const ValidationSettings& settings,
                                        Rng& rng);

struct Checkpoint {
  PolicyParams params;
  double accuracy = 0.0;
  long step = 0;
};

struct TrainState {
  PolicyParams params;
  long step = 0;
  int stage_index = 0;
  std::optional<Checkpoint> best_checkpoint;
  std::vector<MetricsRecord> metrics_log;
};

// Everything a stage needs besides its own StageConfig.
struct TrainingSetup {
  RolloutSettings rollout;
  int prompts_per_step = 32;
  LengthRewardConfig length;
  RewardCoefficients coef;
  double w = 0.25;
  OptimConfig optim;
  ValidationSettings validation;
  PolicyParams ref_params;
  std::vector<PromptSpec> dataset;
  std::vector<PromptSpec> validation_set;
  bool plateau_stop = false;
  int plateau_patience = 3;
  bool record_wall_time = false;
  std::uint64_t seed = 0;
  // Called after each metrics record is appended.
  std::function<void(const MetricsRecord&)> on_record;
};

// Thrown when a numerical failure aborts a stage. state() holds the stage's
// last good checkpoint (or the pre-failure params when none exists yet).
class StageAborted : public NumericalError {
 public:
  StageAborted(const std::string& what, TrainState state)
      : NumericalError(what), state_(std::move(state)) {}
  const TrainState& state() const { return state_; }

 private:
  TrainState state_;
};

// Runs stage.step_budget steps and returns the state whose params are the
// stage's best validation checkpoint.
TrainState run_stage(TrainState state, const StageConfig& stage, const TrainingSetup& setup);

}  // namespace pcurl

#endif  // PCURL_CURRICULUM_HPP_
