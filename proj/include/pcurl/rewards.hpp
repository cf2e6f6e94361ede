#ifndef PCURL_REWARDS_HPP_
#define PCURL_REWARDS_HPP_

#include <string>
#include <vector>

#include "pcurl/env.hpp"
#include "pcurl/rollout.hpp"

namespace pcurl {

enum class LengthMode { kDynamic, kFixed, kOff };

std::string to_string(LengthMode mode);
LengthMode parse_length_mode(const std::string& text);

struct LengthRewardConfig {
  double r_len_min = -1.0;
  double r_len_max = 0.0;
  int l_max = 500;  // preset maximum target length
  LengthMode mode = LengthMode::kDynamic;

  void validate() const;
  bool operator==(const LengthRewardConfig&) const = default;
};

struct RewardCoefficients {
  double alpha = 1.0;  // accuracy
  double beta = 0.5;   // format
  double gamma = 1.0;  // length

  bool operator==(const RewardCoefficients&) const = default;
};

struct RewardBreakdown {
  double r_acc = 0.0;
  double r_format = 0.0;
  double r_len = 0.0;
  double total = 0.0;
};

// Cosine ramp from r_min at L = 0 to r_max at L = target, flat beyond target.
double cos_fn(int length, int target, double r_min, double r_max);

// Per-response length reward whose target is the mean reasoning length of
// the group's correct responses, or cfg.l_max when none is correct.
std::vector<double> dynamic_length_reward(const RolloutGroup& group,
                                          const LengthRewardConfig& cfg);

// Target is always cfg.l_max, whatever the group accuracy.
double fixed_length_reward(int length, const LengthRewardConfig& cfg);

// Dispatches on cfg.mode; kOff yields zeros.
std::vector<double> length_rewards(const RolloutGroup& group,
                                   const LengthRewardConfig& cfg);

RewardBreakdown composite_reward(const ScoreResult& score, double r_len,
                                 const RewardCoefficients& coef);

// r = r_acc + r_format.
RewardBreakdown rlvr_reward(const ScoreResult& score);

// Fills group.rewards with composite totals and returns the breakdowns.
// With length_active false the length term is zero.
std::vector<RewardBreakdown> assign_rewards(RolloutGroup& group,
                                            const LengthRewardConfig& cfg,
                                            const RewardCoefficients& coef,
                                            bool length_active);

}  // namespace pcurl

#endif  // PCURL_REWARDS_HPP_
