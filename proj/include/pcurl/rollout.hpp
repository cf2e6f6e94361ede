#ifndef PCURL_ROLLOUT_HPP_
#define PCURL_ROLLOUT_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "pcurl/env.hpp"

namespace pcurl {

// G responses sampled for one prompt under the behavior policy.
struct RolloutGroup {
  PromptSpec prompt;
  std::vector<TokenSeq> responses;
  // Per-token log-probs under the sampling-time params, one vector per response.
  std::vector<std::vector<double>> old_log_probs;
  std::vector<ScoreResult> scores;
  // Filled by the reward stage; empty until then.
  std::vector<double> rewards;
  double group_acc = 0.0;

  int size() const { return static_cast<int>(responses.size()); }
  bool scored() const { return !scores.empty() && scores.size() == responses.size(); }
  bool rewarded() const { return rewards.size() == responses.size() && !rewards.empty(); }
};

struct AdvantageSet {
  std::vector<double> per_response;
  // per_token[i] has |y_i| copies of per_response[i]; empty when built from
  // bare rewards.
  std::vector<std::vector<double>> per_token;
};

// Samples G responses, records behavior log-probs and scores them.
RolloutGroup collect_group(const PolicyParams& params, const PromptSpec& prompt,
                           int group_size, double temperature, int max_len, Rng& rng);

struct RolloutSettings {
  int group_size = 16;
  double temperature = 1.0;
  int max_len = 64;
  int workers = 1;
};

// One group per prompt. Group k draws from derive_seed(seed, "group", {k}),
// so the result does not depend on the worker count.
std::vector<RolloutGroup> collect_batch(const PolicyParams& params,
                                        std::span<const PromptSpec> prompts,
                                        const RolloutSettings& settings,
                                        std::uint64_t seed);

// Group-relative advantages: (r - mean) / population std, all zero when the
// std is below 1e-8.
AdvantageSet base_advantages(std::span<const double> rewards);
// Same, with per-token broadcast over each response's length.
AdvantageSet base_advantages(const RolloutGroup& group);

}  // namespace pcurl

#endif  // PCURL_ROLLOUT_HPP_
