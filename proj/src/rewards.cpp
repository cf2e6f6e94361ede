#include "pcurl/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pcurl/error.hpp"

namespace pcurl {

std::string to_string(LengthMode mode) {
  switch (mode) {
    case LengthMode::kDynamic:
      return "dynamic";
    case LengthMode::kFixed:
      return "fixed";
    case LengthMode::kOff:
      return "off";
  }
  return "off";
}

LengthMode parse_length_mode(const std::string& text) {
  if (text == "dynamic") return LengthMode::kDynamic;
  if (text == "fixed") return LengthMode::kFixed;
  if (text == "off") return LengthMode::kOff;
  throw ConfigError("unknown length reward mode: " + text);
}

void LengthRewardConfig::validate() const {
  if (!(r_len_min <= r_len_max)) throw ConfigError("r_len_min must be <= r_len_max");
  if (l_max < 1) throw ConfigError("l_max must be >= 1");
}

double cos_fn(int length, int target, double r_min, double r_max) {
  if (target < 1) throw ConfigError("length target must be >= 1");
  if (!(r_min <= r_max)) throw ConfigError("r_min must be <= r_max");
  if (length < 0) throw InputError("length must be >= 0");
  const double x = static_cast<double>(std::min(length, target)) / target;
  return r_min + 0.5 * (r_max - r_min) * (1.0 - std::cos(std::numbers::pi * x));
}

std::vector<double> dynamic_length_reward(const RolloutGroup& group,
                                          const LengthRewardConfig& cfg) {
  if (cfg.mode != LengthMode::kDynamic) {
    throw ConfigError("dynamic_length_reward needs mode = dynamic");
  }
  if (!group.scored()) throw StateError("group is not scored");

  long correct_len = 0;
  int correct = 0;
  for (const auto& s : group.scores) {
    if (s.acc) {
      correct_len += s.reasoning_length;
      ++correct;
    }
  }
  int target = cfg.l_max;
  if (correct > 0) {
    const double mean = static_cast<double>(correct_len) / correct;
    target = std::max(1, static_cast<int>(std::lround(mean)));
  }

  std::vector<double> out;
  out.reserve(group.scores.size());
  for (const auto& s : group.scores) {
    out.push_back(cos_fn(s.reasoning_length, target, cfg.r_len_min, cfg.r_len_max));
  }
  return out;
}

double fixed_length_reward(int length, const LengthRewardConfig& cfg) {
  return cos_fn(length, cfg.l_max, cfg.r_len_min, cfg.r_len_max);
}

std::vector<double> length_rewards(const RolloutGroup& group,
                                   const LengthRewardConfig& cfg) {
  if (!group.scored()) throw StateError("group is not scored");
  switch (cfg.mode) {
    case LengthMode::kDynamic:
      return dynamic_length_reward(group, cfg);
    case LengthMode::kFixed: {
      std::vector<double> out;
      for (const auto& s : group.scores) {
        out.push_back(fixed_length_reward(s.reasoning_length, cfg));
      }
      return out;
    }
    case LengthMode::kOff:
      break;
  }
  return std::vector<double>(group.scores.size(), 0.0);
}

RewardBreakdown composite_reward(const ScoreResult& score, double r_len,
                                 const RewardCoefficients& coef) {
  RewardBreakdown r;
  r.r_acc = score.acc ? 1.0 : 0.0;
  r.r_format = score.format_ok ? 1.0 : 0.0;
  r.r_len = r_len;
  r.total = coef.alpha * r.r_acc + coef.beta * r.r_format + coef.gamma * r.r_len;
  return r;
}

RewardBreakdown rlvr_reward(const ScoreResult& score) {
  return composite_reward(score, 0.0, {1.0, 1.0, 0.0});
}

std::vector<RewardBreakdown> assign_rewards(RolloutGroup& group,
                                            const LengthRewardConfig& cfg,
                                            const RewardCoefficients& coef,
                                            bool length_active) {
  if (!group.scored()) throw StateError("group is not scored");
  std::vector<double> r_len(group.scores.size(), 0.0);
  if (length_active) r_len = length_rewards(group, cfg);

  std::vector<RewardBreakdown> out;
  out.reserve(group.scores.size());
  group.rewards.clear();
  for (std::size_t i = 0; i < group.scores.size(); ++i) {
    out.push_back(composite_reward(group.scores[i], r_len[i], coef));
    group.rewards.push_back(out.back().total);
  }
  return out;
}

}  // namespace pcurl
