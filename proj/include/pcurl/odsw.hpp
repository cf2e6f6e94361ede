#ifndef PCURL_ODSW_HPP_
#define PCURL_ODSW_HPP_

#include <string>
#include <vector>

#include "pcurl/rollout.hpp"

// Online difficulty soft weighting: each prompt's advantages are scaled by
// F(group accuracy), where F favors the accuracy band a curriculum stage
// targets.

namespace pcurl {

struct WeightVariant {
  enum class Kind { kEasy, kMedium, kHard, kBinary, kNone };

  Kind kind = Kind::kNone;
  double t_min = 0.0;  // Binary band, both ends inclusive
  double t_max = 1.0;

  static WeightVariant easy() { return {Kind::kEasy}; }
  static WeightVariant medium() { return {Kind::kMedium}; }
  static WeightVariant hard() { return {Kind::kHard}; }
  static WeightVariant none() { return {Kind::kNone}; }
  // Throws ConfigError unless 0 <= t_min <= t_max <= 1.
  static WeightVariant binary(double t_min, double t_max);

  // "easy", "medium", "hard", "none", "binary(lo,hi)".
  static WeightVariant parse(const std::string& text);
  std::string to_string() const;
  bool operator==(const WeightVariant&) const = default;
};

double weight(const WeightVariant& variant, double acc);

struct WeightedAdvantageSet {
  std::vector<double> per_response;
  double weight = 1.0;
  bool zero_acc_damp_applied = false;
};

// per_response = F(acc) * (w if dylr_active and acc == 0 else 1) * base.
WeightedAdvantageSet reweight_advantages(const AdvantageSet& base, double group_acc,
                                         const WeightVariant& variant, double w,
                                         bool dylr_active);

}  // namespace pcurl

#endif  // PCURL_ODSW_HPP_
