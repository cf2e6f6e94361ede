#include "pcurl/odsw.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "pcurl/error.hpp"

namespace pcurl {

WeightVariant WeightVariant::binary(double t_min, double t_max) {
  if (!(0.0 <= t_min && t_min <= t_max && t_max <= 1.0)) {
    throw ConfigError("binary band needs 0 <= t_min <= t_max <= 1");
  }
  return {Kind::kBinary, t_min, t_max};
}

WeightVariant WeightVariant::parse(const std::string& text) {
  if (text == "easy") return easy();
  if (text == "medium") return medium();
  if (text == "hard") return hard();
  if (text == "none") return none();
  if (text.rfind("binary(", 0) == 0 && text.back() == ')') {
    const std::string inner = text.substr(7, text.size() - 8);
    const auto comma = inner.find(',');
    if (comma == std::string::npos) throw ConfigError("binary needs (t_min,t_max)");
    try {
      return binary(std::stod(inner.substr(0, comma)), std::stod(inner.substr(comma + 1)));
    } catch (const std::logic_error&) {
      throw ConfigError("bad binary band: " + text);
    }
  }
  throw ConfigError("unknown weight variant: " + text);
}

std::string WeightVariant::to_string() const {
  switch (kind) {
    case Kind::kEasy:
      return "easy";
    case Kind::kMedium:
      return "medium";
    case Kind::kHard:
      return "hard";
    case Kind::kNone:
      return "none";
    case Kind::kBinary: {
      std::ostringstream os;
      os.precision(17);
      os << "binary(" << t_min << "," << t_max << ")";
      return os.str();
    }
  }
  return "none";
}

double weight(const WeightVariant& variant, double acc) {
  if (!(acc >= 0.0 && acc <= 1.0)) throw InputError("accuracy outside [0,1]");
  const double s = std::sin(std::numbers::pi * acc);
  switch (variant.kind) {
    case WeightVariant::Kind::kEasy:
      return acc < 0.5 ? s : 1.0;
    case WeightVariant::Kind::kMedium:
      return s;
    case WeightVariant::Kind::kHard:
      return acc <= 0.5 ? 1.0 : s;
    case WeightVariant::Kind::kBinary:
      return variant.t_min <= acc && acc <= variant.t_max ? 1.0 : 0.0;
    case WeightVariant::Kind::kNone:
      return 1.0;
  }
  return 1.0;
}

WeightedAdvantageSet reweight_advantages(const AdvantageSet& base, double group_acc,
                                         const WeightVariant& variant, double w,
                                         bool dylr_active) {
  if (!(w > 0.0 && w <= 1.0)) throw ConfigError("w must lie in (0,1]");
  WeightedAdvantageSet out;
  out.weight = weight(variant, group_acc);
  out.zero_acc_damp_applied = dylr_active && group_acc == 0.0;
  const double factor = out.weight * (out.zero_acc_damp_applied ? w : 1.0);
  out.per_response.reserve(base.per_response.size());
  for (double a : base.per_response) out.per_response.push_back(factor * a);
  return out;
}

}  // namespace pcurl
