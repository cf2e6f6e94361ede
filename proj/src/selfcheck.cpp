#include "pcurl/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "pcurl/odsw.hpp"
#include "pcurl/rewards.hpp"

namespace pcurl {

GradientInstance random_instance(std::uint64_t seed, const InstanceShape& shape) {
  Rng rng(seed);
  auto normal = [&] {
    // Box-Muller on the raw uniform stream.
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  };

  GradientInstance inst;
  inst.params = PolicyParams(shape.buckets, shape.t_cap, shape.vocab);
  for (double& z : inst.params.data()) z = normal();
  PolicyParams old = inst.params;
  for (double& z : old.data()) z += shape.old_spread * normal();
  inst.ref = inst.params;
  for (double& z : inst.ref.data()) z += 0.5 * normal();

  for (int g = 0; g < shape.groups; ++g) {
    BatchGroup bg;
    bg.rollout.prompt.bucket = static_cast<int>(rng.below(static_cast<std::uint64_t>(shape.buckets)));
    for (int i = 0; i < shape.group_size; ++i) {
      const int len = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(shape.max_tokens)));
      TokenSeq y;
      for (int t = 0; t < len; ++t) {
        y.push_back(static_cast<Token>(rng.below(static_cast<std::uint64_t>(shape.vocab))));
      }
      bg.rollout.old_log_probs.push_back(policy_log_prob(old, bg.rollout.prompt, y).per_token);
      bg.rollout.responses.push_back(std::move(y));
      bg.advantages.push_back(normal());
    }
    inst.groups.push_back(std::move(bg));
  }
  inst.cfg.clip_eps = 0.2;
  inst.cfg.kl_coef = 0.1;
  return inst;
}

double max_fd_relative_error(const GradientInstance& inst, double h) {
  const auto grad = surrogate_gradient(inst.params, inst.groups, inst.ref, inst.cfg);
  PolicyParams probe = inst.params;
  double worst = 0.0;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    const double saved = probe.data()[k];
    probe.data()[k] = saved + h;
    const double up = surrogate_objective(probe, inst.groups, inst.ref, inst.cfg);
    probe.data()[k] = saved - h;
    const double down = surrogate_objective(probe, inst.groups, inst.ref, inst.cfg);
    probe.data()[k] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double a = grad.data()[k];
    worst = std::max(worst, std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6}));
  }
  return worst;
}

double clipped_fraction(const GradientInstance& inst) {
  long clipped = 0, total = 0;
  std::vector<double> lp(static_cast<std::size_t>(inst.params.vocab()));
  for (const auto& g : inst.groups) {
    for (std::size_t i = 0; i < g.rollout.responses.size(); ++i) {
      const auto cur = policy_log_prob(inst.params, g.rollout.prompt, g.rollout.responses[i]);
      for (std::size_t t = 0; t < cur.per_token.size(); ++t) {
        const double ratio = std::exp(cur.per_token[t] - g.rollout.old_log_probs[i][t]);
        const double a = g.advantages[i];
        const double c = std::clamp(ratio, 1.0 - inst.cfg.clip_eps, 1.0 + inst.cfg.clip_eps);
        clipped += c * a < ratio * a ? 1 : 0;
        ++total;
      }
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(clipped) / total;
}

bool run_selfcheck(std::ostream& os, int gradient_seeds) {
  bool all = true;
  auto check = [&](const char* name, bool ok) {
    os << (ok ? "PASS " : "FAIL ") << name << '\n';
    all = all && ok;
  };
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9; };

  check("cos_fn(0) = r_min", near(cos_fn(0, 500, -1.0, 0.0), -1.0));
  check("cos_fn(L_tgt) = r_max", near(cos_fn(500, 500, -1.0, 0.0), 0.0));
  check("cos_fn(L_tgt/2) = midpoint", near(cos_fn(250, 500, -1.0, 0.0), -0.5));
  check("cos_fn saturates past target", near(cos_fn(750, 500, -1.0, 0.0), 0.0));
  check("easy(1) = 1", near(weight(WeightVariant::easy(), 1.0), 1.0));
  check("medium(0.5) = 1", near(weight(WeightVariant::medium(), 0.5), 1.0));
  check("medium(1) = 0", near(weight(WeightVariant::medium(), 1.0), 0.0));
  check("hard(0) = 1", near(weight(WeightVariant::hard(), 0.0), 1.0));
  check("hard(1) = 0", near(weight(WeightVariant::hard(), 1.0), 0.0));
  check("all variants = 1 at 0.5",
        near(weight(WeightVariant::easy(), 0.5), 1.0) &&
            near(weight(WeightVariant::hard(), 0.5), 1.0));
  ScoreResult good{true, true, 10};
  check("composite reward = 1.5 when correct, formatted, at target",
        near(composite_reward(good, 0.0, {}).total, 1.5));
  const auto adv = base_advantages(std::vector<double>{1, 0, 0, 1}).per_response;
  check("advantages of [1,0,0,1] = [1,-1,-1,1]",
        near(adv[0], 1) && near(adv[1], -1) && near(adv[2], -1) && near(adv[3], 1));

  double worst = 0.0;
  for (int s = 0; s < gradient_seeds; ++s) {
    worst = std::max(worst, max_fd_relative_error(random_instance(static_cast<std::uint64_t>(s))));
  }
  os << "     max finite-difference relative error over " << gradient_seeds
     << " instances: " << worst << '\n';
  check("surrogate gradient matches central differences (<= 1e-4)", worst <= 1e-4);
  return all;
}

}  // namespace pcurl
