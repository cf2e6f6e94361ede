#ifndef PCURL_OPTIMIZER_HPP_
#define PCURL_OPTIMIZER_HPP_

#include <span>
#include <string>
#include <vector>

#include "pcurl/env.hpp"
#include "pcurl/odsw.hpp"
#include "pcurl/rollout.hpp"

namespace pcurl {

enum class KlEstimator {
  kK3,     // exp(ref - cur) - (ref - cur) - 1 on the sampled token
  kExact,  // full categorical KL(cur || ref) at each visited position
};

std::string to_string(KlEstimator kl);
KlEstimator parse_kl_estimator(const std::string& text);

struct OptimConfig {
  double clip_eps = 0.2;
  double kl_coef = 1e-3;
  double learning_rate = 5e-2;
  bool adaptive_moments = false;
  KlEstimator kl = KlEstimator::kK3;
  // Optimizer updates per rollout batch; groups are split evenly.
  int minibatches = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
  bool operator==(const OptimConfig&) const = default;
};

// A rollout group together with its (weighted) advantages.
struct BatchGroup {
  RolloutGroup rollout;
  std::vector<double> advantages;
};

struct OptimBatch {
  std::vector<BatchGroup> groups;
  PolicyParams old_params;  // params the groups were sampled with
  PolicyParams ref_params;  // KL anchor
};

// Same shape as the logits table.
using Gradient = PolicyParams;

double surrogate_objective(const PolicyParams& params, std::span<const BatchGroup> groups,
                           const PolicyParams& ref, const OptimConfig& cfg);
double surrogate_objective(const PolicyParams& params, const OptimBatch& batch,
                           const OptimConfig& cfg);

// Analytic gradient of surrogate_objective. If objective is non-null it
// receives the objective value from the same pass.
Gradient surrogate_gradient(const PolicyParams& params, std::span<const BatchGroup> groups,
                            const PolicyParams& ref, const OptimConfig& cfg,
                            double* objective = nullptr);
Gradient surrogate_gradient(const PolicyParams& params, const OptimBatch& batch,
                            const OptimConfig& cfg);

// Plain gradient ascent: params + lr * gradient.
PolicyParams update_step(const PolicyParams& params, const Gradient& gradient,
                         const OptimConfig& cfg);

// Stateful ascent. With adaptive_moments it keeps bias-corrected first and
// second moment estimates; otherwise it is update_step.
class Optimizer {
 public:
  explicit Optimizer(OptimConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

  void step(PolicyParams& params, const Gradient& gradient);
  void reset();
  long steps() const { return t_; }
  const OptimConfig& config() const { return cfg_; }

 private:
  OptimConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
};

}  // namespace pcurl

#endif  // PCURL_OPTIMIZER_HPP_
