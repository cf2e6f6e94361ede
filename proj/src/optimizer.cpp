#include "pcurl/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "pcurl/error.hpp"

namespace pcurl {

std::string to_string(KlEstimator kl) {
  return kl == KlEstimator::kExact ? "exact" : "k3";
}

KlEstimator parse_kl_estimator(const std::string& text) {
  if (text == "k3") return KlEstimator::kK3;
  if (text == "exact") return KlEstimator::kExact;
  throw ConfigError("unknown KL estimator: " + text);
}

void OptimConfig::validate() const {
  if (!(clip_eps > 0.0)) throw ConfigError("clip_eps must be > 0");
  if (!(kl_coef >= 0.0)) throw ConfigError("kl_coef must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (minibatches < 1) throw ConfigError("minibatches must be >= 1");
}

namespace {

[[noreturn]] void numeric_failure(const char* what, std::size_t g, std::size_t i,
                                  std::size_t t) {
  throw NumericalError(std::string("non-finite ") + what + " at group " +
                       std::to_string(g) + ", response " + std::to_string(i) +
                       ", token " + std::to_string(t));
}

// One pass over the batch. grad may be null.
double evaluate(const PolicyParams& params, std::span<const BatchGroup> groups,
                const PolicyParams& ref, const OptimConfig& cfg, Gradient* grad) {
  cfg.validate();
  if (!params.same_shape(ref)) throw InputError("reference params shape mismatch");
  if (groups.empty()) return 0.0;

  const auto vocab = static_cast<std::size_t>(params.vocab());
  std::vector<double> lp(vocab), ref_lp(vocab);
  const double lo = 1.0 - cfg.clip_eps;
  const double hi = 1.0 + cfg.clip_eps;
  const double per_group = 1.0 / static_cast<double>(groups.size());

  double objective = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& rollout = groups[g].rollout;
    const auto& adv = groups[g].advantages;
    const int bucket = rollout.prompt.bucket;
    if (adv.size() != rollout.responses.size()) {
      throw InputError("advantage count does not match group size");
    }
    const double per_response = per_group / static_cast<double>(rollout.responses.size());

    for (std::size_t i = 0; i < rollout.responses.size(); ++i) {
      const auto& y = rollout.responses[i];
      const auto& old = rollout.old_log_probs[i];
      if (y.empty() || old.size() != y.size()) {
        throw InputError("response/log-prob length mismatch");
      }
      const double c = per_response / static_cast<double>(y.size());
      const double a = adv[i];

      int cached = -1;
      for (std::size_t t = 0; t < y.size(); ++t) {
        const int pb = params.position_bucket(static_cast<int>(t));
        if (pb != cached) {
          log_softmax(params.row(bucket, pb), 1.0, lp);
          log_softmax(ref.row(bucket, pb), 1.0, ref_lp);
          cached = pb;
        }
        const auto tok = static_cast<std::size_t>(y[t]);
        const double logp = lp[tok];
        const double ratio = std::exp(logp - old[t]);
        if (!std::isfinite(ratio)) numeric_failure("ratio", g, i, t);

        const double unclipped = ratio * a;
        const double clipped = std::clamp(ratio, lo, hi) * a;
        const bool clip_selected = clipped < unclipped;
        const double surrogate = clip_selected ? clipped : unclipped;
        // d(term)/d(logp) of the sampled token.
        double dlogp = clip_selected ? 0.0 : unclipped;

        double kl = 0.0;
        if (cfg.kl_coef > 0.0) {
          if (cfg.kl == KlEstimator::kK3) {
            const double d = ref_lp[tok] - logp;
            kl = std::exp(d) - d - 1.0;
            dlogp -= cfg.kl_coef * (1.0 - std::exp(d));
          } else {
            for (std::size_t k = 0; k < vocab; ++k) {
              kl += std::exp(lp[k]) * (lp[k] - ref_lp[k]);
            }
          }
          if (!std::isfinite(kl)) numeric_failure("KL term", g, i, t);
        }
        objective += c * (surrogate - cfg.kl_coef * kl);

        if (grad != nullptr) {
          auto row = grad->row(bucket, pb);
          for (std::size_t k = 0; k < vocab; ++k) {
            const double p = std::exp(lp[k]);
            double dz = dlogp * ((k == tok ? 1.0 : 0.0) - p);
            if (cfg.kl == KlEstimator::kExact && cfg.kl_coef > 0.0) {
              dz -= cfg.kl_coef * p * ((lp[k] - ref_lp[k]) - kl);
            }
            row[k] += c * dz;
          }
        }
      }
    }
  }
  if (!std::isfinite(objective)) throw NumericalError("non-finite objective");
  return objective;
}

}  // namespace

double surrogate_objective(const PolicyParams& params, std::span<const BatchGroup> groups,
                           const PolicyParams& ref, const OptimConfig& cfg) {
  return evaluate(params, groups, ref, cfg, nullptr);
}

double surrogate_objective(const PolicyParams& params, const OptimBatch& batch,
                           const OptimConfig& cfg) {
  return evaluate(params, batch.groups, batch.ref_params, cfg, nullptr);
}

Gradient surrogate_gradient(const PolicyParams& params, std::span<const BatchGroup> groups,
                            const PolicyParams& ref, const OptimConfig& cfg,
                            double* objective) {
  Gradient grad(params.buckets(), params.t_cap(), params.vocab());
  const double value = evaluate(params, groups, ref, cfg, &grad);
  if (objective != nullptr) *objective = value;
  return grad;
}

Gradient surrogate_gradient(const PolicyParams& params, const OptimBatch& batch,
                            const OptimConfig& cfg) {
  return surrogate_gradient(params, batch.groups, batch.ref_params, cfg);
}

PolicyParams update_step(const PolicyParams& params, const Gradient& gradient,
                         const OptimConfig& cfg) {
  if (!params.same_shape(gradient)) throw InputError("gradient shape mismatch");
  PolicyParams out = params;
  auto p = out.data();
  const auto g = gradient.data();
  for (std::size_t k = 0; k < p.size(); ++k) p[k] += cfg.learning_rate * g[k];
  return out;
}

void Optimizer::step(PolicyParams& params, const Gradient& gradient) {
  if (!params.same_shape(gradient)) throw InputError("gradient shape mismatch");
  if (!cfg_.adaptive_moments) {
    params = update_step(params, gradient, cfg_);
    ++t_;
    return;
  }
  auto p = params.data();
  const auto g = gradient.data();
  if (m_.size() != p.size()) {
    m_.assign(p.size(), 0.0);
    v_.assign(p.size(), 0.0);
    t_ = 0;
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < p.size(); ++k) {
    m_[k] = cfg_.beta1 * m_[k] + (1.0 - cfg_.beta1) * g[k];
    v_[k] = cfg_.beta2 * v_[k] + (1.0 - cfg_.beta2) * g[k] * g[k];
    const double m_hat = m_[k] / bc1;
    const double v_hat = v_[k] / bc2;
    p[k] += cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.adam_eps);
  }
}

void Optimizer::reset() {
  m_.clear();
  v_.clear();
  t_ = 0;
}

}  // namespace pcurl
