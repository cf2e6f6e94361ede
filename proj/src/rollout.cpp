#include "pcurl/rollout.hpp"

#include <cmath>
#include <thread>

#include "pcurl/error.hpp"

namespace pcurl {

RolloutGroup collect_group(const PolicyParams& params, const PromptSpec& prompt,
                           int group_size, double temperature, int max_len, Rng& rng) {
  if (group_size < 2) throw InputError("group size must be >= 2");
  const Vocabulary vocab(params.vocab() - 2);

  RolloutGroup g;
  g.prompt = prompt;
  g.responses.reserve(static_cast<std::size_t>(group_size));
  int correct = 0;
  for (int i = 0; i < group_size; ++i) {
    g.responses.push_back(sample_response(params, prompt, temperature, max_len, rng));
    const auto& y = g.responses.back();
    g.old_log_probs.push_back(policy_log_prob(params, prompt, y).per_token);
    g.scores.push_back(score_response(prompt, y, max_len, vocab));
    correct += g.scores.back().acc ? 1 : 0;
  }
  g.group_acc = static_cast<double>(correct) / group_size;
  return g;
}

std::vector<RolloutGroup> collect_batch(const PolicyParams& params,
                                        std::span<const PromptSpec> prompts,
                                        const RolloutSettings& settings,
                                        std::uint64_t seed) {
  std::vector<RolloutGroup> out(prompts.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t k = first; k < prompts.size(); k += stride) {
      Rng rng(derive_seed(seed, "group", {k}));
      out[k] = collect_group(params, prompts[k], settings.group_size,
                             settings.temperature, settings.max_len, rng);
    }
  };

  const auto workers = static_cast<std::size_t>(std::max(1, settings.workers));
  if (workers == 1 || prompts.size() < 2) {
    work(0, 1);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        work(w, workers);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

AdvantageSet base_advantages(std::span<const double> rewards) {
  if (rewards.size() < 2) throw InputError("advantages need a group of >= 2");
  double mean = 0.0;
  for (double r : rewards) {
    if (!std::isfinite(r)) throw InputError("non-finite reward");
    mean += r;
  }
  mean /= static_cast<double>(rewards.size());
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / static_cast<double>(rewards.size()));

  AdvantageSet a;
  a.per_response.assign(rewards.size(), 0.0);
  if (sd < 1e-8) return a;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    a.per_response[i] = (rewards[i] - mean) / sd;
  }
  return a;
}

AdvantageSet base_advantages(const RolloutGroup& group) {
  if (!group.rewarded()) throw StateError("group has no rewards");
  AdvantageSet a = base_advantages(group.rewards);
  a.per_token.reserve(group.responses.size());
  for (std::size_t i = 0; i < group.responses.size(); ++i) {
    a.per_token.emplace_back(group.responses[i].size(), a.per_response[i]);
  }
  return a;
}

}  // namespace pcurl
