#ifndef PCURL_SELFCHECK_HPP_
#define PCURL_SELFCHECK_HPP_

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "pcurl/optimizer.hpp"

namespace pcurl {

// Small random surrogate instance: random current/old/reference logits,
// random token sequences and advantages.
struct GradientInstance {
  PolicyParams params;
  PolicyParams ref;
  std::vector<BatchGroup> groups;
  OptimConfig cfg;
};

struct InstanceShape {
  int buckets = 2;
  int t_cap = 2;
  int vocab = 6;
  int groups = 1;
  int group_size = 4;
  int max_tokens = 5;
  double old_spread = 0.4;  // scale of the current-vs-old logit gap
};

GradientInstance random_instance(std::uint64_t seed, const InstanceShape& shape = {});

// Largest elementwise |analytic - fd| / max(|analytic|, |fd|, 1e-6) with
// central differences of step h.
double max_fd_relative_error(const GradientInstance& inst, double h = 1e-5);

// Fraction of sampled tokens whose min() picks the clipped term.
double clipped_fraction(const GradientInstance& inst);

// Runs the formula point checks and the finite-difference gradient checks,
// printing one line per check. Returns true when all pass.
bool run_selfcheck(std::ostream& os, int gradient_seeds = 20);

}  // namespace pcurl

#endif  // PCURL_SELFCHECK_HPP_
