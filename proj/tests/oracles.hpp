#ifndef PCURL_TESTS_ORACLES_HPP_
#define PCURL_TESTS_ORACLES_HPP_

// Reference computations written independently of the library code, used
// as ground truth by the unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace oracle {

// Naive log-softmax: log(exp(x_v) / sum exp(x_u)) with the max subtracted
// only for range safety.
inline double log_softmax_at(const std::vector<double>& logits, int v) {
  double m = logits[0];
  for (double x : logits) m = x > m ? x : m;
  long double z = 0.0L;
  for (double x : logits) z += std::exp(static_cast<long double>(x - m));
  return static_cast<double>(static_cast<long double>(logits[static_cast<std::size_t>(v)] - m) -
                             std::log(z));
}

struct MeanStd {
  double mean;
  double std;
};

// Two-pass mean and population standard deviation in long double.
inline MeanStd mean_pop_std(const std::vector<double>& r) {
  long double s = 0.0L;
  for (double x : r) s += x;
  const long double mean = s / static_cast<long double>(r.size());
  long double ss = 0.0L;
  for (double x : r) ss += (x - mean) * (x - mean);
  return {static_cast<double>(mean),
          static_cast<double>(std::sqrt(ss / static_cast<long double>(r.size())))};
}

inline std::vector<double> advantages(const std::vector<double>& r) {
  const auto ms = mean_pop_std(r);
  std::vector<double> a(r.size(), 0.0);
  if (ms.std < 1e-8) return a;
  for (std::size_t i = 0; i < r.size(); ++i) a[i] = (r[i] - ms.mean) / ms.std;
  return a;
}

inline double binomial_pmf(int n, int k, double p) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c * std::pow(p, k) * std::pow(1.0 - p, n - k);
}

// P(X > k) for X ~ Binomial(n, p).
inline double binomial_upper_tail(int n, int k, double p) {
  double t = 0.0;
  for (int j = k + 1; j <= n; ++j) t += binomial_pmf(n, j, p);
  return t;
}

// Raised-cosine ramp written from its closed form.
inline double cosine_ramp(double L, double target, double lo, double hi) {
  const double x = L < target ? L : target;
  return lo + 0.5 * (hi - lo) * (1.0 - std::cos(std::numbers::pi * x / target));
}

// Adam with bias correction, ascent direction, from explicit state.
struct Adam {
  double b1 = 0.9, b2 = 0.999, eps = 1e-8, lr = 0.01;
  std::vector<double> m, v;
  int t = 0;

  void step(std::vector<double>& x, const std::vector<double>& g) {
    if (m.empty()) {
      m.assign(x.size(), 0.0);
      v.assign(x.size(), 0.0);
    }
    ++t;
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double mh = m[i] / (1.0 - std::pow(b1, t));
      const double vh = v[i] / (1.0 - std::pow(b2, t));
      x[i] += lr * mh / (std::sqrt(vh) + eps);
    }
  }
};

// Chi-square upper critical value approximation (Wilson-Hilferty) at
// standard-normal quantile z.
inline double chi2_critical(int dof, double z) {
  const double k = dof;
  const double c = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
  return k * c * c * c;
}

}  // namespace oracle

#endif  // PCURL_TESTS_ORACLES_HPP_
