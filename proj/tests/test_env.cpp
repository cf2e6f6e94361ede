#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>

#include "oracles.hpp"
#include "pcurl/env.hpp"
#include "pcurl/error.hpp"

using namespace pcurl;

namespace {

const EnvDims kDims;  // unit-test defaults: B=4, M=4, K_max=32, T_cap=8
const Vocabulary kVocab(kDims.answers);

PromptSpec prompt_with(int required, int answer) {
  PromptSpec p;
  p.required_think = required;
  p.answer_index = answer;
  return p;
}

PolicyParams random_params(std::uint64_t seed, double scale = 2.0) {
  auto params = PolicyParams::zeros(kDims);
  Rng rng(seed);
  for (double& x : params.data()) x = scale * (2.0 * rng.uniform() - 1.0);
  return params;
}

}  // namespace

TEST_SUITE("env") {

TEST_CASE("prompt fields follow the bucket, think and answer rules") {
  const auto set = make_prompt_set(4, 7, DifficultyLaw::fixed({0.0, 0.3, 0.6, 1.0}), kDims);
  REQUIRE(set.size() == 4);
  const int K = kDims.k_max;
  CHECK(set[0].required_think == 0);
  CHECK(set[1].required_think == static_cast<int>(std::ceil(0.3 * K)));
  CHECK(set[2].required_think == static_cast<int>(std::ceil(0.6 * K)));
  CHECK(set[3].required_think == K);
  CHECK(set[3].bucket == kDims.buckets - 1);  // d = 1 clamps into the last bucket
  for (int i = 0; i < 4; ++i) {
    CHECK(set[i].id == i);
    CHECK(set[i].answer_index == set[i].bucket % kDims.answers);
  }

  const auto zero = make_prompt_set(1, 0, DifficultyLaw::fixed({0.0}), kDims);
  CHECK(zero[0].bucket == 0);
  CHECK(zero[0].answer_index == 0);
  CHECK(zero[0].required_think == 0);
}

TEST_CASE("uniform difficulties have mean near one half") {
  const auto set = make_prompt_set(1000, 1, DifficultyLaw::uniform(), kDims);
  double s = 0.0;
  for (const auto& p : set) {
    CHECK(p.difficulty >= 0.0);
    CHECK(p.difficulty <= 1.0);
    s += p.difficulty;
  }
  const double mean = s / 1000.0;
  CHECK(mean >= 0.45);
  CHECK(mean <= 0.55);
}

TEST_CASE("prompt sets are deterministic with dense ids") {
  for (const auto& law : {DifficultyLaw::uniform(), DifficultyLaw::beta(2.0, 5.0)}) {
    const auto a = make_prompt_set(200, 11, law, kDims);
    const auto b = make_prompt_set(200, 11, law, kDims);
    CHECK(a == b);
    for (int i = 0; i < 200; ++i) {
      CHECK(a[i].id == i);
      CHECK(a[i].bucket == std::min(static_cast<int>(a[i].difficulty * kDims.buckets),
                                    kDims.buckets - 1));
    }
    CHECK(make_prompt_set(200, 12, law, kDims) != a);
  }
}

TEST_CASE("bad difficulty laws are configuration errors") {
  CHECK_THROWS_AS(make_prompt_set(5, 0, DifficultyLaw::beta(0.0, 1.0), kDims), ConfigError);
  CHECK_THROWS_AS(make_prompt_set(5, 0, DifficultyLaw::beta(1.0, -2.0), kDims), ConfigError);
  CHECK_THROWS_AS(make_prompt_set(5, 0, DifficultyLaw::fixed({}), kDims), ConfigError);
  CHECK_THROWS_AS(make_prompt_set(5, 0, DifficultyLaw::fixed({1.5}), kDims), ConfigError);
  CHECK_THROWS_AS(make_prompt_set(0, 0, DifficultyLaw::uniform(), kDims), ConfigError);
  CHECK_THROWS_AS(DifficultyLaw::parse("gamma(1,2)"), ConfigError);
}

TEST_CASE("difficulty law text round trip") {
  for (const auto& law : {DifficultyLaw::uniform(), DifficultyLaw::beta(2.5, 0.5),
                          DifficultyLaw::fixed({0.0, 0.25, 1.0})}) {
    CHECK(DifficultyLaw::parse(law.to_string()) == law);
  }
}

TEST_CASE("score_response examples") {
  const Token T = Vocabulary::think();
  const Token S = kVocab.stop();
  const auto A = [](int i) { return kVocab.answer(i); };

  const auto p = prompt_with(2, 1);
  CHECK(score_response(p, TokenSeq{T, T, A(1), S}, 64, kVocab) == ScoreResult{true, true, 3});
  CHECK(score_response(p, TokenSeq{T, A(1), S}, 64, kVocab) == ScoreResult{false, true, 2});
  CHECK(score_response(prompt_with(0, 0), TokenSeq{A(2), S}, 64, kVocab) ==
        ScoreResult{false, true, 1});

  const auto two = score_response(p, TokenSeq{T, A(1), A(2), S}, 64, kVocab);
  CHECK_FALSE(two.format_ok);
  CHECK_FALSE(two.acc);

  // No STOP: length is the whole sequence.
  const auto open = score_response(p, TokenSeq{T, T, T, A(1)}, 64, kVocab);
  CHECK_FALSE(open.format_ok);
  CHECK(open.reasoning_length == 4);

  CHECK_THROWS_AS(score_response(p, TokenSeq{T, 99}, 64, kVocab), InputError);
  CHECK_THROWS_AS(score_response(p, TokenSeq{}, 64, kVocab), InputError);
}

TEST_CASE("property: acc implies format, scoring is pure") {
  Rng rng(3);
  const auto p = prompt_with(3, 2);
  for (int trial = 0; trial < 5000; ++trial) {
    TokenSeq y(1 + rng.below(8));
    for (auto& t : y) {
      // Bias toward THINK so that well-formed sequences actually occur.
      t = rng.uniform() < 0.5 ? Vocabulary::think()
                              : static_cast<Token>(rng.below(static_cast<std::uint64_t>(kVocab.size())));
    }
    const auto a = score_response(p, y, 64, kVocab);
    const auto b = score_response(p, y, 64, kVocab);
    CHECK(a == b);
    if (a.acc) CHECK(a.format_ok);
  }
}

TEST_CASE("uniform logits give -ln V per token") {
  const auto params = PolicyParams::zeros(kDims);
  for (Token t = 0; t < kVocab.size(); ++t) {
    const auto lp = policy_log_prob(params, prompt_with(0, 0), TokenSeq{t});
    CHECK(lp.per_token[0] == doctest::Approx(-std::log(6.0)).epsilon(1e-12));
  }
}

TEST_CASE("non-finite logits are rejected") {
  auto params = PolicyParams::zeros(kDims);
  params.at(0, 0, 1) = INFINITY;
  CHECK_THROWS_AS(policy_log_prob(params, prompt_with(0, 0), TokenSeq{1}), InputError);
  CHECK_THROWS_AS(params.check_finite(), InputError);
}

TEST_CASE("log-probs match an independent log-softmax") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto params = random_params(seed);
    Rng rng(seed + 100);
    PromptSpec p = prompt_with(0, 0);
    p.bucket = static_cast<int>(rng.below(4));
    TokenSeq y(10);
    for (auto& t : y) t = static_cast<Token>(rng.below(6));

    const auto lp = policy_log_prob(params, p, y);
    double total = 0.0;
    for (int t = 0; t < 10; ++t) {
      const auto row = params.row(p.bucket, std::min(t, kDims.t_cap - 1));
      const double expect =
          oracle::log_softmax_at(std::vector<double>(row.begin(), row.end()), y[t]);
      CHECK(std::abs(lp.per_token[t] - expect) < 1e-12);
      total += expect;
    }
    CHECK(std::abs(lp.total - total) < 1e-12);
    CHECK(lp.total <= 0.0);
  }
}

TEST_CASE("property: per-step distribution sums to one") {
  const auto params = random_params(9, 5.0);
  for (int t = 0; t < 12; ++t) {
    double s = 0.0;
    for (Token v = 0; v < kVocab.size(); ++v) {
      TokenSeq y(static_cast<std::size_t>(t + 1), Vocabulary::think());
      y.back() = v;
      s += std::exp(policy_log_prob(params, prompt_with(0, 0), y).per_token.back());
    }
    CHECK(std::abs(s - 1.0) < 1e-9);
  }
}

TEST_CASE("positions past T_cap reuse the last row") {
  auto params = PolicyParams::zeros(kDims);
  params.at(0, kDims.t_cap - 1, 0) = 1.7;
  TokenSeq y(20, Vocabulary::think());
  const auto lp = policy_log_prob(params, prompt_with(0, 0), y);
  for (int t = kDims.t_cap - 1; t < 20; ++t) {
    CHECK(lp.per_token[t] == lp.per_token[kDims.t_cap - 1]);
  }
}

TEST_CASE("a dominant STOP logit yields [STOP]") {
  auto params = PolicyParams::zeros(kDims);
  params.at(0, 0, kVocab.stop()) = 30.0;
  Rng rng(1);
  CHECK(sample_response(params, prompt_with(0, 0), 1.0, 64, rng) == TokenSeq{kVocab.stop()});
}

TEST_CASE("sampling is deterministic for a fixed generator state") {
  const auto params = random_params(4);
  Rng a(77), b(77);
  for (int i = 0; i < 50; ++i) {
    CHECK(sample_response(params, prompt_with(0, 0), 1.0, 64, a) ==
          sample_response(params, prompt_with(0, 0), 1.0, 64, b));
  }
}

TEST_CASE("sampling respects max_len") {
  auto params = PolicyParams::zeros(kDims);
  for (int t = 0; t < kDims.t_cap; ++t) params.at(0, t, 0) = 20.0;
  Rng rng(2);
  CHECK(sample_response(params, prompt_with(0, 0), 1.0, 7, rng).size() == 7);
}

TEST_CASE("very high temperature samples the first token uniformly") {
  const auto params = random_params(5, 3.0);
  Rng rng(6);
  std::vector<int> counts(6, 0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    ++counts[static_cast<std::size_t>(sample_response(params, prompt_with(0, 0), 1e6, 1, rng)[0])];
  }
  double chi2 = 0.0;
  const double e = n / 6.0;
  for (int c : counts) chi2 += (c - e) * (c - e) / e;
  // 3-sigma upper critical value for 5 degrees of freedom.
  CHECK(chi2 < oracle::chi2_critical(5, 3.0));
}

TEST_CASE("temperature equals dividing the logits") {
  const double tau = 2.5;
  const auto params = random_params(8, 3.0);
  auto scaled = params;
  for (double& x : scaled.data()) x /= tau;

  // Distribution over the first three tokens of each response.
  auto histogram = [](const PolicyParams& p, double temp, std::uint64_t seed) {
    std::map<TokenSeq, double> h;
    Rng rng(seed);
    for (int i = 0; i < 10000; ++i) {
      auto y = sample_response(p, prompt_with(0, 0), temp, 3, rng);
      h[y] += 1.0 / 10000;
    }
    return h;
  };
  const auto a = histogram(params, tau, 1);
  const auto b = histogram(scaled, 1.0, 2);
  std::map<TokenSeq, double> all = a;
  for (const auto& [k, v] : b) all[k];
  // Exact probabilities of every observed prefix agree.
  double exact_tv = 0.0;
  for (const auto& [k, v] : all) {
    const double la = std::exp(
        [&] {
          double s = 0.0;
          for (int t = 0; t < static_cast<int>(k.size()); ++t) {
            auto row = params.row(0, t);
            std::vector<double> r(row.begin(), row.end());
            for (double& x : r) x /= tau;
            s += oracle::log_softmax_at(r, k[t]);
          }
          return s;
        }());
    const double lb = std::exp(policy_log_prob(scaled, prompt_with(0, 0), k).total);
    exact_tv += 0.5 * std::abs(la - lb);
  }
  CHECK(exact_tv < 1e-12);
  // First-token marginal is well resolved by 10,000 draws.
  std::vector<double> fa(6, 0.0), fb(6, 0.0);
  for (const auto& [k, v] : a) fa[static_cast<std::size_t>(k[0])] += v;
  for (const auto& [k, v] : b) fb[static_cast<std::size_t>(k[0])] += v;
  double tv1 = 0.0;
  for (int i = 0; i < 6; ++i) tv1 += 0.5 * std::abs(fa[i] - fb[i]);
  CHECK(tv1 < 0.02);
}

TEST_CASE("template policy prefers the requested think length") {
  const auto params = template_policy(kDims, 3, 6.0);
  const auto y = greedy_response(params, prompt_with(0, 0), 64);
  REQUIRE(y.size() == 5);
  CHECK(y[0] == Vocabulary::think());
  CHECK(y[2] == Vocabulary::think());
  CHECK(kVocab.is_answer(y[3]));
  CHECK(y[4] == kVocab.stop());
}

}  // TEST_SUITE
