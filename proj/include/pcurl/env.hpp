#ifndef PCURL_ENV_HPP_
#define PCURL_ENV_HPP_

#include <span>
#include <string>
#include <vector>

#include "pcurl/random.hpp"

// Synthetic verifiable-task environment and the toy autoregressive policy.
//
// A prompt has a difficulty in [0,1]. Responses follow the grammar
// THINK* ANSWER_x STOP. A response is correct when it is well formed, names
// the prompt's answer and thinks for at least required_think tokens first,
// so accuracy, format and reasoning length are all observable and coupled.
//
// The policy is a table of logits indexed by (difficulty bucket, position
// bucket, token); positions past the last bucket reuse its row.

namespace pcurl {

using Token = int;
using TokenSeq = std::vector<Token>;

struct EnvDims {
  int buckets = 4;   // B
  int answers = 4;   // M
  int k_max = 32;    // think tokens needed at difficulty 1
  int t_cap = 8;     // position buckets
  int max_len = 64;  // response cap

  int vocab_size() const { return answers + 2; }
  // Throws ConfigError on non-positive dimensions.
  void validate() const;
  bool operator==(const EnvDims&) const = default;
};

// THINK = 0, ANSWER_i = 1 + i, STOP = M + 1.
class Vocabulary {
 public:
  explicit Vocabulary(int answers) : answers_(answers) {}

  static constexpr Token think() { return 0; }
  Token answer(int index) const { return 1 + index; }
  Token stop() const { return answers_ + 1; }
  int size() const { return answers_ + 2; }

  bool valid(Token t) const { return t >= 0 && t < size(); }
  bool is_answer(Token t) const { return t >= 1 && t <= answers_; }
  int answer_index(Token t) const { return t - 1; }

 private:
  int answers_;
};

struct PromptSpec {
  int id = 0;
  double difficulty = 0.0;
  int bucket = 0;
  int required_think = 0;
  int answer_index = 0;

  bool operator==(const PromptSpec&) const = default;
};

// Builds a prompt whose derived fields satisfy the bucket/think/answer rules.
PromptSpec make_prompt(int id, double difficulty, const EnvDims& dims);

struct DifficultyLaw {
  enum class Kind { kUniform, kBeta, kFixedList };

  Kind kind = Kind::kUniform;
  double a = 1.0;  // beta shape parameters
  double b = 1.0;
  std::vector<double> values;  // fixed list, reused cyclically

  static DifficultyLaw uniform() { return {}; }
  static DifficultyLaw beta(double a, double b) { return {Kind::kBeta, a, b, {}}; }
  static DifficultyLaw fixed(std::vector<double> v) {
    return {Kind::kFixedList, 1.0, 1.0, std::move(v)};
  }

  // Text forms: "uniform", "beta(a,b)", "fixed(v0,v1,...)".
  static DifficultyLaw parse(const std::string& text);
  std::string to_string() const;
  bool operator==(const DifficultyLaw&) const = default;
};

std::vector<PromptSpec> make_prompt_set(int n, std::uint64_t seed,
                                        const DifficultyLaw& law,
                                        const EnvDims& dims = {});

struct ScoreResult {
  bool acc = false;
  bool format_ok = false;
  int reasoning_length = 0;

  bool operator==(const ScoreResult&) const = default;
};

ScoreResult score_response(const PromptSpec& prompt, std::span<const Token> tokens,
                           int max_len, const Vocabulary& vocab);

class PolicyParams {
 public:
  PolicyParams() = default;
  // All-zero logits (the uniform policy).
  PolicyParams(int buckets, int t_cap, int vocab);
  static PolicyParams zeros(const EnvDims& dims) {
    return PolicyParams(dims.buckets, dims.t_cap, dims.vocab_size());
  }

  int buckets() const { return buckets_; }
  int t_cap() const { return t_cap_; }
  int vocab() const { return vocab_; }
  std::size_t size() const { return logits_.size(); }

  int position_bucket(int t) const { return t < t_cap_ ? t : t_cap_ - 1; }
  std::size_t offset(int bucket, int pos_bucket) const {
    return (static_cast<std::size_t>(bucket) * t_cap_ + pos_bucket) * vocab_;
  }

  double& at(int bucket, int pos_bucket, Token v) {
    return logits_[offset(bucket, pos_bucket) + v];
  }
  double at(int bucket, int pos_bucket, Token v) const {
    return logits_[offset(bucket, pos_bucket) + v];
  }
  std::span<const double> row(int bucket, int pos_bucket) const {
    return {logits_.data() + offset(bucket, pos_bucket),
            static_cast<std::size_t>(vocab_)};
  }
  std::span<double> row(int bucket, int pos_bucket) {
    return {logits_.data() + offset(bucket, pos_bucket),
            static_cast<std::size_t>(vocab_)};
  }

  std::span<const double> data() const { return logits_; }
  std::span<double> data() { return logits_; }

  bool all_finite() const;
  // Throws InputError naming the first non-finite entry.
  void check_finite() const;

  bool same_shape(const PolicyParams& o) const {
    return buckets_ == o.buckets_ && t_cap_ == o.t_cap_ && vocab_ == o.vocab_;
  }
  bool operator==(const PolicyParams&) const = default;

 private:
  int buckets_ = 0;
  int t_cap_ = 0;
  int vocab_ = 0;
  std::vector<double> logits_;
};

// Starting policy that behaves like an instruction-tuned model with short
// reasoning: favors THINK before position think_len, an (unspecified) answer
// at think_len and STOP afterwards. sharpness is the favored-token logit;
// explore is added to THINK from think_len on and to the answers after
// think_len, which keeps longer well-formed responses reachable.
PolicyParams template_policy(const EnvDims& dims, int think_len, double sharpness,
                             double explore = 0.0);

// out = log softmax(logits / temperature).
void log_softmax(std::span<const double> logits, double temperature,
                 std::span<double> out);

struct LogProb {
  double total = 0.0;
  std::vector<double> per_token;
};

LogProb policy_log_prob(const PolicyParams& params, const PromptSpec& prompt,
                        std::span<const Token> tokens);

TokenSeq sample_response(const PolicyParams& params, const PromptSpec& prompt,
                         double temperature, int max_len, Rng& rng);

// Highest-probability token at every position (greedy decoding).
TokenSeq greedy_response(const PolicyParams& params, const PromptSpec& prompt,
                         int max_len);

}  // namespace pcurl

#endif  // PCURL_ENV_HPP_
