#include "pcurl/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pcurl/error.hpp"

namespace pcurl {

void EnvDims::validate() const {
  if (buckets < 1 || answers < 1 || k_max < 0 || t_cap < 1 || max_len < 1) {
    throw ConfigError("env dims must be positive (buckets, answers, t_cap, "
                      "max_len >= 1; k_max >= 0)");
  }
}

PromptSpec make_prompt(int id, double difficulty, const EnvDims& dims) {
  if (!(difficulty >= 0.0 && difficulty <= 1.0)) {
    throw InputError("difficulty must lie in [0,1]");
  }
  PromptSpec p;
  p.id = id;
  p.difficulty = difficulty;
  p.bucket = std::min(static_cast<int>(std::floor(difficulty * dims.buckets)),
                      dims.buckets - 1);
  p.required_think = static_cast<int>(std::ceil(difficulty * dims.k_max));
  p.answer_index = p.bucket % dims.answers;
  return p;
}

namespace {

std::vector<double> parse_numbers(const std::string& inner) {
  std::vector<double> out;
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) {
        throw ConfigError("bad number '" + item + "'");
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad number '" + item + "' in difficulty law");
    }
  }
  return out;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double sample_gamma(double shape, Rng& rng) {
  std::gamma_distribution<double> g(shape, 1.0);
  return g(rng);
}

}  // namespace

DifficultyLaw DifficultyLaw::parse(const std::string& text) {
  auto open = text.find('(');
  const std::string head = text.substr(0, open);
  std::string inner;
  if (open != std::string::npos) {
    if (text.back() != ')') throw ConfigError("unterminated difficulty law: " + text);
    inner = text.substr(open + 1, text.size() - open - 2);
  }
  if (head == "uniform" && open == std::string::npos) return uniform();
  if (head == "beta") {
    auto v = parse_numbers(inner);
    if (v.size() != 2) throw ConfigError("beta law needs two parameters");
    return beta(v[0], v[1]);
  }
  if (head == "fixed") return fixed(parse_numbers(inner));
  throw ConfigError("unknown difficulty law: " + text);
}

std::string DifficultyLaw::to_string() const {
  switch (kind) {
    case Kind::kUniform:
      return "uniform";
    case Kind::kBeta:
      return "beta(" + format_number(a) + "," + format_number(b) + ")";
    case Kind::kFixedList: {
      std::string s = "fixed(";
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += ",";
        s += format_number(values[i]);
      }
      return s + ")";
    }
  }
  return "uniform";
}

std::vector<PromptSpec> make_prompt_set(int n, std::uint64_t seed,
                                        const DifficultyLaw& law,
                                        const EnvDims& dims) {
  dims.validate();
  if (n < 1) throw ConfigError("prompt set size must be >= 1");
  if (law.kind == DifficultyLaw::Kind::kBeta && (law.a <= 0.0 || law.b <= 0.0)) {
    throw ConfigError("beta law parameters must be > 0");
  }
  if (law.kind == DifficultyLaw::Kind::kFixedList) {
    if (law.values.empty()) throw ConfigError("fixed difficulty list is empty");
    for (double v : law.values) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ConfigError("fixed difficulties must lie in [0,1]");
      }
    }
  }

  Rng rng(seed);
  std::vector<PromptSpec> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double d = 0.0;
    switch (law.kind) {
      case DifficultyLaw::Kind::kUniform:
        d = rng.uniform();
        break;
      case DifficultyLaw::Kind::kBeta: {
        const double x = sample_gamma(law.a, rng);
        const double y = sample_gamma(law.b, rng);
        d = (x + y) > 0.0 ? x / (x + y) : 0.5;
        break;
      }
      case DifficultyLaw::Kind::kFixedList:
        d = law.values[static_cast<std::size_t>(i) % law.values.size()];
        break;
    }
    out.push_back(make_prompt(i, std::clamp(d, 0.0, 1.0), dims));
  }
  return out;
}

ScoreResult score_response(const PromptSpec& prompt, std::span<const Token> tokens,
                           int max_len, const Vocabulary& vocab) {
  if (tokens.empty()) throw InputError("empty response");
  for (Token t : tokens) {
    if (!vocab.valid(t)) {
      throw InputError("unknown token id " + std::to_string(t));
    }
  }

  ScoreResult r;
  const auto stop_it = std::find(tokens.begin(), tokens.end(), vocab.stop());
  r.reasoning_length = static_cast<int>(stop_it - tokens.begin());

  // THINK* ANSWER STOP, nothing after STOP, STOP within max_len.
  std::size_t think_run = 0;
  while (think_run < tokens.size() && tokens[think_run] == Vocabulary::think()) {
    ++think_run;
  }
  const bool shape_ok = tokens.size() == think_run + 2 &&
                        vocab.is_answer(tokens[think_run]) &&
                        tokens[think_run + 1] == vocab.stop() &&
                        static_cast<int>(tokens.size()) <= max_len;
  r.format_ok = shape_ok;
  r.acc = shape_ok &&
          vocab.answer_index(tokens[think_run]) == prompt.answer_index &&
          static_cast<int>(think_run) >= prompt.required_think;
  return r;
}

PolicyParams::PolicyParams(int buckets, int t_cap, int vocab)
    : buckets_(buckets), t_cap_(t_cap), vocab_(vocab) {
  if (buckets < 1 || t_cap < 1 || vocab < 2) {
    throw ConfigError("policy dimensions must be positive");
  }
  logits_.assign(static_cast<std::size_t>(buckets) * t_cap * vocab, 0.0);
}

bool PolicyParams::all_finite() const {
  return std::all_of(logits_.begin(), logits_.end(),
                     [](double v) { return std::isfinite(v); });
}

void PolicyParams::check_finite() const {
  for (std::size_t i = 0; i < logits_.size(); ++i) {
    if (!std::isfinite(logits_[i])) {
      const std::size_t v = i % vocab_;
      const std::size_t p = (i / vocab_) % t_cap_;
      const std::size_t b = i / (static_cast<std::size_t>(vocab_) * t_cap_);
      throw InputError("non-finite logit at [" + std::to_string(b) + "," +
                       std::to_string(p) + "," + std::to_string(v) + "]");
    }
  }
}

PolicyParams template_policy(const EnvDims& dims, int think_len, double sharpness,
                             double explore) {
  PolicyParams params = PolicyParams::zeros(dims);
  const Vocabulary vocab(dims.answers);
  for (int b = 0; b < dims.buckets; ++b) {
    for (int p = 0; p < dims.t_cap; ++p) {
      if (p < think_len) {
        params.at(b, p, Vocabulary::think()) = sharpness;
      } else if (p == think_len) {
        for (int a = 0; a < dims.answers; ++a) params.at(b, p, vocab.answer(a)) = sharpness;
        params.at(b, p, Vocabulary::think()) = explore;
      } else {
        for (int a = 0; a < dims.answers; ++a) params.at(b, p, vocab.answer(a)) = explore;
        params.at(b, p, Vocabulary::think()) = explore;
        params.at(b, p, vocab.stop()) = sharpness;
      }
    }
  }
  return params;
}

void log_softmax(std::span<const double> logits, double temperature,
                 std::span<double> out) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double z : logits) hi = std::max(hi, z / temperature);
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z / temperature - hi);
  const double log_norm = hi + std::log(sum);
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = logits[k] / temperature - log_norm;
  }
}

namespace {

void check_rows_finite(const PolicyParams& params, int bucket, std::size_t len) {
  const int rows = std::min<int>(params.t_cap(), static_cast<int>(len));
  for (int p = 0; p < rows; ++p) {
    for (double z : params.row(bucket, p)) {
      if (!std::isfinite(z)) {
        throw InputError("non-finite logit in bucket " + std::to_string(bucket) +
                         ", position bucket " + std::to_string(p));
      }
    }
  }
}

}  // namespace

LogProb policy_log_prob(const PolicyParams& params, const PromptSpec& prompt,
                        std::span<const Token> tokens) {
  if (prompt.bucket < 0 || prompt.bucket >= params.buckets()) {
    throw InputError("prompt bucket outside policy table");
  }
  for (Token t : tokens) {
    if (t < 0 || t >= params.vocab()) {
      throw InputError("unknown token id " + std::to_string(t));
    }
  }
  check_rows_finite(params, prompt.bucket, tokens.size());

  LogProb out;
  out.per_token.resize(tokens.size());
  std::vector<double> lp(static_cast<std::size_t>(params.vocab()));
  int cached = -1;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const int pb = params.position_bucket(static_cast<int>(t));
    if (pb != cached) {
      log_softmax(params.row(prompt.bucket, pb), 1.0, lp);
      cached = pb;
    }
    out.per_token[t] = lp[static_cast<std::size_t>(tokens[t])];
    out.total += out.per_token[t];
  }
  return out;
}

TokenSeq sample_response(const PolicyParams& params, const PromptSpec& prompt,
                         double temperature, int max_len, Rng& rng) {
  if (!(temperature > 0.0)) throw InputError("temperature must be > 0");
  if (max_len < 1) throw InputError("max_len must be >= 1");
  check_rows_finite(params, prompt.bucket, static_cast<std::size_t>(max_len));

  const Token stop = params.vocab() - 1;
  const auto vocab = static_cast<std::size_t>(params.vocab());
  std::vector<double> lp(vocab);
  TokenSeq out;
  int cached = -1;
  for (int t = 0; t < max_len; ++t) {
    const int pb = params.position_bucket(t);
    if (pb != cached) {
      log_softmax(params.row(prompt.bucket, pb), temperature, lp);
      cached = pb;
    }
    // Inverse CDF; the last token absorbs rounding.
    const double u = rng.uniform();
    double acc = 0.0;
    Token pick = static_cast<Token>(vocab - 1);
    for (std::size_t k = 0; k + 1 < vocab; ++k) {
      acc += std::exp(lp[k]);
      if (u < acc) {
        pick = static_cast<Token>(k);
        break;
      }
    }
    out.push_back(pick);
    if (pick == stop) break;
  }
  return out;
}

TokenSeq greedy_response(const PolicyParams& params, const PromptSpec& prompt,
                         int max_len) {
  check_rows_finite(params, prompt.bucket, static_cast<std::size_t>(max_len));
  const Token stop = params.vocab() - 1;
  TokenSeq out;
  for (int t = 0; t < max_len; ++t) {
    const auto row = params.row(prompt.bucket, params.position_bucket(t));
    const Token pick = static_cast<Token>(std::max_element(row.begin(), row.end()) -
                                          row.begin());
    out.push_back(pick);
    if (pick == stop) break;
  }
  return out;
}

}  // namespace pcurl
