#include "pcurl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "pcurl/error.hpp"

namespace pcurl {

int histogram_bin(double acc) {
  const int bin = static_cast<int>(std::floor(acc * kHistogramBins));
  return std::clamp(bin, 0, kHistogramBins - 1);
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string metrics_row(const MetricsRecord& r) {
  std::string s = std::to_string(r.step) + "," + r.stage + "," +
                  format_real(r.mean_reward) + "," + format_real(r.mean_acc_reward) +
                  "," + format_real(r.mean_format_reward) + "," +
                  format_real(r.mean_len_reward) + "," +
                  format_real(r.mean_response_length) + ",";
  if (r.validation_accuracy) s += format_real(*r.validation_accuracy);
  s += ",";
  if (r.wall_time_ms) s += format_real(*r.wall_time_ms);
  return s;
}

void write_metrics(std::ostream& os, const std::vector<MetricsRecord>& records) {
  os << kMetricsHeader << '\n';
  for (const auto& r : records) os << metrics_row(r) << '\n';
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& cell, int line, const char* column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError(std::string("bad value '") + cell + "' in column " + column, line);
  }
}

long parse_int(const std::string& cell, int line, const char* column) {
  try {
    std::size_t used = 0;
    const long v = std::stol(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError(std::string("bad integer '") + cell + "' in column " + column, line);
  }
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::vector<MetricsRecord> read_metrics(std::istream& is) {
  std::string line;
  int lineno = 0;
  if (!std::getline(is, line)) throw ParseError("empty metrics file", 1);
  ++lineno;
  strip_cr(line);
  if (line != kMetricsHeader) throw ParseError("unexpected metrics header", lineno);

  std::vector<MetricsRecord> out;
  while (std::getline(is, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 9) {
      throw ParseError("expected 9 columns, got " + std::to_string(cells.size()), lineno);
    }
    MetricsRecord r;
    r.step = parse_int(cells[0], lineno, "step");
    r.stage = cells[1];
    if (r.stage.empty()) throw ParseError("empty stage", lineno);
    r.mean_reward = parse_real(cells[2], lineno, "mean_reward");
    r.mean_acc_reward = parse_real(cells[3], lineno, "mean_acc_reward");
    r.mean_format_reward = parse_real(cells[4], lineno, "mean_format_reward");
    r.mean_len_reward = parse_real(cells[5], lineno, "mean_len_reward");
    r.mean_response_length = parse_real(cells[6], lineno, "mean_response_length");
    if (!cells[7].empty()) r.validation_accuracy = parse_real(cells[7], lineno, "val_accuracy");
    if (!cells[8].empty()) r.wall_time_ms = parse_real(cells[8], lineno, "wall_time_ms");
    out.push_back(std::move(r));
  }
  return out;
}

void write_bucket_metrics(std::ostream& os, const std::vector<MetricsRecord>& records) {
  os << kBucketHeader << '\n';
  for (const auto& r : records) {
    for (std::size_t b = 0; b < r.buckets.size(); ++b) {
      const auto& s = r.buckets[b];
      os << r.step << ',' << r.stage << ',' << b << ',' << s.groups << ',' << s.responses
         << ',' << format_real(s.mean_response_length) << ',' << format_real(s.accuracy)
         << '\n';
    }
  }
}

void read_bucket_metrics(std::istream& is, std::vector<MetricsRecord>& records) {
  std::map<long, MetricsRecord*> by_step;
  for (auto& r : records) {
    r.buckets.clear();
    by_step[r.step] = &r;
  }
  std::string line;
  int lineno = 0;
  if (!std::getline(is, line)) throw ParseError("empty bucket file", 1);
  ++lineno;
  strip_cr(line);
  if (line != kBucketHeader) throw ParseError("unexpected bucket header", lineno);
  while (std::getline(is, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 7) {
      throw ParseError("expected 7 columns, got " + std::to_string(cells.size()), lineno);
    }
    const long step = parse_int(cells[0], lineno, "step");
    const auto it = by_step.find(step);
    if (it == by_step.end()) throw ParseError("bucket row for unknown step", lineno);
    const auto bucket = static_cast<std::size_t>(parse_int(cells[2], lineno, "bucket"));
    auto& buckets = it->second->buckets;
    if (buckets.size() <= bucket) buckets.resize(bucket + 1);
    buckets[bucket].groups = static_cast<int>(parse_int(cells[3], lineno, "groups"));
    buckets[bucket].responses = static_cast<int>(parse_int(cells[4], lineno, "responses"));
    buckets[bucket].mean_response_length =
        parse_real(cells[5], lineno, "mean_response_length");
    buckets[bucket].accuracy = parse_real(cells[6], lineno, "accuracy");
  }
}

void write_histograms(std::ostream& os, const std::vector<MetricsRecord>& records) {
  os << "step,stage";
  for (int b = 0; b < kHistogramBins; ++b) os << ",bin" << b;
  os << '\n';
  for (const auto& r : records) {
    os << r.step << ',' << r.stage;
    for (int c : r.group_acc_histogram) os << ',' << c;
    os << '\n';
  }
}

}  // namespace pcurl
