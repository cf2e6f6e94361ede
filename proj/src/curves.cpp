#include "pcurl/curves.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "pcurl/error.hpp"

namespace pcurl {

namespace fs = std::filesystem;

const Series* CurveSet::find(const std::string& name) const {
  for (const auto& s : series) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

CurveSet build_curves(const std::vector<MetricsRecord>& records,
                      const std::optional<std::string>& stage) {
  std::vector<const MetricsRecord*> rows;
  for (const auto& r : records) {
    if (!stage || r.stage == *stage) rows.push_back(&r);
  }

  CurveSet out;
  auto add = [&](const std::string& name, auto value_of) {
    Series s{name, {}};
    for (const auto* r : rows) {
      if (auto v = value_of(*r)) s.points.emplace_back(r->step, *v);
    }
    out.series.push_back(std::move(s));
  };
  add("mean_reward", [](const MetricsRecord& r) { return std::optional(r.mean_reward); });
  add("mean_acc_reward", [](const MetricsRecord& r) { return std::optional(r.mean_acc_reward); });
  add("mean_format_reward",
      [](const MetricsRecord& r) { return std::optional(r.mean_format_reward); });
  add("mean_len_reward", [](const MetricsRecord& r) { return std::optional(r.mean_len_reward); });
  add("mean_response_length",
      [](const MetricsRecord& r) { return std::optional(r.mean_response_length); });
  add("val_accuracy", [](const MetricsRecord& r) { return r.validation_accuracy; });

  std::size_t buckets = 0;
  for (const auto* r : rows) buckets = std::max(buckets, r->buckets.size());
  for (std::size_t b = 0; b < buckets; ++b) {
    auto stat = [b](const MetricsRecord& r) -> const BucketStats* {
      return b < r.buckets.size() && r.buckets[b].responses > 0 ? &r.buckets[b] : nullptr;
    };
    add("length_bucket" + std::to_string(b), [&](const MetricsRecord& r) {
      const auto* s = stat(r);
      return s ? std::optional(s->mean_response_length) : std::nullopt;
    });
    add("accuracy_bucket" + std::to_string(b), [&](const MetricsRecord& r) {
      const auto* s = stat(r);
      return s ? std::optional(s->accuracy) : std::nullopt;
    });

    BucketSummaryRow row;
    row.bucket = static_cast<int>(b);
    int used = 0;
    for (auto it = rows.rbegin(); it != rows.rend() && used < kBucketSummaryWindow; ++it) {
      if (const auto* s = stat(**it)) {
        row.mean_response_length += s->mean_response_length;
        row.accuracy += s->accuracy;
        ++used;
      }
    }
    if (used > 0) {
      row.mean_response_length /= used;
      row.accuracy /= used;
    }
    out.bucket_summary.push_back(row);
  }
  return out;
}

CurveSet emit_curves(const std::string& metrics_file, const std::string& out_dir,
                     const std::optional<std::string>& stage) {
  std::ifstream is(metrics_file, std::ios::binary);
  if (!is) throw IoError("cannot read " + metrics_file);
  auto records = read_metrics(is);
  const auto bucket_file = fs::path(metrics_file).parent_path() / "buckets.csv";
  if (fs::exists(bucket_file)) {
    std::ifstream bs(bucket_file, std::ios::binary);
    read_bucket_metrics(bs, records);
  }

  const CurveSet curves = build_curves(records, stage);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
  for (const auto& s : curves.series) {
    std::ofstream os(fs::path(out_dir) / (s.name + ".dat"), std::ios::binary);
    if (!os) throw IoError("cannot write series " + s.name);
    os << "# step " << s.name << '\n';
    for (const auto& [step, v] : s.points) os << step << ' ' << format_real(v) << '\n';
  }
  std::ofstream os(fs::path(out_dir) / "bucket_summary.dat", std::ios::binary);
  if (!os) throw IoError("cannot write bucket summary");
  os << "# bucket mean_response_length accuracy\n";
  for (const auto& r : curves.bucket_summary) {
    os << r.bucket << ' ' << format_real(r.mean_response_length) << ' '
       << format_real(r.accuracy) << '\n';
  }
  return curves;
}

}  // namespace pcurl
