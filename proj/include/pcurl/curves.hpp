#ifndef PCURL_CURVES_HPP_
#define PCURL_CURVES_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pcurl/metrics.hpp"

namespace pcurl {

struct Series {
  std::string name;
  std::vector<std::pair<long, double>> points;  // (step, value)
};

struct BucketSummaryRow {
  int bucket = 0;
  double mean_response_length = 0.0;
  double accuracy = 0.0;
};

struct CurveSet {
  std::vector<Series> series;
  // Mean over the last few rows that carry bucket data.
  std::vector<BucketSummaryRow> bucket_summary;

  const Series* find(const std::string& name) const;
};

inline constexpr int kBucketSummaryWindow = 5;

// Series for reward components, response length and validation accuracy,
// plus per-bucket length/accuracy series when bucket data is present. With
// a stage filter only that stage's rows are used.
CurveSet build_curves(const std::vector<MetricsRecord>& records,
                      const std::optional<std::string>& stage = std::nullopt);

// Reads metrics_file (and buckets.csv next to it when present) and writes one
// "<series>.dat" file per series plus bucket_summary.dat into out_dir.
CurveSet emit_curves(const std::string& metrics_file, const std::string& out_dir,
                     const std::optional<std::string>& stage = std::nullopt);

}  // namespace pcurl

#endif  // PCURL_CURVES_HPP_
