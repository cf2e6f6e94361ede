#ifndef PCURL_METRICS_HPP_
#define PCURL_METRICS_HPP_

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pcurl {

inline constexpr int kHistogramBins = 10;

// Training-rollout statistics for one difficulty bucket in one step.
struct BucketStats {
  int groups = 0;
  int responses = 0;
  double mean_response_length = 0.0;
  double accuracy = 0.0;

  bool operator==(const BucketStats&) const = default;
};

struct MetricsRecord {
  long step = 0;
  std::string stage;
  double mean_reward = 0.0;
  double mean_acc_reward = 0.0;
  double mean_format_reward = 0.0;
  double mean_len_reward = 0.0;
  double mean_response_length = 0.0;
  std::array<int, kHistogramBins> group_acc_histogram{};
  std::optional<double> validation_accuracy;
  std::optional<double> wall_time_ms;
  std::vector<BucketStats> buckets;

  bool operator==(const MetricsRecord&) const = default;
};

// Bin of a group accuracy in the 10-bin histogram over [0,1].
int histogram_bin(double acc);

// Column order of the metrics file. Fixed.
inline constexpr const char* kMetricsHeader =
    "step,stage,mean_reward,mean_acc_reward,mean_format_reward,mean_len_reward,"
    "mean_response_length,val_accuracy,wall_time_ms";

// %.17g; round-trips doubles exactly.
std::string format_real(double v);

std::string metrics_row(const MetricsRecord& r);
void write_metrics(std::ostream& os, const std::vector<MetricsRecord>& records);
// Throws ParseError with the 1-based line number on malformed input.
std::vector<MetricsRecord> read_metrics(std::istream& is);

// Side tables: per-bucket training stats and the group-accuracy histogram.
inline constexpr const char* kBucketHeader =
    "step,stage,bucket,groups,responses,mean_response_length,accuracy";
void write_bucket_metrics(std::ostream& os, const std::vector<MetricsRecord>& records);
// Fills the buckets field of matching records (by step).
void read_bucket_metrics(std::istream& is, std::vector<MetricsRecord>& records);

void write_histograms(std::ostream& os, const std::vector<MetricsRecord>& records);

}  // namespace pcurl

#endif  // PCURL_METRICS_HPP_
