#ifndef PCURL_EXPERIMENT_HPP_
#define PCURL_EXPERIMENT_HPP_

#include <string>
#include <vector>

#include "pcurl/config.hpp"
#include "pcurl/curriculum.hpp"

namespace pcurl {

struct StageSummary {
  std::string name;
  int steps = 0;
  double best_validation_accuracy = 0.0;
  long best_step = 0;
  PolicyParams best_params;
};

struct ExperimentResult {
  std::vector<MetricsRecord> metrics;
  std::vector<StageSummary> stages;
  PolicyParams final_params;
  double final_validation_accuracy = 0.0;
  // Final policy sampled on the validation set, per difficulty bucket.
  std::vector<BucketStats> final_buckets;
  std::optional<FilterReport> filter_report;
  int train_size = 0;
  bool aborted = false;
  std::string error;
};

// Builds data, filters it, runs every stage. Pure computation, no files.
// A numerical abort is reported through aborted/error with the partial
// metrics kept.
ExperimentResult train(const ExperimentConfig& cfg);

// train() plus artifacts in cfg.output_dir: config.txt, metrics.csv,
// buckets.csv, histogram.csv, filter_report.csv, one checkpoint per stage,
// summary.json and (on abort) error.txt. Returns 0 on success, 2 on a
// numerical abort. Throws IoError when the directory is not writable.
int run_experiment(const ExperimentConfig& cfg, ExperimentResult* result = nullptr);

}  // namespace pcurl

#endif  // PCURL_EXPERIMENT_HPP_
