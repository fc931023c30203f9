#pragma once

// End-to-end runs: stratified k-fold cross-validation, full-data training to a
// checkpoint, and checkpoint evaluation. Each produces a Report that
// serializes to a fixed-order JSON document.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dqgnn/checkpoint.hpp"
#include "dqgnn/graphdata.hpp"
#include "dqgnn/model.hpp"

namespace dqgnn {

struct RunConfig {
  std::filesystem::path dataset_dir;
  std::string dataset_name;
  int layers = kDefaultLayers;
  int capacity = 8;
  Entanglement entanglement = Entanglement::kFull;
  int folds = 10;
  std::uint64_t seed = 0;
  long mapping_budget = 500;
  long model_budget = 2000;
  std::filesystem::path output_path;
  int workers = 1;
  /// When set, optimizer traces are written here as CSV.
  std::filesystem::path trace_dir;

  ForwardConfig forward() const { return {capacity, entanglement}; }
};

/// Throws UsageError when folds < 2, budgets < 0, layers < 1 or workers < 1.
void validate(const RunConfig& config);

struct FoldResult {
  int fold = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t test_class_counts[2] = {0, 0};
  double test_accuracy = 0.0;
  double train_accuracy = 0.0;
  double mapping_initial_loss = 0.0;
  double mapping_final_loss = 0.0;
  double model_initial_loss = 0.0;
  double model_final_loss = 0.0;
  std::string model_optimizer_method;
  std::string model_optimizer_status;
  long model_evaluations = 0;
  bool warning = false;
};

struct Report {
  std::string command;
  std::vector<double> per_fold_accuracy;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;     // sample standard deviation (k - 1)
  double stderr_accuracy = 0.0;  // std_accuracy / sqrt(k)
  long parameter_count = 0;
  double wall_time_seconds = 0.0;
  RunConfig config;
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
};

/// Fills mean, std and stderr from per_fold_accuracy.
void summarize(Report& report);

/// Fold index for every graph. Each class is shuffled with the seed and dealt
/// round-robin, continuing the rotation across classes, so fold sizes differ
/// by at most one and every fold's class count is the floor or ceiling of
/// its share. Throws UsageError when a fold would be empty.
std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

/// Seeds of the independent random streams in a run.
std::uint64_t mapping_seed(std::uint64_t run_seed, int fold);
std::uint64_t model_seed(std::uint64_t run_seed, int fold);

Report run_crossvalidate(const RunConfig& config, const Dataset& data);
Report run_crossvalidate(const RunConfig& config);

struct TrainOutcome {
  Checkpoint checkpoint;
  Report report;  // single entry: training-set accuracy
};

TrainOutcome run_train(const RunConfig& config, const Dataset& data);
TrainOutcome run_train(const RunConfig& config);

/// Accuracy of a checkpoint over every graph. Throws DataError on a feature dimension mismatch.
Report run_eval(const Checkpoint& checkpoint, const RunConfig& config, const Dataset& data);
Report run_eval(const std::filesystem::path& checkpoint, const RunConfig& config);

/// Fixed-order JSON document. Excludes wall time so identical runs produce identical bytes.
std::string report_json(const Report& report);
void write_report(const std::filesystem::path& path, const Report& report);
/// One-line human summary.
std::string report_summary(const Report& report);

}  // namespace dqgnn
