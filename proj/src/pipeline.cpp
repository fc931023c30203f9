#include "dqgnn/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "dqgnn/errors.hpp"
#include "dqgnn/mapping.hpp"
#include "dqgnn/random.hpp"

namespace dqgnn {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::uint64_t kMappingStream = 0x6d6170;  // "map"
constexpr std::uint64_t kModelStream = 0x6d6f64;    // "mod"
constexpr std::uint64_t kFoldStream = 0x666f6c;     // "fol"

void require_two_classes(const Dataset& data) {
  bool seen[2] = {false, false};
  for (const Graph& g : data.graphs) seen[g.label] = true;
  if (!seen[0] || !seen[1]) {
    throw DataError("dataset " + data.name + " must contain exactly two graph classes");
  }
}

std::vector<FeatureVector> node_features_of(std::span<const Graph> graphs) {
  std::vector<FeatureVector> out;
  for (const Graph& g : graphs) out.insert(out.end(), g.node_features.begin(), g.node_features.end());
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void maybe_write_trace(const RunConfig& config, const std::string& name, const OptResult& result) {
  if (config.trace_dir.empty()) return;
  std::filesystem::create_directories(config.trace_dir);
  write_trace_csv(config.trace_dir / name, result);
}

Json config_json(const RunConfig& c) {
  Json j;
  j["dataset_dir"] = c.dataset_dir.string();
  j["dataset"] = c.dataset_name;
  j["layers"] = c.layers;
  j["capacity"] = c.capacity;
  j["entanglement"] = to_string(c.entanglement);
  j["folds"] = c.folds;
  j["seed"] = c.seed;
  j["mapping_budget"] = c.mapping_budget;
  j["model_budget"] = c.model_budget;
  j["stratified"] = true;
  j["max_qubits"] = max_qubits();
  return j;
}

}  // namespace

void validate(const RunConfig& config) {
  if (config.folds < 2) throw UsageError("folds must be >= 2, got " + std::to_string(config.folds));
  if (config.layers < 1) throw UsageError("layers must be >= 1, got " + std::to_string(config.layers));
  if (config.mapping_budget < 0 || config.model_budget < 0) throw UsageError("budgets must be >= 0");
  if (config.workers < 1) throw UsageError("workers must be >= 1");
  if (config.capacity < 1) throw UsageError("capacity must be >= 1");
  if (config.capacity > max_qubits()) {
    throw CapacityError("capacity " + std::to_string(config.capacity) + " exceeds the simulator ceiling of " +
                            std::to_string(max_qubits()) + " qubits",
                        max_qubits());
  }
}

void summarize(Report& report) {
  const auto& acc = report.per_fold_accuracy;
  const auto k = static_cast<double>(acc.size());
  if (acc.empty()) return;
  double sum = 0.0;
  for (double a : acc) sum += a;
  report.mean_accuracy = sum / k;
  double sq = 0.0;
  for (double a : acc) sq += (a - report.mean_accuracy) * (a - report.mean_accuracy);
  report.std_accuracy = acc.size() > 1 ? std::sqrt(sq / (k - 1.0)) : 0.0;
  report.stderr_accuracy = report.std_accuracy / std::sqrt(k);
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw UsageError("folds must be >= 2, got " + std::to_string(folds));
  if (static_cast<std::size_t>(folds) > labels.size()) {
    throw UsageError(std::to_string(folds) + " folds over " + std::to_string(labels.size()) +
                     " graphs leaves an empty fold");
  }
  Rng rng(derive_seed(seed, kFoldStream));
  std::vector<int> assignment(labels.size(), -1);
  int next = 0;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    shuffle(members, rng);
    for (std::size_t i : members) {
      assignment[i] = next;
      next = (next + 1) % folds;
    }
  }
  return assignment;
}

std::uint64_t mapping_seed(std::uint64_t run_seed, int fold) {
  return derive_seed(run_seed, kMappingStream + static_cast<std::uint64_t>(fold));
}

std::uint64_t model_seed(std::uint64_t run_seed, int fold) {
  return derive_seed(run_seed, kModelStream + static_cast<std::uint64_t>(fold));
}

Report run_crossvalidate(const RunConfig& config, const Dataset& data) {
  validate(config);
  require_two_classes(data);
  const auto start = std::chrono::steady_clock::now();

  std::vector<int> labels;
  for (const Graph& g : data.graphs) labels.push_back(g.label);
  const std::vector<int> assignment = stratified_folds(labels, config.folds, config.seed);

  std::vector<FoldResult> results(static_cast<std::size_t>(config.folds));
  std::vector<long> param_counts(results.size(), 0);
  std::mutex out_mutex;
  std::atomic<int> next_fold{0};
  std::exception_ptr failure;

  auto run_fold = [&](int fold) {
    std::vector<Graph> train;
    std::vector<Graph> test;
    for (std::size_t i = 0; i < data.graphs.size(); ++i) {
      (assignment[i] == fold ? test : train).push_back(data.graphs[i]);
    }
    FoldResult r;
    r.fold = fold;
    r.train_size = train.size();
    r.test_size = test.size();
    for (const Graph& g : test) ++r.test_class_counts[g.label];

    const MappingTraining mapping =
        train_mapping(node_features_of(train), mapping_seed(config.seed, fold), config.mapping_budget);
    r.mapping_initial_loss = mapping.initial_loss;
    r.mapping_final_loss = mapping.final_loss;

    const ModelTraining model = train_model(train, mapping.trained, config.layers, config.forward(),
                                            model_seed(config.seed, fold), config.model_budget);
    r.model_initial_loss = model.initial_loss;
    r.model_final_loss = model.final_loss;
    r.model_optimizer_method = to_string(model.optimizer.method);
    r.model_optimizer_status = to_string(model.optimizer.status);
    r.model_evaluations = model.optimizer.evaluations_used;
    r.warning = model.warning;
    r.train_accuracy = accuracy(train, model.trained, config.forward());
    r.test_accuracy = accuracy(test, model.trained, config.forward());

    maybe_write_trace(config, "fold" + std::to_string(fold) + "_mapping.csv", mapping.optimizer);
    maybe_write_trace(config, "fold" + std::to_string(fold) + "_model.csv", model.optimizer);

    {
      std::lock_guard lock(out_mutex);
      char line[160];
      std::snprintf(line, sizeof line, "fold %d/%d: test accuracy %.4f (train %.4f, %zu test graphs)%s\n", fold + 1,
                    config.folds, r.test_accuracy, r.train_accuracy, r.test_size, r.warning ? " [warning]" : "");
      std::cout << line << std::flush;
    }
    param_counts[static_cast<std::size_t>(fold)] = count_parameters(model.trained);
    results[static_cast<std::size_t>(fold)] = std::move(r);
  };

  auto worker = [&] {
    for (int fold = next_fold++; fold < config.folds; fold = next_fold++) {
      try {
        run_fold(fold);
      } catch (...) {
        std::lock_guard lock(out_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::min(config.workers, config.folds);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  Report report;
  report.command = "crossvalidate";
  report.config = config;
  report.seed = config.seed;
  report.folds = std::move(results);
  for (const FoldResult& r : report.folds) report.per_fold_accuracy.push_back(r.test_accuracy);
  report.parameter_count = param_counts.front();
  summarize(report);
  report.wall_time_seconds = seconds_since(start);
  return report;
}

Report run_crossvalidate(const RunConfig& config) {
  validate(config);
  return run_crossvalidate(config, parse_tudataset(config.dataset_dir, config.dataset_name));
}

TrainOutcome run_train(const RunConfig& config, const Dataset& data) {
  validate(config);
  require_two_classes(data);
  const auto start = std::chrono::steady_clock::now();

  const MappingTraining mapping =
      train_mapping(node_features_of(data.graphs), mapping_seed(config.seed, -1), config.mapping_budget);
  const ModelTraining model = train_model(data.graphs, mapping.trained, config.layers, config.forward(),
                                          model_seed(config.seed, -1), config.model_budget);
  maybe_write_trace(config, "train_mapping.csv", mapping.optimizer);
  maybe_write_trace(config, "train_model.csv", model.optimizer);

  TrainOutcome out;
  out.checkpoint.params = model.trained;
  out.checkpoint.forward = config.forward();
  out.checkpoint.seed = config.seed;

  FoldResult r;
  r.train_size = data.graphs.size();
  r.train_accuracy = accuracy(data.graphs, model.trained, config.forward());
  r.test_accuracy = r.train_accuracy;
  r.mapping_initial_loss = mapping.initial_loss;
  r.mapping_final_loss = mapping.final_loss;
  r.model_initial_loss = model.initial_loss;
  r.model_final_loss = model.final_loss;
  r.model_optimizer_method = to_string(model.optimizer.method);
  r.model_optimizer_status = to_string(model.optimizer.status);
  r.model_evaluations = model.optimizer.evaluations_used;
  r.warning = model.warning;

  Report& report = out.report;
  report.command = "train";
  report.config = config;
  report.seed = config.seed;
  report.per_fold_accuracy = {r.train_accuracy};
  report.folds = {r};
  report.parameter_count = count_parameters(model.trained);
  summarize(report);
  report.wall_time_seconds = seconds_since(start);
  return out;
}

TrainOutcome run_train(const RunConfig& config) {
  validate(config);
  return run_train(config, parse_tudataset(config.dataset_dir, config.dataset_name));
}

Report run_eval(const Checkpoint& checkpoint, const RunConfig& config, const Dataset& data) {
  const auto start = std::chrono::steady_clock::now();
  if (checkpoint.params.mapping.dim() != data.feature_dim()) {
    throw DataError("checkpoint encoder has dimension " + std::to_string(checkpoint.params.mapping.dim()) +
                    " but dataset " + data.name + " has " + std::to_string(data.feature_dim()) +
                    " node features");
  }
  Report report;
  report.command = "eval";
  report.config = config;
  report.config.layers = static_cast<int>(checkpoint.params.layers.size());
  report.config.capacity = checkpoint.forward.capacity;
  report.config.entanglement = checkpoint.forward.entanglement;
  report.seed = checkpoint.seed;
  report.config.seed = checkpoint.seed;

  FoldResult r;
  r.test_size = data.graphs.size();
  for (const Graph& g : data.graphs) ++r.test_class_counts[g.label];
  r.test_accuracy = accuracy(data.graphs, checkpoint.params, checkpoint.forward);
  report.folds = {r};
  report.per_fold_accuracy = {r.test_accuracy};
  report.parameter_count = count_parameters(checkpoint.params);
  summarize(report);
  report.wall_time_seconds = seconds_since(start);
  return report;
}

Report run_eval(const std::filesystem::path& checkpoint, const RunConfig& config) {
  const Checkpoint ckpt = read_checkpoint(checkpoint);
  if (ckpt.forward.capacity > max_qubits()) {
    throw CapacityError("checkpoint capacity exceeds the simulator ceiling", max_qubits());
  }
  return run_eval(ckpt, config, parse_tudataset(config.dataset_dir, config.dataset_name));
}

std::string report_json(const Report& report) {
  Json j;
  j["command"] = report.command;
  j["dataset"] = report.config.dataset_name;
  j["seed"] = report.seed;
  j["per_fold_accuracy"] = report.per_fold_accuracy;
  j["mean_accuracy"] = report.mean_accuracy;
  j["std_accuracy"] = report.std_accuracy;
  j["stderr_accuracy"] = report.stderr_accuracy;
  j["parameter_count"] = report.parameter_count;
  j["published_parameter_count"] = kPublishedParameterCount;
  j["parameter_count_note"] =
      "parameter_count = 6 angles per Ulayer + 2 centroids + encoder angles; the published count of 43 "
      "comes from a per-layer parameterization that is not recoverable, so the two are reported side by side";
  j["config"] = config_json(report.config);
  Json folds = Json::array();
  for (const FoldResult& r : report.folds) {
    Json f;
    f["fold"] = r.fold;
    f["train_size"] = r.train_size;
    f["test_size"] = r.test_size;
    f["test_class_counts"] = {r.test_class_counts[0], r.test_class_counts[1]};
    f["test_accuracy"] = r.test_accuracy;
    f["train_accuracy"] = r.train_accuracy;
    f["mapping_initial_loss"] = r.mapping_initial_loss;
    f["mapping_final_loss"] = r.mapping_final_loss;
    f["model_initial_loss"] = r.model_initial_loss;
    f["model_final_loss"] = r.model_final_loss;
    f["model_optimizer_method"] = r.model_optimizer_method;
    f["model_optimizer_status"] = r.model_optimizer_status;
    f["model_evaluations"] = r.model_evaluations;
    f["warning"] = r.warning;
    folds.push_back(std::move(f));
  }
  j["folds"] = std::move(folds);
  return j.dump(2) + "\n";
}

void write_report(const std::filesystem::path& path, const Report& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write report " + path.string());
  out << report_json(report);
  if (!out) throw DataError("failed writing report " + path.string());
}

std::string report_summary(const Report& report) {
  char line[256];
  std::snprintf(line, sizeof line,
                "%s %s: mean accuracy %.4f, std %.4f, stderr %.4f over %zu fold(s); parameters %ld (published %ld); "
                "%.1f s",
                report.command.c_str(), report.config.dataset_name.c_str(), report.mean_accuracy,
                report.std_accuracy, report.stderr_accuracy, report.per_fold_accuracy.size(),
                report.parameter_count, kPublishedParameterCount, report.wall_time_seconds);
  return line;
}

}  // namespace dqgnn
