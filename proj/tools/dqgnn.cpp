// dqgnn: cross-validate, train and evaluate the decompositional quantum graph classifier.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <json.hpp>

#include "dqgnn/errors.hpp"
#include "dqgnn/pipeline.hpp"
#include "dqgnn/qsim.hpp"

namespace {

using dqgnn::ExitCode;

void apply_qubit_env() {
  const char* env = std::getenv("DQGNN_MAX_QUBITS");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0') throw dqgnn::UsageError(std::string("DQGNN_MAX_QUBITS is not an integer: ") + env);
  dqgnn::set_max_qubits(static_cast<int>(v));
}

void write_wall_time(const std::filesystem::path& report_path, double seconds) {
  std::ofstream out(report_path.string() + ".time");
  out << "{\"wall_time_seconds\": " << seconds << "}\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decompositional quantum graph neural network (classically simulated)"};
  app.require_subcommand(1);

  dqgnn::RunConfig config;
  std::string entanglement = "full";
  std::string checkpoint;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--dataset-dir", config.dataset_dir, "Directory holding the TUDataset files")->required();
    cmd->add_option("--dataset", config.dataset_name, "Dataset name, e.g. MUTAG")->required();
    cmd->add_option("--seed", config.seed, "Run seed")->capture_default_str();
    cmd->add_option("--out", config.output_path, "Output path (report or checkpoint)");
  };
  auto add_training = [&](CLI::App* cmd) {
    cmd->add_option("--layers", config.layers, "Number of Ulayers")->capture_default_str();
    cmd->add_option("--capacity", config.capacity, "Qubits per device-sized computation")->capture_default_str();
    cmd->add_option("--entanglement", entanglement, "Entangler topology: full|ring|off")->capture_default_str();
    cmd->add_option("--mapping-budget", config.mapping_budget, "Encoder training evaluations")
        ->capture_default_str();
    cmd->add_option("--model-budget", config.model_budget, "Model training evaluations")->capture_default_str();
    cmd->add_option("--trace-dir", config.trace_dir, "Write optimizer traces (CSV) into this directory");
  };

  auto* cv = app.add_subcommand("crossvalidate", "Stratified k-fold cross-validation");
  add_common(cv);
  add_training(cv);
  cv->add_option("--folds", config.folds, "Number of folds")->capture_default_str();
  cv->add_option("--workers", config.workers, "Folds run concurrently")->capture_default_str();

  auto* train = app.add_subcommand("train", "Train on the full dataset and write a checkpoint");
  add_common(train);
  add_training(train);

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint, "Checkpoint written by train")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
  }

  try {
    apply_qubit_env();
    config.entanglement = dqgnn::parse_entanglement(entanglement);

    if (*cv) {
      const dqgnn::Report report = dqgnn::run_crossvalidate(config);
      if (!config.output_path.empty()) {
        dqgnn::write_report(config.output_path, report);
        write_wall_time(config.output_path, report.wall_time_seconds);
      } else {
        std::cout << dqgnn::report_json(report);
      }
      std::cout << dqgnn::report_summary(report) << '\n';
    } else if (*train) {
      if (config.output_path.empty()) throw dqgnn::UsageError("train needs --out for the checkpoint");
      const dqgnn::TrainOutcome outcome = dqgnn::run_train(config);
      dqgnn::write_checkpoint(config.output_path, outcome.checkpoint);
      std::cout << "parameter_count " << outcome.report.parameter_count << " (published "
                << dqgnn::kPublishedParameterCount << ")\n";
      // Shortest round-trip form, as in the report JSON.
      std::cout << "training_accuracy " << nlohmann::json(outcome.report.mean_accuracy).dump() << '\n';
      std::cout << "checkpoint " << config.output_path.string() << '\n';
    } else if (*eval) {
      const dqgnn::Report report = dqgnn::run_eval(checkpoint, config);
      if (!config.output_path.empty()) {
        dqgnn::write_report(config.output_path, report);
      } else {
        std::cout << dqgnn::report_json(report);
      }
      std::cout << dqgnn::report_summary(report) << '\n';
    }
  } catch (const dqgnn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kInternal);
  }
  return 0;
}
