#pragma once

// Derivative-free minimization in the style of Powell's UOBYQA: a trust-region
// method driven by a full quadratic model interpolating (n+1)(n+2)/2 points.
// When the budget cannot pay for that interpolation set the minimizer falls
// back to coordinate pattern search with a finite-difference linear step.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace dqgnn {

struct ObjectiveSpec {
  int dimension = 1;
  /// Must be deterministic and safe to call concurrently.
  std::function<double(std::span<const double>)> evaluator;
  /// Evaluations allowed beyond the baseline evaluation of the initial point.
  long budget = 0;
  /// Stop once the trust-region radius falls below this.
  double tolerance = 1e-4;
  double initial_radius = 0.5;
  std::uint64_t seed = 0;
};

enum class OptMethod { kQuadraticModel, kPatternSearch };
enum class OptStatus { kConverged, kBudgetExhausted, kNonFiniteObjective };

struct OptResult {
  std::vector<double> best_point;
  double best_value = 0.0;
  /// Evaluations charged against the budget (the baseline evaluation is free).
  long evaluations_used = 0;
  bool converged = false;
  OptStatus status = OptStatus::kBudgetExhausted;
  OptMethod method = OptMethod::kQuadraticModel;
  /// Objective value of every evaluation in call order; entry 0 is the baseline.
  std::vector<double> trace;
};

/// Interpolation set size of a full quadratic model in `dimension` variables.
long quadratic_point_count(int dimension) noexcept;

/// Throws UsageError on a malformed spec or initial point.
OptResult minimize(const ObjectiveSpec& spec, std::span<const double> initial);

/// Running minimum of `trace`.
std::vector<double> best_so_far(std::span<const double> trace);

/// Writes "evaluation,value" rows for each traced evaluation.
void write_trace_csv(const std::filesystem::path& path, const OptResult& result);

std::string to_string(OptMethod method);
std::string to_string(OptStatus status);

}  // namespace dqgnn
