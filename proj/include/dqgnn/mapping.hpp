#pragma once

// Trainable feature encoder: a d-dimensional feature vector becomes a
// single-qubit state through d rotations whose angles are feature * theta.
// Training fits theta so pairwise state distances track the pairwise
// Euclidean distances of the features.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dqgnn/errors.hpp"
#include "dqgnn/graphdata.hpp"
#include "dqgnn/optim.hpp"
#include "dqgnn/qsim.hpp"

namespace dqgnn {

struct MappingParams {
  std::vector<double> thetas;  // radians per unit feature

  std::size_t dim() const { return thetas.size(); }
  friend bool operator==(const MappingParams&, const MappingParams&) = default;
};

/// Row-major n x n matrix.
struct SquareMatrix {
  std::size_t n = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * n + j]; }
};

struct DistanceMatrices {
  SquareMatrix euclidean;  // normalized to [0, 1]
  SquareMatrix hilbert;    // normalized to [0, 1]
};

inline constexpr double kDistanceEpsilon = 1e-12;

/// Axis of encoder gate i: X, Y, Z repeating.
Axis encoder_axis(std::size_t gate_index) noexcept;

/// Applies gate i = R_{axis(i)}(thetas[i] * x[i]) to |0> in feature order.
QuantumState encode_feature(std::span<const double> x, const MappingParams& params);

/// arccos(|<a|b>|), clamped into [0, pi/2].
double hilbert_distance(const QuantumState& a, const QuantumState& b);

DistanceMatrices distance_matrices(std::span<const FeatureVector> features, const MappingParams& params);

/// Sum over all ordered pairs of |D_ij - D'_ij|.
double mapping_loss(std::span<const FeatureVector> features, const MappingParams& params);

/// Uniform draws in [0, pi] from the seed.
MappingParams random_mapping_params(std::size_t dim, std::uint64_t seed);

/// Distinct feature vectors in first-seen order.
std::vector<FeatureVector> distinct_features(std::span<const FeatureVector> features);

struct MappingTraining {
  MappingParams initial;
  MappingParams trained;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  OptResult optimizer;
  /// False when fewer than two distinct features left nothing to fit.
  bool optimized = false;
};

/// The optimizer hit a non-finite loss; carries the best finite params found.
class MappingTrainingError : public Error {
 public:
  MappingTrainingError(const std::string& what, MappingParams best)
      : Error(ExitCode::kInternal, what), best_(std::move(best)) {}
  const MappingParams& best() const noexcept { return best_; }

 private:
  MappingParams best_;
};

/// Fits encoder angles on the distinct vectors of `features`.
/// Never returns params whose loss exceeds the initialization's.
MappingTraining train_mapping(std::span<const FeatureVector> features, std::uint64_t seed, long budget);

/// Same, starting from `initial` instead of a seeded draw.
MappingTraining train_mapping(std::span<const FeatureVector> features, const MappingParams& initial,
                              std::uint64_t seed, long budget);

}  // namespace dqgnn
