#include "dqgnn/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dqgnn/random.hpp"

namespace dqgnn {

Axis encoder_axis(std::size_t gate_index) noexcept {
  static constexpr Axis kCycle[] = {Axis::X, Axis::Y, Axis::Z};
  return kCycle[gate_index % 3];
}

QuantumState encode_feature(std::span<const double> x, const MappingParams& params) {
  if (x.size() != params.dim()) {
    throw UsageError("feature has dimension " + std::to_string(x.size()) + ", encoder expects " +
                     std::to_string(params.dim()));
  }
  Complex a0 = 1.0;
  Complex a1 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double angle = params.thetas[i] * x[i];
    if (angle == 0.0) continue;
    const Mat2 m = rotation_matrix(encoder_axis(i), angle);
    const Complex b0 = m[0] * a0 + m[1] * a1;
    const Complex b1 = m[2] * a0 + m[3] * a1;
    a0 = b0;
    a1 = b1;
  }
  return QuantumState::unchecked(1, {a0, a1});
}

double hilbert_distance(const QuantumState& a, const QuantumState& b) {
  const double overlap = std::abs(inner_product(a, b));
  return std::acos(std::clamp(overlap, 0.0, 1.0));
}

namespace {

void normalize_by_max(SquareMatrix& m) {
  const double peak = *std::max_element(m.values.begin(), m.values.end());
  const double denom = std::max(peak, kDistanceEpsilon);
  for (double& v : m.values) v /= denom;
}

}  // namespace

DistanceMatrices distance_matrices(std::span<const FeatureVector> features, const MappingParams& params) {
  const std::size_t n = features.size();
  std::vector<QuantumState> states;
  states.reserve(n);
  for (const auto& f : features) states.push_back(encode_feature(f, params));

  DistanceMatrices out{{n, std::vector<double>(n * n, 0.0)}, {n, std::vector<double>(n * n, 0.0)}};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double sq = 0.0;
      for (std::size_t k = 0; k < features[i].size(); ++k) {
        const double d = features[i][k] - features[j][k];
        sq += d * d;
      }
      out.euclidean(i, j) = out.euclidean(j, i) = std::sqrt(sq);
      out.hilbert(i, j) = out.hilbert(j, i) = hilbert_distance(states[i], states[j]);
    }
  }
  normalize_by_max(out.euclidean);
  normalize_by_max(out.hilbert);
  return out;
}

double mapping_loss(std::span<const FeatureVector> features, const MappingParams& params) {
  if (features.size() < 2) {
    throw UsageError("mapping loss needs at least 2 samples, got " + std::to_string(features.size()));
  }
  const DistanceMatrices dm = distance_matrices(features, params);
  double loss = 0.0;
  for (std::size_t i = 0; i < dm.euclidean.values.size(); ++i) {
    loss += std::abs(dm.euclidean.values[i] - dm.hilbert.values[i]);
  }
  return loss;
}

MappingParams random_mapping_params(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  MappingParams p;
  p.thetas.resize(dim);
  for (double& t : p.thetas) t = uniform(rng, 0.0, std::numbers::pi);
  return p;
}

std::vector<FeatureVector> distinct_features(std::span<const FeatureVector> features) {
  std::vector<FeatureVector> out;
  for (const auto& f : features) {
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  }
  return out;
}

MappingTraining train_mapping(std::span<const FeatureVector> features, std::uint64_t seed, long budget) {
  if (features.empty()) throw UsageError("cannot train the encoder on an empty feature set");
  return train_mapping(features, random_mapping_params(features.front().size(), seed), seed, budget);
}

MappingTraining train_mapping(std::span<const FeatureVector> features, const MappingParams& initial,
                              std::uint64_t seed, long budget) {
  if (features.empty()) throw UsageError("cannot train the encoder on an empty feature set");
  const std::size_t dim = initial.dim();
  for (const auto& f : features) {
    if (f.size() != dim) throw UsageError("feature vectors do not match the encoder dimension");
  }

  MappingTraining out;
  out.initial = initial;
  out.trained = out.initial;
  const std::vector<FeatureVector> samples = distinct_features(features);
  if (samples.size() < 2 || dim == 0) return out;

  ObjectiveSpec spec;
  spec.dimension = static_cast<int>(dim);
  spec.budget = budget;
  spec.seed = seed;
  spec.evaluator = [&samples](std::span<const double> thetas) {
    return mapping_loss(samples, MappingParams{{thetas.begin(), thetas.end()}});
  };
  out.optimizer = minimize(spec, out.initial.thetas);
  out.initial_loss = out.optimizer.trace.front();
  if (out.optimizer.status == OptStatus::kNonFiniteObjective) {
    throw MappingTrainingError("encoder training hit a non-finite loss",
                               MappingParams{out.optimizer.best_point});
  }
  out.trained.thetas = out.optimizer.best_point;
  out.final_loss = out.optimizer.best_value;
  out.optimized = true;
  return out;
}

}  // namespace dqgnn
