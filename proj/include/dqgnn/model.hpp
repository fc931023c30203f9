#pragma once

// DQGNN forward pass and the two-reference entropy classifier.
//
// One Ulayer turns every node into a subgraph state
//     Ucov(center; U1) (x) [ (x)_{mu in N(v)} Ucov(mu; U2) ]
// built on "devices" of at most `capacity` qubits: when the subgraph does not
// fit, the centre forms its own device and the neighbours are split into
// consecutive chunks, each simulated separately and merged by classical
// Kronecker products. Uent entangles qubits within a device only.
//
// Between layers each node's state is collapsed to its measurement entropy,
// scaled by the qubit count to [0, 1] and re-encoded as RY(pi * h)|0>.
// The graph embedding is the sum of final-layer node entropies.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dqgnn/graphdata.hpp"
#include "dqgnn/mapping.hpp"
#include "dqgnn/optim.hpp"
#include "dqgnn/qsim.hpp"

namespace dqgnn {

enum class Entanglement { kFull, kRing, kOff };

std::string to_string(Entanglement mode);
/// Accepts "full", "ring", "off"; throws UsageError otherwise.
Entanglement parse_entanglement(const std::string& text);

/// (theta_x, theta_y, theta_z) in radians.
using AngleTriple = std::array<double, 3>;

struct UlayerParams {
  AngleTriple center_angles{};    // U1
  AngleTriple neighbor_angles{};  // U2, shared by every neighbour

  friend bool operator==(const UlayerParams&, const UlayerParams&) = default;
};

struct ModelParams {
  std::vector<UlayerParams> layers;
  double centroid_0 = 0.0;  // rho_0, bits
  double centroid_1 = 0.0;  // rho_1, bits
  MappingParams mapping;    // frozen encoder

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct ForwardConfig {
  int capacity = 8;  // qubits per device-sized computation
  Entanglement entanglement = Entanglement::kFull;
};

struct GraphEmbedding {
  double value = 0.0;  // bits
};

inline constexpr int kDefaultLayers = 3;
inline constexpr double kHingeMargin = 0.1;
/// Parameter count published for the full model with the trained encoder.
inline constexpr long kPublishedParameterCount = 43;

/// RX(tx) RY(ty) RZ(tz) as one matrix (RZ acts first).
Mat2 ucov_matrix(const AngleTriple& angles) noexcept;

/// Applies RZ, then RY, then RX to a single-qubit state.
QuantumState ucov(const QuantumState& state, const AngleTriple& angles);

/// CNOT schedule of the entangler on `qubits` qubits.
///   full: every pair (i, j), i < j, lexicographic; ring: (i, i+1) then (q-1, 0); off: none.
std::vector<CnotGate> entangler_gates(int qubits, Entanglement mode);

QuantumState uent(QuantumState state, Entanglement mode = Entanglement::kFull);

/// States of each device-sized computation for one subgraph, in merge order.
/// `node_states` is indexed by node id and must hold 1-qubit states.
std::vector<QuantumState> subgraph_device_states(const Subgraph& s, std::span<const QuantumState> node_states,
                                                 const UlayerParams& layer, const ForwardConfig& config);

/// Merged subgraph state on 1 + |N(v)| qubits.
QuantumState subgraph_forward(const Subgraph& s, std::span<const QuantumState> node_states,
                              const UlayerParams& layer, const ForwardConfig& config);

/// Final-layer measurement entropy of every node after all layers.
std::vector<double> node_recursion(const Graph& g, const ModelParams& params, const ForwardConfig& config);

GraphEmbedding graph_embedding(const Graph& g, const ModelParams& params, const ForwardConfig& config);

/// 0 when |rho_0 - h| >= |rho_1 - h|, else 1. A tie goes to label 0, and a graph
/// lands in the class whose reference value is farther away.
int classify(GraphEmbedding h, const ModelParams& params);

/// Mean over graphs of max(0, |h - rho_{1-y}| - |h - rho_y| + margin): zero once
/// classify() is right with `margin` to spare.
double hinge_loss(std::span<const double> embeddings, std::span<const int> labels, double centroid_0,
                  double centroid_1, double margin = kHingeMargin);

double training_loss(std::span<const Graph> graphs, const ModelParams& params, const ForwardConfig& config);

double accuracy(std::span<const Graph> graphs, const ModelParams& params, const ForwardConfig& config);

/// 6 angles per layer + 2 centroids + encoder angles.
long count_parameters(const ModelParams& params);

struct ModelTraining {
  ModelParams initial;
  ModelParams trained;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  OptResult optimizer;
  /// Set when the optimizer stopped on a non-finite loss; `trained` is then the best finite point.
  bool warning = false;
};

/// Fits all layer angles and both centroids; the encoder in `mapping` stays fixed.
/// Angles start uniform in [0, pi] from the seed. rho_0 starts at the mean initial
/// embedding of class 1 and rho_1 at that of class 0, matching the label rule.
ModelTraining train_model(std::span<const Graph> train, const MappingParams& mapping, int layers,
                          const ForwardConfig& config, std::uint64_t seed, long budget);

/// Reduces an angle into [0, 2 pi).
double wrap_angle(double angle) noexcept;

}  // namespace dqgnn
