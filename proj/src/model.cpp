#include "dqgnn/model.hpp"

#include <cmath>
#include <numbers>
#include <optional>

#include "dqgnn/errors.hpp"
#include "dqgnn/random.hpp"

namespace dqgnn {

namespace {

using Qubit = std::array<Complex, 2>;

Qubit transform(const Mat2& m, const Qubit& q) noexcept { return {m[0] * q[0] + m[1] * q[1], m[2] * q[0] + m[3] * q[1]}; }

// RY(pi * h)|0> for a normalized entropy h in [0, 1].
Qubit reencode(double h) noexcept {
  const double half = 0.5 * std::numbers::pi * h;
  return {Complex(std::cos(half), 0.0), Complex(std::sin(half), 0.0)};
}

void check_capacity(int capacity) {
  if (capacity < 1) throw UsageError("device capacity must be >= 1, got " + std::to_string(capacity));
  if (capacity > max_qubits()) {
    throw CapacityError("device capacity " + std::to_string(capacity) + " exceeds the simulator ceiling of " +
                            std::to_string(max_qubits()) + " qubits",
                        max_qubits());
  }
}

// Node groups simulated together: either the whole subgraph, or the centre
// alone followed by consecutive neighbour chunks. Entry -1 marks the centre.
std::vector<std::vector<int>> device_groups(const std::vector<int>& neighbors, int capacity) {
  std::vector<std::vector<int>> groups;
  if (1 + static_cast<long>(neighbors.size()) <= capacity) {
    groups.emplace_back(1, -1);
    groups.back().insert(groups.back().end(), neighbors.begin(), neighbors.end());
    return groups;
  }
  groups.emplace_back(1, -1);
  Subgraph s;
  s.neighbors = neighbors;
  for (auto& chunk : partition_neighbors(s, capacity).chunks) groups.push_back(std::move(chunk));
  return groups;
}

struct Workspace {
  std::vector<Complex> state;
  std::vector<Complex> scratch;
};

// Builds the product of `factors` (first factor most significant), entangles, and returns its entropy.
double device_entropy(std::span<const Qubit> factors, Entanglement mode, Workspace& ws) {
  ws.state.assign(1, Complex(1.0, 0.0));
  for (const Qubit& f : factors) {
    ws.scratch.resize(ws.state.size() * 2);
    for (std::size_t i = 0; i < ws.state.size(); ++i) {
      ws.scratch[2 * i] = ws.state[i] * f[0];
      ws.scratch[2 * i + 1] = ws.state[i] * f[1];
    }
    ws.state.swap(ws.scratch);
  }
  const int q = static_cast<int>(factors.size());
  for (const CnotGate& g : entangler_gates(q, mode)) apply_cnot_inplace(ws.state, q, g.control, g.target);
  return measurement_entropy(ws.state);
}

struct PreparedGraph {
  std::vector<std::vector<int>> adjacency;
  std::vector<Qubit> encoded;
  int label = 0;
};

PreparedGraph prepare(const Graph& g, const MappingParams& mapping) {
  PreparedGraph p;
  p.adjacency = g.adjacency();
  p.label = g.label;
  p.encoded.reserve(g.node_features.size());
  for (const auto& f : g.node_features) {
    const QuantumState s = encode_feature(f, mapping);
    p.encoded.push_back({s[0], s[1]});
  }
  return p;
}

std::vector<double> final_entropies(const PreparedGraph& g, std::span<const UlayerParams> layers,
                                    const ForwardConfig& config, Workspace& ws) {
  const std::size_t n = g.encoded.size();
  std::vector<Qubit> current = g.encoded;
  std::vector<Qubit> centers(n);
  std::vector<Qubit> neighbors(n);
  std::vector<double> entropy(n, 0.0);
  std::vector<Qubit> factors;
  for (std::size_t t = 0; t < layers.size(); ++t) {
    const Mat2 u1 = ucov_matrix(layers[t].center_angles);
    const Mat2 u2 = ucov_matrix(layers[t].neighbor_angles);
    for (std::size_t u = 0; u < n; ++u) {
      centers[u] = transform(u1, current[u]);
      neighbors[u] = transform(u2, current[u]);
    }
    for (std::size_t v = 0; v < n; ++v) {
      double h = 0.0;
      for (const auto& group : device_groups(g.adjacency[v], config.capacity)) {
        factors.clear();
        for (int u : group) factors.push_back(u < 0 ? centers[v] : neighbors[u]);
        h += device_entropy(factors, config.entanglement, ws);
      }
      entropy[v] = h;
    }
    if (t + 1 < layers.size()) {
      for (std::size_t v = 0; v < n; ++v) {
        current[v] = reencode(entropy[v] / static_cast<double>(1 + g.adjacency[v].size()));
      }
    }
  }
  return entropy;
}

double embedding_of(const PreparedGraph& g, std::span<const UlayerParams> layers, const ForwardConfig& config,
                    Workspace& ws) {
  double sum = 0.0;
  for (double h : final_entropies(g, layers, config, ws)) sum += h;
  return sum;
}

void check_layers(const ModelParams& params) {
  if (params.layers.empty()) throw UsageError("model needs at least one Ulayer");
}

}  // namespace

std::string to_string(Entanglement mode) {
  switch (mode) {
    case Entanglement::kFull:
      return "full";
    case Entanglement::kRing:
      return "ring";
    case Entanglement::kOff:
      break;
  }
  return "off";
}

Entanglement parse_entanglement(const std::string& text) {
  if (text == "full") return Entanglement::kFull;
  if (text == "ring") return Entanglement::kRing;
  if (text == "off") return Entanglement::kOff;
  throw UsageError("entanglement must be full, ring or off, got \"" + text + "\"");
}

Mat2 ucov_matrix(const AngleTriple& angles) noexcept {
  return matmul(rotation_matrix(Axis::X, angles[0]),
                matmul(rotation_matrix(Axis::Y, angles[1]), rotation_matrix(Axis::Z, angles[2])));
}

QuantumState ucov(const QuantumState& state, const AngleTriple& angles) {
  if (state.qubit_count() != 1) {
    throw UsageError("Ucov acts on one qubit, got " + std::to_string(state.qubit_count()));
  }
  const Qubit out = transform(ucov_matrix(angles), {state[0], state[1]});
  return QuantumState::unchecked(1, {out[0], out[1]});
}

std::vector<CnotGate> entangler_gates(int qubits, Entanglement mode) {
  std::vector<CnotGate> gates;
  if (qubits < 2 || mode == Entanglement::kOff) return gates;
  if (mode == Entanglement::kFull) {
    for (int i = 0; i < qubits; ++i) {
      for (int j = i + 1; j < qubits; ++j) gates.push_back({i, j});
    }
    return gates;
  }
  for (int i = 0; i + 1 < qubits; ++i) gates.push_back({i, i + 1});
  if (qubits > 2) gates.push_back({qubits - 1, 0});
  return gates;
}

QuantumState uent(QuantumState state, Entanglement mode) {
  for (const CnotGate& g : entangler_gates(state.qubit_count(), mode)) state = apply_cnot(std::move(state), g);
  return state;
}

std::vector<QuantumState> subgraph_device_states(const Subgraph& s, std::span<const QuantumState> node_states,
                                                 const UlayerParams& layer, const ForwardConfig& config) {
  check_capacity(config.capacity);
  auto state_of = [&](int node) -> const QuantumState& {
    if (node < 0 || static_cast<std::size_t>(node) >= node_states.size()) {
      throw UsageError("no input state for node " + std::to_string(node));
    }
    if (node_states[node].qubit_count() != 1) {
      throw UsageError("input state for node " + std::to_string(node) + " is not a single qubit");
    }
    return node_states[node];
  };

  std::vector<QuantumState> devices;
  for (const auto& group : device_groups(s.neighbors, config.capacity)) {
    std::optional<QuantumState> acc;
    for (int u : group) {
      QuantumState q = u < 0 ? ucov(state_of(s.center), layer.center_angles)
                             : ucov(state_of(u), layer.neighbor_angles);
      acc = acc ? tensor_product(*acc, q) : std::move(q);
    }
    devices.push_back(uent(std::move(*acc), config.entanglement));
  }
  return devices;
}

QuantumState subgraph_forward(const Subgraph& s, std::span<const QuantumState> node_states,
                              const UlayerParams& layer, const ForwardConfig& config) {
  std::vector<QuantumState> devices = subgraph_device_states(s, node_states, layer, config);
  QuantumState merged = std::move(devices.front());
  for (std::size_t i = 1; i < devices.size(); ++i) merged = tensor_product(merged, devices[i]);
  return merged;
}

std::vector<double> node_recursion(const Graph& g, const ModelParams& params, const ForwardConfig& config) {
  check_layers(params);
  check_capacity(config.capacity);
  Workspace ws;
  return final_entropies(prepare(g, params.mapping), params.layers, config, ws);
}

GraphEmbedding graph_embedding(const Graph& g, const ModelParams& params, const ForwardConfig& config) {
  double sum = 0.0;
  for (double h : node_recursion(g, params, config)) sum += h;
  return {sum};
}

int classify(GraphEmbedding h, const ModelParams& params) {
  return std::abs(params.centroid_0 - h.value) >= std::abs(params.centroid_1 - h.value) ? 0 : 1;
}

double hinge_loss(std::span<const double> embeddings, std::span<const int> labels, double centroid_0,
                  double centroid_1, double margin) {
  if (embeddings.empty() || embeddings.size() != labels.size()) {
    throw UsageError("hinge loss needs matching, non-empty embeddings and labels");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const double h = embeddings[i];
    // classify() gives label y when h is at least as far from rho_y as from rho_{1-y}.
    const double own = labels[i] == 0 ? centroid_0 : centroid_1;
    const double other = labels[i] == 0 ? centroid_1 : centroid_0;
    total += std::max(0.0, std::abs(h - other) - std::abs(h - own) + margin);
  }
  return total / static_cast<double>(embeddings.size());
}

double training_loss(std::span<const Graph> graphs, const ModelParams& params, const ForwardConfig& config) {
  std::vector<double> h;
  std::vector<int> y;
  for (const Graph& g : graphs) {
    h.push_back(graph_embedding(g, params, config).value);
    y.push_back(g.label);
  }
  return hinge_loss(h, y, params.centroid_0, params.centroid_1);
}

double accuracy(std::span<const Graph> graphs, const ModelParams& params, const ForwardConfig& config) {
  if (graphs.empty()) throw UsageError("accuracy over an empty graph set");
  std::size_t correct = 0;
  for (const Graph& g : graphs) correct += classify(graph_embedding(g, params, config), params) == g.label;
  return static_cast<double>(correct) / static_cast<double>(graphs.size());
}

long count_parameters(const ModelParams& params) {
  return 6 * static_cast<long>(params.layers.size()) + 2 + static_cast<long>(params.mapping.dim());
}

double wrap_angle(double angle) noexcept {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a >= kTwoPi ? 0.0 : a;
}

ModelTraining train_model(std::span<const Graph> train, const MappingParams& mapping, int layers,
                          const ForwardConfig& config, std::uint64_t seed, long budget) {
  if (train.empty()) throw UsageError("cannot train on an empty graph set");
  if (layers < 1) throw UsageError("model needs at least one Ulayer");
  check_capacity(config.capacity);
  for (const Graph& g : train) {
    if (g.feature_dim() != mapping.dim()) {
      throw DataError("graph feature dimension " + std::to_string(g.feature_dim()) +
                      " does not match encoder dimension " + std::to_string(mapping.dim()));
    }
  }

  std::vector<PreparedGraph> prepared;
  std::vector<int> labels;
  prepared.reserve(train.size());
  for (const Graph& g : train) {
    prepared.push_back(prepare(g, mapping));
    labels.push_back(g.label);
  }

  // Layout: per layer (center xyz, neighbour xyz), then centroid_0, centroid_1.
  const auto angle_count = static_cast<std::size_t>(6 * layers);
  auto unpack = [&](std::span<const double> x) {
    std::vector<UlayerParams> out(static_cast<std::size_t>(layers));
    for (std::size_t l = 0; l < out.size(); ++l) {
      for (std::size_t a = 0; a < 3; ++a) {
        out[l].center_angles[a] = wrap_angle(x[6 * l + a]);
        out[l].neighbor_angles[a] = wrap_angle(x[6 * l + 3 + a]);
      }
    }
    return out;
  };
  auto embed_all = [&](std::span<const UlayerParams> ls) {
    Workspace ws;
    std::vector<double> h(prepared.size());
    for (std::size_t i = 0; i < prepared.size(); ++i) h[i] = embedding_of(prepared[i], ls, config, ws);
    return h;
  };

  Rng rng(seed);
  std::vector<double> x0(angle_count + 2);
  for (std::size_t i = 0; i < angle_count; ++i) x0[i] = uniform(rng, 0.0, std::numbers::pi);

  const std::vector<double> h0 = embed_all(unpack(x0));
  double sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < h0.size(); ++i) {
    sum[labels[i]] += h0[i];
    ++count[labels[i]];
  }
  const double overall = (sum[0] + sum[1]) / static_cast<double>(h0.size());
  // Under the label rule each reference sits with the opposite class.
  x0[angle_count] = count[1] ? sum[1] / static_cast<double>(count[1]) : overall;
  x0[angle_count + 1] = count[0] ? sum[0] / static_cast<double>(count[0]) : overall;

  auto to_params = [&](std::span<const double> x) {
    ModelParams p;
    p.layers = unpack(x);
    p.centroid_0 = x[angle_count];
    p.centroid_1 = x[angle_count + 1];
    p.mapping = mapping;
    return p;
  };

  ObjectiveSpec spec;
  spec.dimension = static_cast<int>(x0.size());
  spec.budget = budget;
  spec.seed = seed;
  spec.evaluator = [&](std::span<const double> x) {
    const std::vector<double> h = embed_all(unpack(x));
    return hinge_loss(h, labels, x[angle_count], x[angle_count + 1]);
  };

  ModelTraining out;
  out.initial = to_params(x0);
  out.optimizer = minimize(spec, x0);
  out.initial_loss = out.optimizer.trace.front();
  out.trained = to_params(out.optimizer.best_point);
  out.final_loss = out.optimizer.best_value;
  out.warning = out.optimizer.status == OptStatus::kNonFiniteObjective;
  return out;
}

}  // namespace dqgnn
