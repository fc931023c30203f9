#include <doctest.h>

#include <map>
#include <numbers>
#include <numeric>

#include "dqgnn/errors.hpp"
#include "dqgnn/graphdata.hpp"
#include "dqgnn/model.hpp"
#include "test_support.hpp"

using namespace dqgnn;
using testing::max_abs_diff;

namespace {

using Amps = std::vector<Complex>;

Amps kron(const Amps& a, const Amps& b) {
  Amps out;
  for (const Complex& x : a)
    for (const Complex& y : b) out.push_back(x * y);
  return out;
}

Amps oracle_ucov(const Amps& v, const AngleTriple& t) {
  return testing::matvec2(testing::rx(t[0]), testing::matvec2(testing::ry(t[1]), testing::matvec2(testing::rz(t[2]), v)));
}

Amps oracle_encode(const FeatureVector& x, const std::vector<double>& thetas) {
  Amps v = {1.0, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = thetas[i] * x[i];
    v = testing::matvec2(i % 3 == 0 ? testing::rx(a) : i % 3 == 1 ? testing::ry(a) : testing::rz(a), v);
  }
  return v;
}

/// CNOT on an amplitude vector by explicit index relabelling (qubit 0 = most significant bit).
Amps oracle_cnot(const Amps& v, int q, int control, int target) {
  Amps out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t cbit = std::size_t{1} << (q - 1 - control);
    const std::size_t tbit = std::size_t{1} << (q - 1 - target);
    out[(i & cbit) ? (i ^ tbit) : i] = v[i];
  }
  return out;
}

Amps oracle_entangle(Amps v, int q, Entanglement mode) {
  if (mode == Entanglement::kFull) {
    for (int i = 0; i < q; ++i)
      for (int j = i + 1; j < q; ++j) v = oracle_cnot(v, q, i, j);
  } else if (mode == Entanglement::kRing && q >= 2) {
    for (int i = 0; i + 1 < q; ++i) v = oracle_cnot(v, q, i, i + 1);
    if (q > 2) v = oracle_cnot(v, q, q - 1, 0);
  }
  return v;
}

double oracle_entropy(const Amps& v) {
  double h = 0.0;
  for (const Complex& a : v) {
    const double p = std::norm(a);
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

/// Whole forward pass written out directly.
std::vector<double> oracle_recursion(const Graph& g, const ModelParams& p, const ForwardConfig& c) {
  const int n = g.node_count;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& [u, v] : g.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());

  std::vector<Amps> states;
  for (const auto& f : g.node_features) states.push_back(oracle_encode(f, p.mapping.thetas));
  std::vector<double> entropy(static_cast<std::size_t>(n));
  for (std::size_t t = 0; t < p.layers.size(); ++t) {
    for (int v = 0; v < n; ++v) {
      const Amps center = oracle_ucov(states[v], p.layers[t].center_angles);
      std::vector<std::vector<Amps>> devices;
      if (1 + static_cast<int>(adj[v].size()) <= c.capacity) {
        devices.push_back({center});
        for (int u : adj[v]) devices.back().push_back(oracle_ucov(states[u], p.layers[t].neighbor_angles));
      } else {
        devices.push_back({center});
        for (std::size_t k = 0; k < adj[v].size(); ++k) {
          if (k % static_cast<std::size_t>(c.capacity) == 0) devices.emplace_back();
          devices.back().push_back(oracle_ucov(states[adj[v][k]], p.layers[t].neighbor_angles));
        }
      }
      double h = 0.0;
      for (const auto& dev : devices) {
        Amps s = {1.0};
        for (const Amps& f : dev) s = kron(s, f);
        h += oracle_entropy(oracle_entangle(s, static_cast<int>(dev.size()), c.entanglement));
      }
      entropy[v] = h;
    }
    for (int v = 0; v < n; ++v) {
      const double scaled = entropy[v] / (1.0 + static_cast<double>(adj[v].size()));
      states[v] = {std::cos(std::numbers::pi * scaled / 2), std::sin(std::numbers::pi * scaled / 2)};
    }
  }
  return entropy;
}

ModelParams random_params(std::mt19937_64& rng, int layers, std::size_t dim) {
  std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
  ModelParams p;
  p.layers.resize(static_cast<std::size_t>(layers));
  for (auto& l : p.layers) {
    for (double& a : l.center_angles) a = angle(rng);
    for (double& a : l.neighbor_angles) a = angle(rng);
  }
  p.mapping.thetas.resize(dim);
  for (double& t : p.mapping.thetas) t = angle(rng) / 2;
  return p;
}

UlayerParams random_layer(std::mt19937_64& rng) {
  return random_params(rng, 1, 0).layers[0];
}

struct RandomSubgraph {
  Subgraph subgraph;
  std::vector<QuantumState> states;
};

RandomSubgraph random_subgraph(std::mt19937_64& rng, int max_degree) {
  RandomSubgraph r;
  const int degree = static_cast<int>(rng() % static_cast<unsigned>(max_degree + 1));
  const int nodes = degree + 1 + static_cast<int>(rng() % 3);
  for (int k = 0; k < nodes; ++k) r.states.push_back(testing::random_state(rng, 1));
  std::vector<int> ids(static_cast<std::size_t>(nodes));
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  r.subgraph.center = ids[0];
  r.subgraph.neighbors.assign(ids.begin() + 1, ids.begin() + 1 + degree);
  std::sort(r.subgraph.neighbors.begin(), r.subgraph.neighbors.end());
  return r;
}

Graph random_graph(std::mt19937_64& rng, int nodes, int dim, double edge_probability) {
  std::bernoulli_distribution edge(edge_probability);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < nodes; ++i)
    for (int j = i + 1; j < nodes; ++j)
      if (edge(rng)) edges.emplace_back(i, j);
  std::vector<FeatureVector> features(static_cast<std::size_t>(nodes), FeatureVector(static_cast<std::size_t>(dim)));
  for (auto& f : features) f[rng() % static_cast<unsigned>(dim)] = 1.0;
  return make_graph(nodes, edges, std::move(features), static_cast<int>(rng() % 2));
}

Graph relabel(const Graph& g, const std::vector<int>& perm) {
  std::vector<std::pair<int, int>> edges;
  for (const auto& [u, v] : g.edges) edges.emplace_back(perm[u], perm[v]);
  std::vector<FeatureVector> features(g.node_features.size());
  for (std::size_t k = 0; k < features.size(); ++k) features[perm[k]] = g.node_features[k];
  return make_graph(g.node_count, edges, std::move(features), g.label);
}

int literal_label_rule(double h, double rho0, double rho1) {
  if (std::abs(rho0 - h) >= std::abs(rho1 - h)) return 0;
  return 1;
}

const ForwardConfig kOff{8, Entanglement::kOff};

}  // namespace

TEST_CASE("entanglement names") {
  CHECK(parse_entanglement("full") == Entanglement::kFull);
  CHECK(parse_entanglement("ring") == Entanglement::kRing);
  CHECK(parse_entanglement("off") == Entanglement::kOff);
  CHECK(to_string(Entanglement::kRing) == "ring");
  CHECK_THROWS_AS(parse_entanglement("all"), UsageError);
}

TEST_CASE("ucov examples") {
  std::mt19937_64 rng(1);
  const auto s = testing::random_state(rng, 1);
  CHECK(max_abs_diff(ucov(s, {0.0, 0.0, 0.0}), s) < 1e-15);

  const auto one = ucov(zero_state(1), {0.0, std::numbers::pi, 0.0});
  CHECK(std::abs(one[0]) < 1e-15);
  CHECK(std::abs(std::abs(one[1]) - 1.0) < 1e-15);

  std::uniform_real_distribution<double> angle(-7.0, 7.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto in = testing::random_state(rng, 1);
    const AngleTriple t = {angle(rng), angle(rng), angle(rng)};
    const auto out = ucov(in, t);
    const auto o = oracle_ucov({in[0], in[1]}, t);
    REQUIRE(std::abs(out[0] - o[0]) < 1e-12);
    REQUIRE(std::abs(out[1] - o[1]) < 1e-12);
    REQUIRE(std::abs(out.norm() - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(ucov(zero_state(2), AngleTriple{}), UsageError);
}

TEST_CASE("uent examples") {
  std::mt19937_64 rng(2);
  const auto s = testing::random_state(rng, 1);
  CHECK(uent(s) == s);

  auto basis = [](int q, std::size_t i) {
    std::vector<Complex> a(std::size_t{1} << q);
    a[i] = 1.0;
    return QuantumState::from_amplitudes(a);
  };
  CHECK(uent(basis(2, 0b10)) == basis(2, 0b11));
  // |100> -> CNOT(0,1) |110> -> CNOT(0,2) |111> -> CNOT(1,2) |110>
  CHECK(uent(basis(3, 0b100)) == basis(3, 0b110));

  for (Entanglement mode : {Entanglement::kFull, Entanglement::kRing, Entanglement::kOff}) {
    for (int q = 1; q <= 6; ++q) {
      const auto r = testing::random_state(rng, q);
      const auto o = oracle_entangle({r.amplitudes().begin(), r.amplitudes().end()}, q, mode);
      REQUIRE(max_abs_diff(uent(r, mode), QuantumState::from_amplitudes(o)) == 0.0);
    }
  }
  CHECK(entangler_gates(2, Entanglement::kRing).size() == 1);
  CHECK(entangler_gates(4, Entanglement::kRing).size() == 4);
  CHECK(entangler_gates(4, Entanglement::kFull).size() == 6);
}

TEST_CASE("subgraph_forward examples") {
  std::mt19937_64 rng(3);
  const auto layer = random_layer(rng);
  std::vector<QuantumState> states;
  for (int k = 0; k < 7; ++k) states.push_back(testing::random_state(rng, 1));

  Subgraph lone;
  lone.center = 2;
  const auto single = subgraph_forward(lone, states, layer, {});
  CHECK(single.qubit_count() == 1);
  CHECK(max_abs_diff(single, ucov(states[2], layer.center_angles)) < 1e-15);

  Subgraph three;
  three.center = 0;
  three.neighbors = {1, 2};
  const std::vector<QuantumState> zeros(3, zero_state(1));
  CHECK(max_abs_diff(subgraph_forward(three, zeros, UlayerParams{}, {3, Entanglement::kOff}), zero_state(3)) < 1e-15);

  Subgraph six;
  six.center = 0;
  six.neighbors = {1, 2, 3, 4, 5};
  const auto chunked = subgraph_forward(six, states, layer, {3, Entanglement::kOff});
  const auto whole = subgraph_forward(six, states, layer, {8, Entanglement::kOff});
  CHECK(chunked.qubit_count() == 6);
  CHECK(max_abs_diff(chunked, whole) < 1e-10);

  CHECK(subgraph_device_states(six, states, layer, {3, Entanglement::kFull}).size() == 3);
  CHECK(subgraph_device_states(six, states, layer, {6, Entanglement::kFull}).size() == 1);

  Subgraph missing = six;
  missing.neighbors.push_back(9);
  CHECK_THROWS_AS(subgraph_forward(missing, states, layer, {}), UsageError);
  CHECK_THROWS_AS(subgraph_forward(six, states, layer, {0, Entanglement::kOff}), UsageError);
}

TEST_CASE("property: chunked and unchunked forward agree without entanglement") {
  std::mt19937_64 rng(2718);
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = random_subgraph(rng, 8);
    const auto layer = random_layer(rng);
    const int qubits = 1 + static_cast<int>(r.subgraph.neighbors.size());
    const auto whole = subgraph_forward(r.subgraph, r.states, layer, {qubits, Entanglement::kOff});
    for (int capacity = 1; capacity <= 4; ++capacity) {
      const auto chunked = subgraph_forward(r.subgraph, r.states, layer, {capacity, Entanglement::kOff});
      REQUIRE(chunked.qubit_count() == qubits);
      REQUIRE(max_abs_diff(chunked, whole) < 1e-10);
    }
  }
}

TEST_CASE("property: subgraph state has one qubit per node for every capacity and mode") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = random_subgraph(rng, 10);
    const auto layer = random_layer(rng);
    for (Entanglement mode : {Entanglement::kFull, Entanglement::kRing, Entanglement::kOff}) {
      for (int capacity = 1; capacity <= 12; ++capacity) {
        const auto s = subgraph_forward(r.subgraph, r.states, layer, {capacity, mode});
        REQUIRE(s.qubit_count() == 1 + static_cast<int>(r.subgraph.neighbors.size()));
        REQUIRE(std::abs(s.norm() - 1.0) < 1e-10);
      }
    }
  }
}

TEST_CASE("property: distinct nodes give distinct subgraph states") {
  std::mt19937_64 rng(31337);
  const std::size_t dim = 4;
  int separated = 0;
  const int trials = 400;
  for (int trial = 0; trial < trials; ++trial) {
    const auto p = random_params(rng, 1, dim);
    // Two subgraphs over the same node pool that differ in a feature or in the neighbour multiset.
    std::vector<FeatureVector> features(6, FeatureVector(dim, 0.0));
    for (auto& f : features) f[rng() % dim] = 1.0;
    Subgraph a{0, {1, 2}, {}, {}};
    Subgraph b = a;
    std::vector<FeatureVector> features_b = features;
    if (trial % 2 == 0) {
      const std::size_t old = static_cast<std::size_t>(std::find(features[0].begin(), features[0].end(), 1.0) -
                                                       features[0].begin());
      features_b[0] = FeatureVector(dim, 0.0);
      features_b[0][(old + 1 + rng() % (dim - 1)) % dim] = 1.0;
    } else {
      b.neighbors = {1, 2, 3};
      features_b[3] = features[2];
    }
    std::vector<QuantumState> sa, sb;
    for (const auto& f : features) sa.push_back(encode_feature(f, p.mapping));
    for (const auto& f : features_b) sb.push_back(encode_feature(f, p.mapping));
    const auto xa = subgraph_forward(a, sa, p.layers[0], kOff);
    const auto xb = subgraph_forward(b, sb, p.layers[0], kOff);
    if (max_abs_diff(xa, xb) > 1e-8) ++separated;
  }
  CHECK(separated >= trials * 95 / 100);
}

TEST_CASE("node_recursion examples") {
  ModelParams zero;
  zero.layers.resize(1);
  zero.mapping.thetas = {0.7, 1.1};
  const Graph lone = make_graph(1, {}, {{0.0, 0.0}}, 0);
  CHECK(node_recursion(lone, zero, {}) == std::vector<double>{0.0});

  // Zero angles and zero features keep every state a basis state through all layers.
  ModelParams deep = zero;
  deep.layers.resize(3);
  const Graph flat = make_graph(4, {{0, 1}, {1, 2}, {1, 3}}, std::vector<FeatureVector>(4, {0.0, 0.0}), 0);
  for (double h : node_recursion(flat, deep, {})) CHECK(h == 0.0);
  CHECK(graph_embedding(flat, deep, {}).value == 0.0);

  CHECK_THROWS_AS(node_recursion(flat, ModelParams{}, {}), UsageError);
}

TEST_CASE("node_recursion matches the direct computation on a 3-node path") {
  std::mt19937_64 rng(4);
  const Graph path = testing::path_graph(3, 3, 0);
  for (int layers : {1, 2, 3}) {
    const auto p = random_params(rng, layers, 3);
    for (Entanglement mode : {Entanglement::kFull, Entanglement::kOff}) {
      for (int capacity : {1, 2, 3}) {
        const ForwardConfig c{capacity, mode};
        const auto got = node_recursion(path, p, c);
        const auto want = oracle_recursion(path, p, c);
        REQUIRE(got.size() == 3);
        for (std::size_t v = 0; v < 3; ++v) CHECK(got[v] == doctest::Approx(want[v]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("graph_embedding on MUTAG matches the node-wise sum") {
  const Dataset d = parse_tudataset(std::filesystem::path(DQGNN_DATA_DIR) / "MUTAG", "MUTAG");
  std::mt19937_64 rng(17);
  for (std::size_t gi : {std::size_t{0}, std::size_t{1}, std::size_t{57}}) {
    const Graph& g = d.graphs[gi];
    const auto p = random_params(rng, 3, 7);
    for (const ForwardConfig& c : {ForwardConfig{}, ForwardConfig{2, Entanglement::kRing}}) {
      const auto want = oracle_recursion(g, p, c);
      const double sum = std::accumulate(want.begin(), want.end(), 0.0);
      CHECK(graph_embedding(g, p, c).value == doctest::Approx(sum).epsilon(1e-12));
    }
  }

  const Graph single = make_graph(1, {}, {{1.0, 0.0, 0.0}}, 0);
  const auto p = random_params(rng, 2, 3);
  CHECK(graph_embedding(single, p, {}).value == node_recursion(single, p, {})[0]);
}

TEST_CASE("property: embeddings are non-negative and ignore the entangler") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 60; ++trial) {
    const Graph g = random_graph(rng, 2 + static_cast<int>(rng() % 12), 3, 0.35);
    const auto p = random_params(rng, 1 + static_cast<int>(rng() % 3), 3);
    const int capacity = 1 + static_cast<int>(rng() % 8);
    const double off = graph_embedding(g, p, {capacity, Entanglement::kOff}).value;
    CHECK(off >= 0.0);
    // CNOTs permute basis amplitudes, so measurement entropy cannot change.
    CHECK(graph_embedding(g, p, {capacity, Entanglement::kFull}).value == doctest::Approx(off).epsilon(1e-12));
    CHECK(graph_embedding(g, p, {capacity, Entanglement::kRing}).value == doctest::Approx(off).epsilon(1e-12));
  }
}

TEST_CASE("property: node relabelling leaves the embedding unchanged") {
  std::mt19937_64 rng(56);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 12);
    const Graph g = random_graph(rng, n, 4, 0.3);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto p = random_params(rng, 3, 4);
    const ForwardConfig c{1 + static_cast<int>(rng() % 8), Entanglement::kOff};
    CHECK(std::abs(graph_embedding(relabel(g, perm), p, c).value - graph_embedding(g, p, c).value) < 1e-10);
  }
}

TEST_CASE("classify examples") {
  ModelParams p;
  p.centroid_0 = 0.0;
  p.centroid_1 = 10.0;
  CHECK(classify({1.0}, p) == 1);
  CHECK(classify({9.0}, p) == 0);
  CHECK(classify({5.0}, p) == 0);
  p.centroid_1 = 0.0;
  CHECK(classify({3.0}, p) == 0);
  CHECK(classify({-3.0}, p) == 0);
}

TEST_CASE("property: classify agrees with the literal label rule") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  int ties = 0;
  for (int trial = 0; trial < 100000; ++trial) {
    double rho0 = u(rng), rho1 = u(rng), h = u(rng);
    switch (trial % 4) {
      case 0:  // exact midpoint on a dyadic grid
        rho0 = std::round(rho0);
        rho1 = std::round(rho1);
        h = (rho0 + rho1) / 2;
        break;
      case 1:
        rho1 = rho0;
        break;
      default:
        break;
    }
    if (std::abs(rho0 - h) == std::abs(rho1 - h)) ++ties;
    ModelParams p;
    p.centroid_0 = rho0;
    p.centroid_1 = rho1;
    REQUIRE(classify({h}, p) == literal_label_rule(h, rho0, rho1));
  }
  CHECK(ties >= 50000);
}

TEST_CASE("hinge_loss examples") {
  const std::vector<double> h = {0.5, 2.0, 3.5, 5.0};
  const std::vector<int> y = {0, 1, 0, 1};
  // Equal references tie every graph: loss is the margin.
  CHECK(hinge_loss(h, y, 1.0, 1.0) == doctest::Approx(kHingeMargin));
  // Each graph sits on the reference that classify() maps to its own label.
  const std::vector<double> placed = {7.0, 1.0, 7.0, 1.0};
  CHECK(hinge_loss(placed, y, 1.0, 7.0) == 0.0);
  CHECK(classify({7.0}, ModelParams{{}, 1.0, 7.0, {}}) == 0);

  double total = 0.0;
  const double rho[2] = {1.5, 4.0};
  for (std::size_t i = 0; i < h.size(); ++i) {
    total += std::max(0.0, std::abs(h[i] - rho[1 - y[i]]) - std::abs(h[i] - rho[y[i]]) + 0.1);
  }
  CHECK(hinge_loss(h, y, 1.5, 4.0) == doctest::Approx(total / 4));
  CHECK_THROWS_AS(hinge_loss(std::vector<double>{}, std::vector<int>{}, 0.0, 1.0), UsageError);
}

TEST_CASE("training_loss and accuracy use the forward pass") {
  std::mt19937_64 rng(6);
  std::vector<Graph> graphs;
  for (int k = 0; k < 4; ++k) graphs.push_back(random_graph(rng, 3 + k, 2, 0.5));
  auto p = random_params(rng, 2, 2);
  p.centroid_0 = 1.0;
  p.centroid_1 = 2.5;
  std::vector<double> h;
  std::vector<int> y;
  int correct = 0;
  for (const Graph& g : graphs) {
    h.push_back(graph_embedding(g, p, {}).value);
    y.push_back(g.label);
    correct += classify({h.back()}, p) == g.label;
  }
  CHECK(training_loss(graphs, p, {}) == hinge_loss(h, y, 1.0, 2.5));
  CHECK(accuracy(graphs, p, {}) == doctest::Approx(correct / 4.0));
}

TEST_CASE("count_parameters") {
  ModelParams p;
  p.layers.resize(3);
  p.mapping.thetas.resize(7);
  CHECK(count_parameters(p) == 27);
  p.layers.resize(1);
  p.mapping.thetas.resize(1);
  CHECK(count_parameters(p) == 9);
  p.layers.resize(3);
  p.mapping.thetas.clear();
  CHECK(count_parameters(p) == 20);
  CHECK(kPublishedParameterCount == 43);
}

TEST_CASE("wrap_angle") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(2 * std::numbers::pi) == doctest::Approx(0.0));
  CHECK(wrap_angle(-0.5) == doctest::Approx(2 * std::numbers::pi - 0.5));
  CHECK(wrap_angle(7.0) == doctest::Approx(7.0 - 2 * std::numbers::pi));
  for (double a = -30.0; a < 30.0; a += 0.37) {
    const double w = wrap_angle(a);
    CHECK(w >= 0.0);
    CHECK(w < 2 * std::numbers::pi);
  }
}

TEST_CASE("train_model with budget 0 keeps the initialization") {
  std::mt19937_64 rng(7);
  std::vector<Graph> graphs;
  for (int k = 0; k < 6; ++k) graphs.push_back(random_graph(rng, 3 + k, 2, 0.5));
  const MappingParams m{{0.4, 1.9}};
  const auto t = train_model(graphs, m, 3, {}, 5, 0);
  CHECK(t.trained == t.initial);
  CHECK(t.trained.layers.size() == 3);
  CHECK(t.trained.mapping == m);
  for (const auto& l : t.trained.layers) {
    for (double a : l.center_angles) CHECK((a >= 0.0 && a <= std::numbers::pi));
    for (double a : l.neighbor_angles) CHECK((a >= 0.0 && a <= std::numbers::pi));
  }
  // rho_0 starts at the class-1 mean embedding and rho_1 at the class-0 mean.
  double sum[2] = {0, 0};
  int count[2] = {0, 0};
  for (const Graph& g : graphs) {
    sum[g.label] += graph_embedding(g, t.initial, {}).value;
    ++count[g.label];
  }
  REQUIRE(count[0] > 0);
  REQUIRE(count[1] > 0);
  CHECK(t.initial.centroid_0 == doctest::Approx(sum[1] / count[1]));
  CHECK(t.initial.centroid_1 == doctest::Approx(sum[0] / count[0]));
  CHECK(t.initial_loss == doctest::Approx(training_loss(graphs, t.initial, {})));
  CHECK(train_model(graphs, m, 3, {}, 5, 0).trained == t.trained);

  const Graph wrong_dim = make_graph(1, {}, {{1.0}}, 0);
  CHECK_THROWS_AS(train_model(std::vector<Graph>{wrong_dim}, m, 3, {}, 5, 0), DataError);
  CHECK_THROWS_AS(train_model(graphs, m, 0, {}, 5, 0), UsageError);
}

TEST_CASE("train_model separates a toy set") {
  // Class follows the node count; embeddings grow with size.
  std::vector<Graph> graphs;
  for (int k = 0; k < 5; ++k) {
    graphs.push_back(testing::path_graph(2 + k % 2, 2, 0));
    graphs.push_back(testing::path_graph(8 + k % 3, 2, 1));
  }
  const MappingParams m{{1.2, 0.8}};
  const auto t = train_model(graphs, m, 3, {}, 3, 300);
  CHECK(t.final_loss <= t.initial_loss);
  CHECK(accuracy(graphs, t.trained, {}) == 1.0);
  CHECK(training_loss(graphs, t.trained, {}) == doctest::Approx(t.final_loss).epsilon(1e-12));
}

TEST_CASE("train_model on a MUTAG fold does not end above its start") {
  const Dataset d = parse_tudataset(std::filesystem::path(DQGNN_DATA_DIR) / "MUTAG", "MUTAG");
  std::vector<Graph> train;
  for (std::size_t i = 0; i < d.graphs.size(); ++i)
    if (i % 10 != 0) train.push_back(d.graphs[i]);
  const auto m = random_mapping_params(7, 1);
  const auto t = train_model(train, m, 3, {}, 9, 2000);
  CHECK(t.final_loss <= t.initial_loss);
  CHECK(t.optimizer.evaluations_used <= 2000);
  CHECK_FALSE(t.warning);
}
