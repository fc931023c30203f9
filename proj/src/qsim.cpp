#include "dqgnn/qsim.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "dqgnn/errors.hpp"

namespace dqgnn {

namespace {

std::atomic<int> g_max_qubits{kDefaultMaxQubits};

void check_capacity(int qubits) {
  const int limit = max_qubits();
  if (qubits > limit) {
    throw CapacityError("state of " + std::to_string(qubits) + " qubits exceeds the simulator ceiling of " +
                            std::to_string(limit) + " qubits",
                        limit);
  }
}

void check_target(int index, int qubits, const char* role) {
  if (index < 0 || index >= qubits) {
    throw UsageError(std::string(role) + " qubit index " + std::to_string(index) + " out of range for " +
                     std::to_string(qubits) + "-qubit state");
  }
}

// Bit mask of qubit `q` in a `qubits`-wide index (qubit 0 is the MSB).
inline std::size_t bit_of(int q, int qubits) noexcept { return std::size_t{1} << (qubits - 1 - q); }

}  // namespace

int max_qubits() noexcept { return g_max_qubits.load(std::memory_order_relaxed); }

void set_max_qubits(int limit) {
  if (limit < 1 || limit > kHardMaxQubits) {
    throw UsageError("qubit ceiling must be in [1, " + std::to_string(kHardMaxQubits) + "], got " +
                     std::to_string(limit));
  }
  g_max_qubits.store(limit, std::memory_order_relaxed);
}

QuantumState QuantumState::from_amplitudes(std::vector<Complex> amplitudes) {
  const std::size_t n = amplitudes.size();
  if (n < 2 || (n & (n - 1)) != 0) {
    throw UsageError("amplitude count " + std::to_string(n) + " is not a power of two >= 2");
  }
  int qubits = 0;
  while ((std::size_t{1} << qubits) < n) ++qubits;
  check_capacity(qubits);
  QuantumState s(qubits, std::move(amplitudes));
  if (std::abs(s.norm() - 1.0) > 1e-10) {
    throw UsageError("amplitudes are not normalized (norm " + std::to_string(s.norm()) + ")");
  }
  return s;
}

double QuantumState::norm() const noexcept {
  double acc = 0.0;
  for (const auto& a : amplitudes_) acc += std::norm(a);
  return std::sqrt(acc);
}

QuantumState zero_state(int qubits) {
  if (qubits < 1) throw UsageError("zero_state needs at least one qubit, got " + std::to_string(qubits));
  check_capacity(qubits);
  std::vector<Complex> amps(std::size_t{1} << qubits);
  amps[0] = 1.0;
  return QuantumState::unchecked(qubits, std::move(amps));
}

Mat2 rotation_matrix(Axis axis, double angle) noexcept {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  switch (axis) {
    case Axis::X:
      return {Complex(c, 0), Complex(0, -s), Complex(0, -s), Complex(c, 0)};
    case Axis::Y:
      return {Complex(c, 0), Complex(-s, 0), Complex(s, 0), Complex(c, 0)};
    case Axis::Z:
      break;
  }
  return {Complex(c, -s), Complex(0, 0), Complex(0, 0), Complex(c, s)};
}

Mat2 matmul(const Mat2& a, const Mat2& b) noexcept {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

void apply_single_qubit_inplace(std::span<Complex> amplitudes, int qubits, const Mat2& m, int target) {
  check_target(target, qubits, "target");
  const std::size_t bit = bit_of(target, qubits);
  const std::size_t n = amplitudes.size();
  // Walk pairs (i, i|bit) with the target bit clear in i.
  for (std::size_t hi = 0; hi < n; hi += 2 * bit) {
    for (std::size_t i = hi; i < hi + bit; ++i) {
      const Complex a0 = amplitudes[i];
      const Complex a1 = amplitudes[i | bit];
      amplitudes[i] = m[0] * a0 + m[1] * a1;
      amplitudes[i | bit] = m[2] * a0 + m[3] * a1;
    }
  }
}

void apply_cnot_inplace(std::span<Complex> amplitudes, int qubits, int control, int target) {
  check_target(control, qubits, "control");
  check_target(target, qubits, "target");
  if (control == target) {
    throw UsageError("CNOT control and target are both qubit " + std::to_string(control));
  }
  const std::size_t cbit = bit_of(control, qubits);
  const std::size_t tbit = bit_of(target, qubits);
  const std::size_t n = amplitudes.size();
  for (std::size_t i = 0; i < n; ++i) {
    if ((i & cbit) && !(i & tbit)) std::swap(amplitudes[i], amplitudes[i | tbit]);
  }
}

QuantumState apply_rotation(QuantumState state, const RotationGate& gate) {
  apply_single_qubit_inplace(state.mutable_amplitudes(), state.qubit_count(),
                             rotation_matrix(gate.axis, gate.angle), gate.target);
  return state;
}

QuantumState apply_cnot(QuantumState state, const CnotGate& gate) {
  apply_cnot_inplace(state.mutable_amplitudes(), state.qubit_count(), gate.control, gate.target);
  return state;
}

QuantumState tensor_product(const QuantumState& a, const QuantumState& b) {
  check_capacity(a.qubit_count() + b.qubit_count());
  const std::size_t nb = b.dimension();
  std::vector<Complex> out(a.dimension() * nb);
  for (std::size_t i = 0; i < a.dimension(); ++i) {
    for (std::size_t j = 0; j < nb; ++j) out[i * nb + j] = a[i] * b[j];
  }
  return QuantumState::unchecked(a.qubit_count() + b.qubit_count(), std::move(out));
}

Complex inner_product(const QuantumState& a, const QuantumState& b) {
  if (a.qubit_count() != b.qubit_count()) {
    throw UsageError("inner product of " + std::to_string(a.qubit_count()) + "-qubit and " +
                     std::to_string(b.qubit_count()) + "-qubit states");
  }
  Complex acc = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double measurement_entropy(std::span<const Complex> amplitudes) {
  double h = 0.0;
  for (const auto& a : amplitudes) {
    const double p = std::norm(a);
    if (p > 0.0) h -= p * std::log2(p);
  }
  // Rounding can push a basis state a hair below zero.
  return h > 0.0 ? h : 0.0;
}

double measurement_entropy(const QuantumState& state) { return measurement_entropy(state.amplitudes()); }

}  // namespace dqgnn
