#pragma once

// Dense statevector simulator: the gate algebra, products and readouts the
// rest of the pipeline is built on.
//
// Qubit ordering: qubit 0 is the most significant bit of an amplitude index,
// so in a tensor product the first factor occupies the high-order positions.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace dqgnn {

using Complex = std::complex<double>;

/// Row-major 2x2 complex matrix {m00, m01, m10, m11}.
using Mat2 = std::array<Complex, 4>;

enum class Axis { X, Y, Z };

struct RotationGate {
  Axis axis;
  double angle;  // radians
  int target;
};

struct CnotGate {
  int control;
  int target;
};

inline constexpr int kDefaultMaxQubits = 12;
inline constexpr int kHardMaxQubits = 26;

/// Process-wide qubit ceiling applied to every state constructed by the simulator.
int max_qubits() noexcept;
/// Throws UsageError outside [1, kHardMaxQubits].
void set_max_qubits(int limit);

class QuantumState {
 public:
  /// Validates that the length is a power of two within the ceiling and the norm is 1 within 1e-10.
  static QuantumState from_amplitudes(std::vector<Complex> amplitudes);

  /// Adopts amplitudes without validation. The caller guarantees both invariants.
  static QuantumState unchecked(int qubits, std::vector<Complex> amplitudes) {
    return QuantumState(qubits, std::move(amplitudes));
  }

  int qubit_count() const noexcept { return qubits_; }
  std::size_t dimension() const noexcept { return amplitudes_.size(); }
  std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }
  const Complex& operator[](std::size_t i) const noexcept { return amplitudes_[i]; }

  double norm() const noexcept;

  /// Mutable access for in-place gate application on a state the caller owns.
  std::vector<Complex>& mutable_amplitudes() noexcept { return amplitudes_; }

  friend bool operator==(const QuantumState&, const QuantumState&) = default;

 private:
  QuantumState(int qubits, std::vector<Complex> amplitudes)
      : qubits_(qubits), amplitudes_(std::move(amplitudes)) {}

  int qubits_ = 0;
  std::vector<Complex> amplitudes_;
};

/// |0...0> on `qubits` qubits.
QuantumState zero_state(int qubits);

/// Half-angle rotation matrices:
///   RX = [[c, -is], [-is, c]], RY = [[c, -s], [s, c]], RZ = diag(e^{-it/2}, e^{it/2}).
Mat2 rotation_matrix(Axis axis, double angle) noexcept;

/// a * b (a applied after b).
Mat2 matmul(const Mat2& a, const Mat2& b) noexcept;

/// Applies a 2x2 unitary to `target` in place.
void apply_single_qubit_inplace(std::span<Complex> amplitudes, int qubits, const Mat2& m, int target);
/// Flips `target` on every basis index whose `control` bit is set, in place.
void apply_cnot_inplace(std::span<Complex> amplitudes, int qubits, int control, int target);

QuantumState apply_rotation(QuantumState state, const RotationGate& gate);
QuantumState apply_cnot(QuantumState state, const CnotGate& gate);

/// Kronecker product a (x) b; throws CapacityError past the ceiling.
QuantumState tensor_product(const QuantumState& a, const QuantumState& b);

/// <a|b> = sum conj(a_i) b_i.
Complex inner_product(const QuantumState& a, const QuantumState& b);

/// Shannon entropy in bits of the computational-basis outcome distribution.
double measurement_entropy(const QuantumState& state);
double measurement_entropy(std::span<const Complex> amplitudes);

}  // namespace dqgnn
