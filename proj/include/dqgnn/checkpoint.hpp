#pragma once

// Plain-text model checkpoint. Layout, one record per line:
//
//   dqgnn-checkpoint 1
//   layers <K>
//   layer <i> <center x> <center y> <center z> <neighbor x> <neighbor y> <neighbor z>   (K lines)
//   centroids <rho_0> <rho_1>
//   mapping <d> <theta_1> ... <theta_d>
//   capacity <n>
//   entanglement <full|ring|off>
//   seed <s>
//
// Lines starting with '#' are comments. Reals are written with 17 significant
// digits so a write/read cycle is exact.

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "dqgnn/model.hpp"

namespace dqgnn {

struct Checkpoint {
  ModelParams params;
  ForwardConfig forward;
  std::uint64_t seed = 0;

  friend bool operator==(const Checkpoint& a, const Checkpoint& b) {
    return a.params == b.params && a.forward.capacity == b.forward.capacity &&
           a.forward.entanglement == b.forward.entanglement && a.seed == b.seed;
  }
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// Throws DataError naming the offending line.
Checkpoint read_checkpoint(std::istream& in, const std::string& source = "checkpoint");
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace dqgnn
