#include "dqgnn/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>

#include "dqgnn/errors.hpp"

namespace dqgnn {

namespace {

constexpr const char* kMagic = "dqgnn-checkpoint";
constexpr int kVersion = 1;

class RecordReader {
 public:
  RecordReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // Next non-comment record, which must start with `key`.
  std::istringstream expect(const std::string& key) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream fields(line);
      std::string word;
      fields >> word;
      if (word != key) fail("expected \"" + key + "\" record, found \"" + word + "\"");
      return fields;
    }
    fail("unexpected end of file, expected \"" + key + "\" record");
  }

  template <typename T>
  T read(std::istringstream& fields, const char* what) {
    T value{};
    if constexpr (std::is_unsigned_v<T>) {
      fields >> std::ws;
      if (fields.peek() == '-') fail(std::string("negative ") + what);
    }
    if (!(fields >> value)) fail(std::string("malformed ") + what);
    if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(value)) fail(std::string("non-finite ") + what);
    }
    return value;
  }

  void end_of_record(std::istringstream& fields) {
    std::string extra;
    if (fields >> extra) fail("trailing token \"" + extra + "\"");
  }

  [[noreturn]] void fail(const std::string& detail) const {
    throw DataError(source_ + ":" + std::to_string(line_no_) + ": " + detail);
  }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_no_ = 0;
};

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out.precision(17);
  out << "# fields: layers K | K x layer i cx cy cz nx ny nz | centroids rho0 rho1 | mapping d theta... | "
         "capacity n | entanglement mode | seed s\n";
  out << kMagic << ' ' << kVersion << '\n';
  out << "layers " << ckpt.params.layers.size() << '\n';
  for (std::size_t i = 0; i < ckpt.params.layers.size(); ++i) {
    const auto& l = ckpt.params.layers[i];
    out << "layer " << i;
    for (double a : l.center_angles) out << ' ' << a;
    for (double a : l.neighbor_angles) out << ' ' << a;
    out << '\n';
  }
  out << "centroids " << ckpt.params.centroid_0 << ' ' << ckpt.params.centroid_1 << '\n';
  out << "mapping " << ckpt.params.mapping.dim();
  for (double t : ckpt.params.mapping.thetas) out << ' ' << t;
  out << '\n';
  out << "capacity " << ckpt.forward.capacity << '\n';
  out << "entanglement " << to_string(ckpt.forward.entanglement) << '\n';
  out << "seed " << ckpt.seed << '\n';
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  write_checkpoint(out, ckpt);
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint read_checkpoint(std::istream& in, const std::string& source) {
  RecordReader r(in, source);
  Checkpoint ckpt;

  auto header = r.expect(kMagic);
  if (r.read<int>(header, "version") != kVersion) r.fail("unsupported checkpoint version");
  r.end_of_record(header);

  auto layers = r.expect("layers");
  const long k = r.read<long>(layers, "layer count");
  if (k < 1) r.fail("layer count must be >= 1");
  r.end_of_record(layers);
  for (long i = 0; i < k; ++i) {
    auto rec = r.expect("layer");
    if (r.read<long>(rec, "layer index") != i) r.fail("layer records out of order");
    UlayerParams l;
    for (double& a : l.center_angles) a = r.read<double>(rec, "angle");
    for (double& a : l.neighbor_angles) a = r.read<double>(rec, "angle");
    r.end_of_record(rec);
    ckpt.params.layers.push_back(l);
  }

  auto centroids = r.expect("centroids");
  ckpt.params.centroid_0 = r.read<double>(centroids, "centroid");
  ckpt.params.centroid_1 = r.read<double>(centroids, "centroid");
  r.end_of_record(centroids);

  auto mapping = r.expect("mapping");
  const long d = r.read<long>(mapping, "mapping dimension");
  if (d < 0) r.fail("negative mapping dimension");
  for (long i = 0; i < d; ++i) ckpt.params.mapping.thetas.push_back(r.read<double>(mapping, "mapping angle"));
  r.end_of_record(mapping);

  auto capacity = r.expect("capacity");
  ckpt.forward.capacity = r.read<int>(capacity, "capacity");
  if (ckpt.forward.capacity < 1) r.fail("capacity must be >= 1");
  r.end_of_record(capacity);

  auto ent = r.expect("entanglement");
  try {
    ckpt.forward.entanglement = parse_entanglement(r.read<std::string>(ent, "entanglement mode"));
  } catch (const UsageError& e) {
    r.fail(e.what());
  }
  r.end_of_record(ent);

  auto seed = r.expect("seed");
  ckpt.seed = r.read<std::uint64_t>(seed, "seed");
  r.end_of_record(seed);
  return ckpt;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return read_checkpoint(in, path.string());
}

}  // namespace dqgnn
