#include "hwqsvm/featuremap.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hwqsvm/error.hpp"

namespace hwqsvm {

std::string_view map_kind_name(MapKind kind) noexcept {
  switch (kind) {
    case MapKind::Genome: return "genome";
    case MapKind::Z: return "z";
    case MapKind::ZZ: return "zz";
    case MapKind::Pauli: return "pauli";
    case MapKind::RawVector: return "raw";
    case MapKind::EfficientLike: return "efficient";
  }
  return "?";
}

std::optional<MapKind> parse_map_kind(std::string_view name) {
  for (MapKind k : {MapKind::Genome, MapKind::Z, MapKind::ZZ, MapKind::Pauli, MapKind::RawVector,
                    MapKind::EfficientLike})
    if (map_kind_name(k) == name) return k;
  return std::nullopt;
}

void FeatureMapSpec::validate() const {
  if (n_qubits < 1) throw InvalidParameterError("feature map needs at least one qubit");
  if (reps < 1) throw InvalidParameterError("feature map reps must be >= 1");
}

int amplitude_qubits(std::size_t feature_count) {
  int n = 1;
  while ((std::size_t{1} << n) < feature_count) ++n;
  return n;
}

int map_qubits(const FeatureMapSpec& spec, std::size_t feature_count) {
  return spec.kind == MapKind::RawVector ? amplitude_qubits(feature_count) : spec.n_qubits;
}

Circuit bind_genome(const Genome& genome, std::span<const double> x, bool fixed_rz, int n_qubits) {
  Circuit out;
  out.reserve(genome.size() + (fixed_rz ? static_cast<std::size_t>(n_qubits) : 0));
  if (fixed_rz) {
    if (x.size() < static_cast<std::size_t>(n_qubits))
      throw BindingError("fixed RZ layer needs " + std::to_string(n_qubits) + " features, got " +
                         std::to_string(x.size()));
    for (int q = 0; q < n_qubits; ++q) out.push_back(Gate::one(GateKind::RZ, q, x[static_cast<std::size_t>(q)]));
  }
  for (const GateToken& t : genome.tokens) {
    Gate g{t.kind, t.qubits, 0.0};
    if (is_parametric(t.kind)) {
      if (x.empty()) throw BindingError("data-bound rotation with an empty feature vector");
      const std::size_t f = t.feature ? static_cast<std::size_t>(*t.feature)
                                      : static_cast<std::size_t>(t.qubits[0]) % x.size();
      if (f >= x.size())
        throw BindingError("feature index " + std::to_string(f) + " out of range for dimension " +
                           std::to_string(x.size()));
      g.angle = x[f];
    }
    out.push_back(g);
  }
  return out;
}

namespace {

void z_layer(Circuit& c, std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  for (int q = 0; q < n; ++q) c.push_back(Gate::one(GateKind::H, q));
  for (int q = 0; q < n; ++q) c.push_back(Gate::one(GateKind::P, q, 2.0 * x[static_cast<std::size_t>(q)]));
}

void zz_entangler(Circuit& c, std::span<const double> x) {
  using std::numbers::pi;
  const int n = static_cast<int>(x.size());
  for (int i = 0; i + 1 < n; ++i) {
    const double phi = 2.0 * (pi - x[static_cast<std::size_t>(i)]) * (pi - x[static_cast<std::size_t>(i + 1)]);
    c.push_back(Gate::two(GateKind::CX, i, i + 1));
    c.push_back(Gate::one(GateKind::P, i + 1, phi));
    c.push_back(Gate::two(GateKind::CX, i, i + 1));
  }
}

}  // namespace

PreparedMap build_handcrafted(const FeatureMapSpec& spec, std::span<const double> x) {
  spec.validate();
  if (spec.kind == MapKind::Genome) throw InvalidParameterError("build_handcrafted called with a genome map");

  if (spec.kind == MapKind::RawVector) {
    const std::size_t dim = std::size_t{1} << spec.n_qubits;
    if (x.empty() || x.size() > dim)
      throw BindingError("raw vector of dimension " + std::to_string(x.size()) + " does not fit " +
                         std::to_string(spec.n_qubits) + " qubits");
    double norm2 = 0.0;
    for (double v : x) norm2 += v * v;
    if (!(norm2 > 0.0) || !std::isfinite(norm2)) throw NormalizationError("cannot amplitude-encode a zero vector");
    AmplitudeEncoding enc{spec.n_qubits, std::vector<double>(dim, 0.0)};
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t i = 0; i < x.size(); ++i) enc.amplitudes[i] = x[i] * inv;
    return enc;
  }

  if (x.size() != static_cast<std::size_t>(spec.n_qubits))
    throw BindingError(std::string(map_kind_name(spec.kind)) + " map on " + std::to_string(spec.n_qubits) +
                       " qubits needs " + std::to_string(spec.n_qubits) + " features, got " +
                       std::to_string(x.size()));
  Circuit c;
  for (int r = 0; r < spec.reps; ++r) {
    switch (spec.kind) {
      case MapKind::Z:
        z_layer(c, x);
        break;
      case MapKind::ZZ:
      case MapKind::Pauli:
        z_layer(c, x);
        zz_entangler(c, x);
        break;
      case MapKind::EfficientLike:
        for (int q = 0; q < spec.n_qubits; ++q)
          c.push_back(Gate::one(GateKind::RY, q, x[static_cast<std::size_t>(q)]));
        for (int q = 0; q + 1 < spec.n_qubits; ++q) c.push_back(Gate::two(GateKind::CX, q, q + 1));
        break;
      default:
        break;
    }
  }
  return c;
}

PreparedMap prepare_map(const FeatureMapSpec& spec, std::span<const double> x) {
  if (spec.kind == MapKind::Genome) {
    spec.validate();
    return bind_genome(spec.genome, x, spec.fixed_rz, spec.n_qubits);
  }
  return build_handcrafted(spec, x);
}

}  // namespace hwqsvm
