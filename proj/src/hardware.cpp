#include "hwqsvm/hardware.hpp"

#include <algorithm>
#include <fstream>
#include <numbers>
#include <sstream>

#include "hwqsvm/error.hpp"

namespace hwqsvm {

CouplingMap::CouplingMap(int n_qubits, std::vector<std::pair<int, int>> edges) : n_qubits_(n_qubits) {
  if (n_qubits < 1) throw TopologyError("coupling map needs at least one qubit");
  for (auto [a, b] : edges) {
    if (a == b) throw TopologyError("coupling map self-loop on qubit " + std::to_string(a));
    if (a < 0 || b < 0 || a >= n_qubits || b >= n_qubits)
      throw TopologyError("coupling map edge (" + std::to_string(a) + "," + std::to_string(b) + ") out of range");
    edges_.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

CouplingMap CouplingMap::chain(int n_qubits) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n_qubits; ++i) edges.emplace_back(i, i + 1);
  return CouplingMap(n_qubits, std::move(edges));
}

CouplingMap CouplingMap::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int n = -1;
  std::vector<std::pair<int, int>> edges;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (n < 0) {
      if (first.rfind("n=", 0) != 0) throw ParseError("coupling map line " + std::to_string(line_no) + ": expected n=<qubits>");
      try {
        n = std::stoi(first.substr(2));
      } catch (const std::exception&) {
        throw ParseError("coupling map line " + std::to_string(line_no) + ": bad qubit count");
      }
      continue;
    }
    int a = 0, b = 0;
    std::istringstream es(line);
    std::string extra;
    if (!(es >> a >> b) || (es >> extra))
      throw ParseError("coupling map line " + std::to_string(line_no) + ": expected `i j`");
    edges.emplace_back(a, b);
  }
  if (n < 0) throw ParseError("coupling map: missing n=<qubits> header");
  return CouplingMap(n, std::move(edges));
}

CouplingMap CouplingMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open coupling map " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

CouplingMap CouplingMap::bundled(const std::string& name, const std::string& data_dir) {
  if (name != "chain6" && name != "chain10" && name != "heavyhex27")
    throw ConfigError("unknown bundled coupling map '" + name + "'");
  return load(data_dir + "/coupling/" + name + ".txt");
}

bool CouplingMap::connected(int a, int b) const {
  const std::pair<int, int> e{std::min(a, b), std::max(a, b)};
  return std::binary_search(edges_.begin(), edges_.end(), e);
}

std::string CouplingMap::to_text() const {
  std::string out = "n=" + std::to_string(n_qubits_) + "\n";
  for (auto [a, b] : edges_) out += std::to_string(a) + " " + std::to_string(b) + "\n";
  return out;
}

bool is_native(GateKind k) noexcept {
  return k == GateKind::RZ || k == GateKind::SX || k == GateKind::X || k == GateKind::ECR;
}

bool GateVocabulary::contains(GateKind k) const { return std::find(kinds.begin(), kinds.end(), k) != kinds.end(); }

bool GateVocabulary::has_two_qubit_kinds() const {
  return std::any_of(kinds.begin(), kinds.end(), [](GateKind k) { return gate_arity(k) == 2; });
}

GateVocabulary GateVocabulary::native() {
  return {"native", {GateKind::RZ, GateKind::SX, GateKind::X, GateKind::ECR}};
}

GateVocabulary GateVocabulary::extended() {
  return {"extended",
          {GateKind::RZ, GateKind::SX, GateKind::X, GateKind::ECR, GateKind::RX, GateKind::RY, GateKind::H, GateKind::S,
           GateKind::CZ, GateKind::CX}};
}

GateVocabulary GateVocabulary::by_name(const std::string& name) {
  if (name == "native") return native();
  if (name == "extended") return extended();
  throw ConfigError("unknown gate vocabulary '" + name + "'");
}

std::vector<Violation> validate_genome(const Genome& genome, const GateVocabulary& vocab, const CouplingMap& map) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < genome.tokens.size(); ++i) {
    const GateToken& t = genome.tokens[i];
    const std::string where = "token " + std::to_string(i) + " (" + format_token(t) + ")";
    if (!vocab.contains(t.kind))
      out.push_back({Violation::Type::Vocabulary, i, where + ": " + std::string(gate_name(t.kind)) + " not in " + vocab.name + " vocabulary"});
    bool in_range = true;
    for (int k = 0; k < t.arity(); ++k) {
      const int q = t.qubits[static_cast<std::size_t>(k)];
      if (q < 0 || q >= map.n_qubits()) {
        out.push_back({Violation::Type::QubitRange, i, where + ": qubit " + std::to_string(q) + " outside the device"});
        in_range = false;
      }
    }
    if (t.arity() == 2 && in_range && !map.connected(t.qubits[0], t.qubits[1]))
      out.push_back({Violation::Type::Connectivity, i, where + ": pair not in coupling map"});
  }
  return out;
}

double Angle::evaluate(std::span<const double> x) const {
  double v = constant;
  for (auto [f, c] : terms) v += c * x[static_cast<std::size_t>(f)];
  return v;
}

Angle Angle::operator+(const Angle& other) const {
  Angle out = *this;
  out.constant += other.constant;
  for (auto [f, c] : other.terms) {
    auto it = std::find_if(out.terms.begin(), out.terms.end(), [f = f](const auto& t) { return t.first == f; });
    if (it == out.terms.end()) out.terms.emplace_back(f, c);
    else it->second += c;
  }
  std::sort(out.terms.begin(), out.terms.end());
  return out;
}

Angle Angle::plus(double v) const {
  Angle out = *this;
  out.constant += v;
  return out;
}

std::vector<SymbolicGate> symbolic_from_genome(const Genome& genome, int feature_dim) {
  std::vector<SymbolicGate> out;
  for (const GateToken& t : genome.tokens) {
    SymbolicGate g{t.kind, t.qubits, {}};
    if (is_parametric(t.kind)) {
      const int f = t.feature ? *t.feature : (feature_dim > 0 ? t.qubits[0] % feature_dim : t.qubits[0]);
      g.angle = Angle::feature(f);
    }
    out.push_back(g);
  }
  return out;
}

std::vector<SymbolicGate> symbolic_from_circuit(const Circuit& circuit) {
  std::vector<SymbolicGate> out;
  for (const Gate& g : circuit) out.push_back({g.kind, g.qubits, Angle::fixed(is_parametric(g.kind) ? g.angle : 0.0)});
  return out;
}

Circuit bind_symbolic(std::span<const SymbolicGate> gates, std::span<const double> x) {
  Circuit out;
  for (const auto& g : gates) out.push_back(Gate{g.kind, g.qubits, is_parametric(g.kind) ? g.angle.evaluate(x) : 0.0});
  return out;
}

double native_fraction(std::span<const GateKind> kinds) {
  if (kinds.empty()) throw InvalidParameterError("native_fraction of an empty sequence");
  const auto n = std::count_if(kinds.begin(), kinds.end(), is_native);
  return static_cast<double>(n) / static_cast<double>(kinds.size());
}

double native_fraction(std::span<const SymbolicGate> gates) {
  std::vector<GateKind> kinds;
  for (const auto& g : gates) kinds.push_back(g.kind);
  return native_fraction(kinds);
}

namespace {

using std::numbers::pi;

SymbolicGate rz(int q, Angle a) { return {GateKind::RZ, {q, -1}, std::move(a)}; }
SymbolicGate sx(int q) { return {GateKind::SX, {q, -1}, {}}; }
SymbolicGate xg(int q) { return {GateKind::X, {q, -1}, {}}; }

void append(std::vector<SymbolicGate>& out, std::vector<SymbolicGate> more) {
  out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
}

}  // namespace

std::vector<SymbolicGate> rewrite_native(const SymbolicGate& g) {
  const int q = g.qubits[0];
  switch (g.kind) {
    case GateKind::RZ:
    case GateKind::SX:
    case GateKind::X:
    case GateKind::ECR:
      return {g};
    case GateKind::P:
      return {rz(q, g.angle)};
    case GateKind::S:
      return {rz(q, Angle::fixed(pi / 2))};
    case GateKind::H:
      return {rz(q, Angle::fixed(pi / 2)), sx(q), rz(q, Angle::fixed(pi / 2))};
    case GateKind::RX:
      // RX(t) = H RZ(t) H = RZ(pi/2) SX RZ(t + pi) SX RZ(pi/2)
      return {rz(q, Angle::fixed(pi / 2)), sx(q), rz(q, g.angle.plus(pi)), sx(q), rz(q, Angle::fixed(pi / 2))};
    case GateKind::RY:
      // RY(t) = RZ(pi/2) RX(t) RZ(-pi/2) with the outer RZs folded in (up to phase)
      return {sx(q), rz(q, g.angle.plus(pi)), sx(q), rz(q, Angle::fixed(pi))};
    case GateKind::CX: {
      const int c = g.qubits[0], t = g.qubits[1];
      return {xg(c), SymbolicGate{GateKind::ECR, {c, t}, {}}, rz(c, Angle::fixed(pi / 2)), sx(t)};
    }
    case GateKind::CZ: {
      const int t = g.qubits[1];
      std::vector<SymbolicGate> out;
      for (const SymbolicGate& step : {SymbolicGate{GateKind::H, {t, -1}, {}}, SymbolicGate{GateKind::CX, g.qubits, {}},
                                       SymbolicGate{GateKind::H, {t, -1}, {}}})
        append(out, rewrite_native(step));
      return out;
    }
  }
  throw InvalidParameterError("rewrite_native: unknown gate kind");
}

int circuit_depth(std::span<const SymbolicGate> gates) {
  std::map<int, int> level;
  int depth = 0;
  for (const auto& g : gates) {
    int l = 0;
    for (int k = 0; k < g.arity(); ++k) l = std::max(l, level[g.qubits[static_cast<std::size_t>(k)]]);
    ++l;
    for (int k = 0; k < g.arity(); ++k) level[g.qubits[static_cast<std::size_t>(k)]] = l;
    depth = std::max(depth, l);
  }
  return depth;
}

std::map<std::string, int> gate_counts(std::span<const SymbolicGate> gates) {
  std::map<std::string, int> counts;
  for (const auto& g : gates) ++counts[std::string(gate_name(g.kind))];
  return counts;
}

TranspileResult transpile_estimate(std::span<const SymbolicGate> gates, const CouplingMap& map) {
  TranspileResult result;
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const auto& g = gates[i];
    for (int k = 0; k < g.arity(); ++k) {
      const int q = g.qubits[static_cast<std::size_t>(k)];
      if (q < 0 || q >= map.n_qubits()) throw TopologyError("gate " + std::to_string(i) + " uses qubit " + std::to_string(q) + " outside the coupling map");
    }
    if (g.arity() == 2 && !map.connected(g.qubits[0], g.qubits[1]))
      throw TopologyError("gate " + std::to_string(i) + " (" + std::string(gate_name(g.kind)) + " " +
                          std::to_string(g.qubits[0]) + "," + std::to_string(g.qubits[1]) + ") is not coupling-map legal");
  }

  // Output gates with a flag: emitted by a rewrite (mergeable) or passed through.
  std::vector<SymbolicGate> out;
  std::vector<bool> rewritten;
  std::map<int, std::ptrdiff_t> last_on_qubit;  // index of the latest gate on each qubit
  auto emit = [&](const SymbolicGate& g, bool from_rewrite) {
    if (g.kind == GateKind::RZ) {
      auto it = last_on_qubit.find(g.qubits[0]);
      if (it != last_on_qubit.end() && it->second >= 0) {
        auto& prev = out[static_cast<std::size_t>(it->second)];
        if (prev.kind == GateKind::RZ && (from_rewrite || rewritten[static_cast<std::size_t>(it->second)])) {
          prev.angle = prev.angle + g.angle;
          rewritten[static_cast<std::size_t>(it->second)] = true;
          return;
        }
      }
    }
    out.push_back(g);
    rewritten.push_back(from_rewrite);
    for (int k = 0; k < g.arity(); ++k) last_on_qubit[g.qubits[static_cast<std::size_t>(k)]] = static_cast<std::ptrdiff_t>(out.size() - 1);
  };
  for (const auto& g : gates) {
    if (is_native(g.kind)) {
      emit(g, false);
    } else {
      for (const auto& step : rewrite_native(g)) emit(step, true);
    }
  }

  result.gates = std::move(out);
  result.input_counts = gate_counts(gates);
  result.output_counts = gate_counts(result.gates);
  if (!gates.empty()) {
    result.native_fraction_before = native_fraction(gates);
    result.native_fraction_after = native_fraction(result.gates);
  }
  result.depth_before = circuit_depth(gates);
  result.depth_after = circuit_depth(result.gates);
  return result;
}

nlohmann::json transpile_report_json(const TranspileResult& r) {
  int input_total = 0;
  for (const auto& [k, v] : r.input_counts) input_total += v;
  return nlohmann::json{{"input_counts", r.input_counts},
                        {"output_counts", r.output_counts},
                        {"input_gates", input_total},
                        {"output_gates", static_cast<int>(r.gates.size())},
                        {"native_fraction_before", r.native_fraction_before},
                        {"native_fraction_after", r.native_fraction_after},
                        {"depth_before", r.depth_before},
                        {"depth_after", r.depth_after}};
}

}  // namespace hwqsvm
