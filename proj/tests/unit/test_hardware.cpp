#include <numbers>
#include <random>

#include "doctest.h"
#include "hwqsvm/error.hpp"
#include "hwqsvm/genome.hpp"
#include "hwqsvm/hardware.hpp"
#include "hwqsvm/kernel.hpp"
#include "oracles.hpp"

using namespace hwqsvm;
using oracle::Dense;
using std::numbers::pi;

namespace {

const std::string kData = HWQSVM_DATA_DIR;

GenomeFile bundled(const std::string& name) { return load_genome_file(kData + "/genomes/" + name + ".genome"); }

/// Dense unitary of a time-ordered gate list on n qubits.
Dense unitary(std::span<const Gate> gates, int n) {
  Dense u = Dense::identity(std::size_t{1} << n);
  for (const auto& g : gates) {
    std::vector<int> qs{g.qubits[0]};
    if (g.arity() == 2) qs.push_back(g.qubits[1]);
    u = oracle::embed(Dense::from(gate_matrix(g.kind, g.angle)), qs, n) * u;
  }
  return u;
}

}  // namespace

TEST_SUITE("hardware") {
  TEST_CASE("every rewrite rule equals its gate up to global phase") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-3 * pi, 3 * pi);
    for (auto kind : kAllGateKinds) {
      const int trials = is_parametric(kind) ? 20 : 1;
      for (int t = 0; t < trials; ++t) {
        const double theta = is_parametric(kind) ? u(rng) : 0.0;
        for (const auto& qs : gate_arity(kind) == 2 ? std::vector<std::array<int, 2>>{{0, 1}, {1, 0}}
                                                    : std::vector<std::array<int, 2>>{{0, -1}}) {
          const int n = gate_arity(kind);
          SymbolicGate g{kind, qs, Angle::fixed(theta)};
          const auto rewritten = rewrite_native(g);
          for (const auto& r : rewritten) CHECK(is_native(r.kind));
          const std::vector<double> none;
          const auto target = unitary(bind_symbolic(std::vector<SymbolicGate>{g}, none), n);
          const auto got = unitary(bind_symbolic(rewritten, none), n);
          CHECK(oracle::phase_overlap(target, got) == doctest::Approx(1.0).epsilon(1e-9));
        }
      }
    }
  }

  TEST_CASE("rule sizes") {
    CHECK(rewrite_native({GateKind::H, {0, -1}, {}}).size() == 3);
    CHECK(rewrite_native({GateKind::S, {0, -1}, {}}).size() == 1);
    const auto cx = rewrite_native({GateKind::CX, {2, 3}, {}});
    CHECK(cx.size() == 4);
    CHECK(std::count_if(cx.begin(), cx.end(), [](const auto& g) { return g.kind == GateKind::ECR; }) == 1);
    CHECK(rewrite_native({GateKind::RX, {0, -1}, Angle::fixed(0.3)}).size() == 5);
  }

  TEST_CASE("transpiled circuits with data-bound angles prepare the same state") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    const auto gf = bundled("all_gates");
    const auto sym = symbolic_from_genome(gf.genome, 10);
    const auto map = CouplingMap::chain(10);
    const auto t = transpile_estimate(sym, map);
    for (const auto& s : t.gates) CHECK(is_native(s.kind));
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> x(10);
      for (auto& v : x) v = g(rng);
      const auto a = run_circuit(bind_symbolic(sym, x), 10);
      const auto b = run_circuit(bind_symbolic(t.gates, x), 10);
      CHECK(std::norm(inner_product(a, b)) == doctest::Approx(1.0).epsilon(1e-10));
    }
    // ZZ map: many merges of rewrite RZs into data-dependent P angles
    FeatureMapSpec zz{MapKind::ZZ, 4, 2};
    std::vector<double> x{0.3, -0.2, 1.1, 0.8};
    const auto circuit = std::get<Circuit>(build_handcrafted(zz, x));
    const auto tz = transpile_estimate(symbolic_from_circuit(circuit), CouplingMap::chain(4));
    const std::vector<double> none;
    CHECK(std::norm(inner_product(run_circuit(circuit, 4), run_circuit(bind_symbolic(tz.gates, none), 4))) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(tz.native_fraction_before < 1.0);
    CHECK(tz.native_fraction_after == 1.0);
  }

  TEST_CASE("native genomes are fixed points and the pass is idempotent") {
    for (const char* name : {"hw_free", "hw_fixed_rz"}) {
      const auto gf = bundled(name);
      const int n = gf.qubits.value_or(gf.genome.qubit_span());
      const auto sym = symbolic_from_genome(gf.genome, n);
      const auto t = transpile_estimate(sym, CouplingMap::chain(n));
      CHECK(t.gates == sym);
      CHECK(t.input_counts == t.output_counts);
      CHECK(t.depth_before == t.depth_after);
    }
    const auto all = symbolic_from_genome(bundled("all_gates").genome, 10);
    const auto once = transpile_estimate(all, CouplingMap::chain(10));
    const auto twice = transpile_estimate(once.gates, CouplingMap::chain(10));
    CHECK(twice.gates == once.gates);
    // two adjacent native RZs stay separate: only rewrite output is merged
    const std::vector<SymbolicGate> rzs{{GateKind::RZ, {0, -1}, Angle::feature(0)}, {GateKind::RZ, {0, -1}, Angle::feature(1)}};
    CHECK(transpile_estimate(rzs, CouplingMap::chain(1)).gates.size() == 2);
  }

  TEST_CASE("uncoupled pairs are rejected") {
    const std::vector<SymbolicGate> g{{GateKind::CX, {0, 2}, {}}};
    CHECK_THROWS_AS(transpile_estimate(g, CouplingMap::chain(3)), TopologyError);
    const std::vector<SymbolicGate> far{{GateKind::X, {5, -1}, {}}};
    CHECK_THROWS_AS(transpile_estimate(far, CouplingMap::chain(3)), TopologyError);
  }

  TEST_CASE("validate_genome examples") {
    const auto fixed = bundled("hw_fixed_rz");
    CHECK(validate_genome(fixed.genome, GateVocabulary::native(), CouplingMap::chain(6)).empty());
    CHECK(validate_genome(bundled("hw_free").genome, GateVocabulary::native(), CouplingMap::chain(10)).empty());

    Genome with_h{{GateToken{GateKind::H, {0, -1}, std::nullopt}, GateToken{GateKind::SX, {1, -1}, std::nullopt}}};
    const auto v1 = validate_genome(with_h, GateVocabulary::native(), CouplingMap::chain(6));
    REQUIRE(v1.size() == 1);
    CHECK(v1[0].type == Violation::Type::Vocabulary);
    CHECK(v1[0].position == 0);

    Genome far{{GateToken{GateKind::ECR, {0, 5}, std::nullopt}}};
    const auto v2 = validate_genome(far, GateVocabulary::native(), CouplingMap::chain(6));
    REQUIRE(v2.size() == 1);
    CHECK(v2[0].type == Violation::Type::Connectivity);

    Genome outside{{GateToken{GateKind::SX, {7, -1}, std::nullopt}}};
    const auto v3 = validate_genome(outside, GateVocabulary::native(), CouplingMap::chain(6));
    REQUIRE(v3.size() == 1);
    CHECK(v3[0].type == Violation::Type::QubitRange);

    const auto all = validate_genome(bundled("all_gates").genome, GateVocabulary::native(), CouplingMap::chain(10));
    CHECK(all.size() == 8);
    CHECK(validate_genome(bundled("all_gates").genome, GateVocabulary::extended(), CouplingMap::chain(10)).empty());
  }

  TEST_CASE("native fraction") {
    const std::vector<GateKind> natives{GateKind::RZ, GateKind::SX, GateKind::X, GateKind::ECR};
    CHECK(native_fraction(natives) == 1.0);
    CHECK(native_fraction(std::vector<GateKind>{GateKind::H}) == 0.0);
    CHECK_THROWS_AS(native_fraction(std::vector<GateKind>{}), InvalidParameterError);
    std::vector<GateKind> all;
    for (const auto& t : bundled("all_gates").genome.tokens) all.push_back(t.kind);
    CHECK(native_fraction(all) == doctest::Approx(4.0 / 12.0));
  }

  TEST_CASE("vocabularies") {
    const auto nat = GateVocabulary::native(), ext = GateVocabulary::extended();
    for (auto k : nat.kinds) CHECK(ext.contains(k));
    CHECK(ext.kinds.size() == 10);
    CHECK(!ext.contains(GateKind::P));
    CHECK_THROWS_AS(GateVocabulary::by_name("full"), ConfigError);
  }

  TEST_CASE("coupling maps") {
    const auto c6 = CouplingMap::bundled("chain6", kData);
    CHECK(c6.n_qubits() == 6);
    CHECK(c6.edges() == CouplingMap::chain(6).edges());
    CHECK(CouplingMap::bundled("chain10", kData).edges() == CouplingMap::chain(10).edges());
    const auto hh = CouplingMap::bundled("heavyhex27", kData);
    CHECK(hh.n_qubits() == 27);
    CHECK(hh.edges().size() == 28);
    std::vector<int> degree(27);
    for (auto [a, b] : hh.edges()) ++degree[static_cast<std::size_t>(a)], ++degree[static_cast<std::size_t>(b)];
    CHECK(*std::max_element(degree.begin(), degree.end()) == 3);
    CHECK(c6.connected(4, 5));
    CHECK(c6.connected(5, 4));
    CHECK(!c6.connected(0, 2));
    CHECK(CouplingMap::parse(c6.to_text()).edges() == c6.edges());
    CHECK(CouplingMap::parse("# comment\nn=3\n0 1 # first\n\n2 1\n").edges().size() == 2);
    CHECK_THROWS_AS(CouplingMap::parse("n=3\n1 1\n"), TopologyError);
    CHECK_THROWS_AS(CouplingMap::parse("n=3\n0 3\n"), TopologyError);
    CHECK_THROWS_AS(CouplingMap::parse("0 1\n"), ParseError);
    CHECK_THROWS_AS(CouplingMap::parse("n=3\n0 1 2\n"), ParseError);
    CHECK_THROWS_AS(CouplingMap::bundled("ring5", kData), ConfigError);
  }

  TEST_CASE("transpile report") {
    const auto t = transpile_estimate(symbolic_from_genome(bundled("all_gates").genome, 10), CouplingMap::chain(10));
    const auto j = transpile_report_json(t);
    CHECK(j.at("input_gates") == 12);
    CHECK(j.at("output_gates") == t.gates.size());
    CHECK(j.at("input_counts").at("CX") == 6);
    CHECK(j.at("native_fraction_after") == 1.0);
    MESSAGE("all-gates genome transpiles to " << t.gates.size() << " native gates");
  }
}
