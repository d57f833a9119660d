#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "hwqsvm/error.hpp"
#include "hwqsvm/kernel.hpp"
#include "oracles.hpp"

using namespace hwqsvm;

namespace {

// 1-qubit map [H, RZ(x)] written as a genome
FeatureMapSpec h_rz_map() {
  FeatureMapSpec s;
  s.kind = MapKind::Genome;
  s.n_qubits = 1;
  s.genome.tokens = {GateToken{GateKind::H, {0, -1}, std::nullopt}, GateToken{GateKind::RZ, {0, -1}, 0}};
  return s;
}

Matrix random_samples(std::size_t m, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix X(m, d);
  for (auto& v : X.values()) v = g(rng);
  return X;
}

std::vector<FeatureMapSpec> all_variants(int n) {
  std::vector<FeatureMapSpec> out;
  for (auto k : {MapKind::Z, MapKind::ZZ, MapKind::Pauli, MapKind::EfficientLike}) out.push_back({k, n, 2});
  out.push_back({MapKind::RawVector, amplitude_qubits(static_cast<std::size_t>(n)), 1});
  FeatureMapSpec g;
  g.kind = MapKind::Genome;
  g.n_qubits = n;
  // a native genome touching every qubit
  for (int q = 0; q < n; ++q) {
    g.genome.tokens.push_back(GateToken{GateKind::SX, {q, -1}, std::nullopt});
    g.genome.tokens.push_back(GateToken{GateKind::RZ, {q, -1}, std::nullopt});
    if (q + 1 < n) g.genome.tokens.push_back(GateToken{GateKind::ECR, {q, q + 1}, std::nullopt});
  }
  out.push_back(g);
  g.fixed_rz = true;
  out.push_back(g);
  return out;
}

/// Naive compute-uncompute: run U(x), then U(y)^dagger gate by gate, read P(0).
double naive_entry(const FeatureMapSpec& spec, std::span<const double> x, std::span<const double> y) {
  const auto cx = std::get<Circuit>(prepare_map(spec, x));
  const auto cy = std::get<Circuit>(prepare_map(spec, y));
  auto s = run_circuit(cx, spec.n_qubits);
  for (auto it = cy.rbegin(); it != cy.rend(); ++it)
    apply_unitary(s, gate_matrix(it->kind, it->angle).adjoint(), std::span<const int>(it->qubits.data(), static_cast<std::size_t>(it->arity())));
  return s.probability(0);
}

}  // namespace

TEST_SUITE("qkernel") {
  TEST_CASE("self-fidelity and the 1-qubit closed form") {
    const auto spec = h_rz_map();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-4, 4);
    for (int i = 0; i < 50; ++i) {
      const double x = u(rng), y = u(rng);
      const std::vector<double> vx{x}, vy{y};
      CHECK(std::abs(kernel_entry(spec, vx, vy) - std::pow(std::cos((x - y) / 2), 2)) < 1e-10);
      CHECK(std::abs(kernel_entry(spec, vx, vx) - 1.0) < 1e-12);
    }
  }

  TEST_CASE("raw vectors: orthogonal inputs give 0") {
    FeatureMapSpec raw{MapKind::RawVector, 2, 1};
    CHECK(kernel_entry(raw, std::vector<double>{1, 0, 0, 0}, std::vector<double>{0, 3, 0, 0}) == 0.0);
    CHECK(kernel_entry(raw, std::vector<double>{1, 1, 0, 0}, std::vector<double>{1, 0, 0, 0}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(kernel_entry(raw, std::vector<double>{1, 0}, std::vector<double>{1, 0, 0}), BindingError);
  }

  TEST_CASE("small Gram matrices") {
    const auto spec = h_rz_map();
    Matrix one(1, 1, 0.7);
    const auto g1 = gram_matrix(spec, one);
    CHECK(g1.values(0, 0) == doctest::Approx(1.0).epsilon(1e-15));

    Matrix three(3, 1);
    three(0, 0) = 0.2;
    three(1, 0) = -1.1;
    three(2, 0) = 2.5;
    const auto g3 = gram_matrix(spec, three);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        CHECK(std::abs(g3.values(i, j) - std::pow(std::cos((three(i, 0) - three(j, 0)) / 2), 2)) < 1e-10);
    CHECK(g3.row_ids == std::vector<std::string>{"s0", "s1", "s2"});
  }

  TEST_CASE("noiseless Gram invariants for every map variant") {
    std::mt19937_64 rng(9);
    const Matrix X = random_samples(40, 6, rng);
    for (const auto& spec : all_variants(6)) {
      const auto d = diagnose(gram_matrix(spec, X));
      CHECK(d.max_asymmetry < 1e-10);
      CHECK(std::abs(d.min_diagonal - 1.0) < 1e-9);
      CHECK(std::abs(d.max_diagonal - 1.0) < 1e-9);
      CHECK(d.min_eigenvalue >= -1e-8);
      CHECK(d.max_entry <= 1.0 + 1e-10);
      CHECK(d.min_entry >= -1e-12);
    }
  }

  TEST_CASE("cached statevector path equals naive per-pair simulation") {
    std::mt19937_64 rng(10);
    const Matrix X = random_samples(8, 5, rng);
    for (const auto& spec : all_variants(5)) {
      if (spec.kind == MapKind::RawVector) continue;
      const auto g = gram_matrix(spec, X);
      for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t j = 0; j < X.rows(); ++j) CHECK(std::abs(g.values(i, j) - naive_entry(spec, X.row(i), X.row(j))) < 1e-10);
    }
  }

  TEST_CASE("noisy kernels") {
    std::mt19937_64 rng(12);
    const Matrix X = random_samples(6, 4, rng);
    for (const auto& spec : all_variants(4)) {
      KernelOptions zero;
      zero.noise = NoiseModel{0.0, 0.0, 0.0};
      const auto clean = gram_matrix(spec, X);
      const auto z = gram_matrix(spec, X, nullptr, zero);
      for (std::size_t i = 0; i < X.values().size(); ++i) CHECK(std::abs(clean.values.values()[i] - z.values.values()[i]) < 1e-9);
      if (spec.kind == MapKind::RawVector) continue;

      KernelOptions noisy;
      noisy.noise = NoiseModel{};
      const auto g = gram_matrix(spec, X, nullptr, noisy);
      const auto d = diagnose(g);
      CHECK(d.max_diagonal < 1.0);
      CHECK(d.min_eigenvalue >= -1e-8);
      CHECK(d.min_entry >= -1e-12);
      // Heisenberg-picture Gram equals the explicit compute-uncompute construction
      for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t j = i; j < X.rows(); ++j)
          CHECK(std::abs(g.values(i, j) - kernel_entry(spec, X.row(i), X.row(j), NoiseModel{})) < 1e-12);
    }
  }

  TEST_CASE("noisy kernel asymmetry is tiny but not zero") {
    // Amplitude damping is not unital, so K(x, y) and K(y, x) may differ;
    // the square Gram matrix uses the upper triangle. Report the size.
    std::mt19937_64 rng(14);
    const Matrix X = random_samples(6, 6, rng);
    const auto gf = load_genome_file(std::string(HWQSVM_DATA_DIR) + "/genomes/hw_fixed_rz.genome");
    FeatureMapSpec spec;
    spec.kind = MapKind::Genome;
    spec.n_qubits = 6;
    spec.fixed_rz = true;
    spec.genome = gf.genome;
    double worst = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i)
      for (std::size_t j = i + 1; j < X.rows(); ++j)
        worst = std::max(worst, std::abs(kernel_entry(spec, X.row(i), X.row(j), NoiseModel{}) -
                                         kernel_entry(spec, X.row(j), X.row(i), NoiseModel{})));
    MESSAGE("max |K(x,y) - K(y,x)| under NoiseModel(0.01, 0.02, 0.005): " << worst);
    CHECK(worst < 1e-2);
    // depolarizing alone commutes with the gate it follows, so the kernel is symmetric
    double depol = 0.0;
    const NoiseModel no_damping{0.01, 0.02, 0.0};
    for (std::size_t i = 0; i < X.rows(); ++i)
      for (std::size_t j = i + 1; j < X.rows(); ++j)
        depol = std::max(depol, std::abs(kernel_entry(spec, X.row(i), X.row(j), no_damping) -
                                         kernel_entry(spec, X.row(j), X.row(i), no_damping)));
    CHECK(depol < 1e-12);
    KernelOptions noisy;
    noisy.noise = NoiseModel{};
    CHECK(diagnose(gram_matrix(spec, X, nullptr, noisy)).max_asymmetry == 0.0);
  }

  TEST_CASE("rectangular blocks and thread independence") {
    std::mt19937_64 rng(15);
    const Matrix X = random_samples(13, 4, rng), Y = random_samples(7, 4, rng);
    FeatureMapSpec zz{MapKind::ZZ, 4, 2};
    const auto a = gram_matrix(zz, X, &Y, {std::nullopt, 1});
    const auto b = gram_matrix(zz, X, &Y, {std::nullopt, 3});
    CHECK(a.values == b.values);
    CHECK(a.col_ids.front() == "t0");
    for (std::size_t i = 0; i < 13; ++i)
      for (std::size_t j = 0; j < 7; ++j) CHECK(a.values(i, j) == doctest::Approx(kernel_entry(zz, X.row(i), Y.row(j))).epsilon(1e-12));
    KernelOptions n1{NoiseModel{}, 1}, n3{NoiseModel{}, 3};
    CHECK(gram_matrix(zz, Y, nullptr, n1).values == gram_matrix(zz, Y, nullptr, n3).values);
    const Matrix bad(2, 3);
    CHECK_THROWS_AS(gram_matrix(zz, X, &bad), BindingError);
  }

  TEST_CASE("Gram CSV round-trips exactly") {
    std::mt19937_64 rng(16);
    const Matrix X = random_samples(5, 3, rng);
    auto g = gram_matrix(FeatureMapSpec{MapKind::Z, 3, 2}, X);
    g.row_ids = g.col_ids = {"a", "b", "c", "d", "e"};
    std::stringstream ss;
    write_gram_csv(ss, g);
    const auto back = read_gram_csv(ss);
    CHECK(back.values == g.values);
    CHECK(back.row_ids == g.row_ids);
    CHECK(back.col_ids == g.col_ids);
    std::stringstream broken("id,a,b\na,1,0.5\nb,0.5\n");
    CHECK_THROWS_AS(read_gram_csv(broken), ParseError);
  }

  TEST_CASE("tridiagonal QL eigenvalues agree with Jacobi") {
    std::mt19937_64 rng(18);
    std::normal_distribution<double> g;
    for (std::size_t n : {1u, 2u, 5u, 17u, 40u}) {
      Matrix a(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = g(rng);
      const auto ql = symmetric_eigenvalues(a);
      const auto jac = oracle::jacobi_eigenvalues(a);
      for (std::size_t i = 0; i < n; ++i) CHECK(ql[i] == doctest::Approx(jac[i]).epsilon(1e-9).scale(1.0));
    }
  }
}
