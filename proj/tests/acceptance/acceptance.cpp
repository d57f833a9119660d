// End-to-end acceptance run: one PASS/FAIL line per criterion.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "hwqsvm/experiment.hpp"
#include "hwqsvm/kernel.hpp"
#include "oracles.hpp"

using namespace hwqsvm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string num(double v, int digits = 4) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << v;
  return ss.str();
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol + 1e-12; }

const std::string kData = HWQSVM_DATA_DIR;

GenomeFile bundled(const std::string& name) { return load_genome_file(kData + "/genomes/" + name + ".genome"); }

std::span<const int> qubits_of(const Gate& g) { return {g.qubits.data(), static_cast<std::size_t>(g.arity())}; }

// 1. simulator
Outcome simulator() {
  Outcome o;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  double unitarity = 0;
  for (auto k : kAllGateKinds)
    for (int t = 0; t < 5; ++t) {
      const auto u = oracle::Dense::from(gate_matrix(k, angle(rng)));
      unitarity = std::max(unitarity, oracle::max_abs_diff(oracle::dagger(u) * u, oracle::Dense::identity(u.n)));
    }
  o.require(unitarity < 1e-12, "unitarity " + num(unitarity));

  auto random_circuit = [&](int n, int length) {
    Circuit c;
    for (int i = 0; i < length; ++i) {
      const auto k = kAllGateKinds[rng() % kAllGateKinds.size()];
      const int a = static_cast<int>(rng() % static_cast<unsigned>(n));
      if (gate_arity(k) == 2) {
        int b = static_cast<int>(rng() % static_cast<unsigned>(n - 1));
        if (b >= a) ++b;
        c.push_back(Gate{k, {a, b}, 0.0});
      } else {
        c.push_back(Gate::one(k, a, angle(rng)));
      }
    }
    return c;
  };

  double norm_err = 0;
  for (int n = 2; n <= 10; ++n) norm_err = std::max(norm_err, std::abs(run_circuit(random_circuit(n, 100), n).norm() - 1.0));
  o.require(norm_err < 1e-10, "100-gate norm drift " + num(norm_err));

  double cross = 0, tensor = 0;
  for (int n = 2; n <= 4; ++n) {
    const auto c = random_circuit(n, 30);
    const auto psi = run_circuit(c, n);
    auto rho = QuantumState::zero(n, Representation::Mixed);
    oracle::Dense u = oracle::Dense::identity(std::size_t{1} << n);
    for (const auto& g : c) {
      apply_gate(rho, g);
      std::vector<int> qs(qubits_of(g).begin(), qubits_of(g).end());
      u = oracle::embed(oracle::Dense::from(gate_matrix(g.kind, g.angle)), qs, n) * u;
    }
    cross = std::max(cross, oracle::max_abs_diff(oracle::density_of(rho), oracle::density_of(psi.to_density())));
    std::vector<Complex> e0(std::size_t{1} << n);
    e0[0] = 1.0;
    const auto dense = oracle::apply(u, e0);
    for (std::size_t i = 0; i < dense.size(); ++i) tensor = std::max(tensor, std::abs(dense[i] - psi.amplitude(i)));
  }
  o.require(cross < 1e-9, "statevector vs density " + num(cross));
  o.require(tensor < 1e-10, "tensor vs dense " + num(tensor));

  double trace_err = 0, herm = 0, min_eig = 0;
  const NoiseModel noise{};
  for (int n = 2; n <= 4; ++n) {
    const auto s = run_circuit(random_circuit(n, 40), n, noise);
    trace_err = std::max(trace_err, std::abs(s.trace() - 1.0));
    herm = std::max(herm, s.hermiticity_error());
    min_eig = std::min(min_eig, oracle::hermitian_min_eigenvalue(oracle::density_of(s)));
  }
  o.require(trace_err < 1e-10, "noisy trace " + num(trace_err));
  o.require(herm < 1e-10, "hermiticity " + num(herm));
  o.require(min_eig >= -1e-8, "min eigenvalue " + num(min_eig));
  return o;
}

std::vector<std::pair<std::string, FeatureMapSpec>> variants(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, FeatureMapSpec>> out;
  for (const char* m : {"z", "zz", "pauli", "raw", "efficient"}) out.emplace_back(m, handcrafted_spec(cfg, m));
  for (const char* g : {"hw_free", "hw_fixed_rz", "all_gates"}) out.emplace_back(g, genome_spec(bundled(g)));
  return out;
}

// 2. kernel properties
Outcome kernels(const ExperimentConfig& cfg) {
  Outcome o;
  for (const auto& [name, spec] : variants(cfg)) {
    const auto data = prepare_data(cfg, map_feature_count(cfg, spec));
    std::vector<std::size_t> rows(200);
    std::iota(rows.begin(), rows.end(), 0);
    const Matrix X = data.train.X.select_rows(std::span<const std::size_t>(rows));
    KernelOptions opt;
    opt.threads = cfg.threads;
    const auto gram = gram_matrix(spec, X, nullptr, opt);
    double asym = 0, diag = 0;
    for (std::size_t i = 0; i < 200; ++i) {
      diag = std::max(diag, std::abs(gram.values(i, i) - 1.0));
      for (std::size_t j = 0; j < i; ++j) asym = std::max(asym, std::abs(gram.values(i, j) - gram.values(j, i)));
    }
    const double lmin = symmetric_eigenvalues(gram.values).front();
    o.require(asym < 1e-10 && diag < 1e-9 && lmin >= -1e-8,
              name + " asym " + num(asym, 2) + " diag " + num(diag, 2) + " lmin " + num(lmin, 3));
  }
  FeatureMapSpec one;
  one.kind = MapKind::Genome;
  one.n_qubits = 1;
  one.genome.tokens = {GateToken{GateKind::H, {0, -1}, std::nullopt}, GateToken{GateKind::RZ, {0, -1}, 0}};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-4, 4);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> x{u(rng)}, y{u(rng)};
    worst = std::max(worst, std::abs(kernel_entry(one, x, y) - std::pow(std::cos((x[0] - y[0]) / 2), 2)));
  }
  o.require(worst < 1e-10, "1-qubit closed form " + num(worst, 2));
  return o;
}

// 3. SVM solver
Outcome solver() {
  Outcome o;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  double worst = 0, balance = 0, kkt = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 4 + rng() % 9, d = 1 + rng() % 4;
    Matrix A(n, d);
    for (auto& v : A.values()) v = g(rng);
    Matrix K(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < d; ++k) K(i, j) += A(i, k) * A(j, k);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = i % 2 ? 1 : -1;
    std::shuffle(y.begin(), y.end(), rng);
    SvmOptions opt;
    opt.C = std::pow(10.0, -1.0 + static_cast<double>(rng() % 3));
    const auto m = train_precomputed(K, y, opt);
    const double ref = oracle::dual_value(K, y, oracle::projected_gradient_dual(K, y, opt.C, 40000));
    const double got = oracle::dual_value(K, y, m.alpha);
    worst = std::max(worst, std::abs(got - ref) / std::max(1.0, std::abs(ref)));
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += m.alpha[i] * y[i];
    balance = std::max(balance, std::abs(s));
    // maximal violating pair on the gradient of the dual
    double up = -1e300, low = 1e300;
    for (std::size_t i = 0; i < n; ++i) {
      double grad = -1.0;
      for (std::size_t j = 0; j < n; ++j) grad += y[i] * y[j] * K(i, j) * m.alpha[j];
      const double v = -y[i] * grad;
      const bool in_up = (y[i] == 1 && m.alpha[i] < opt.C) || (y[i] == -1 && m.alpha[i] > 0);
      const bool in_low = (y[i] == 1 && m.alpha[i] > 0) || (y[i] == -1 && m.alpha[i] < opt.C);
      if (in_up) up = std::max(up, v);
      if (in_low) low = std::min(low, v);
    }
    kkt = std::max(kkt, up - low);
  }
  o.require(worst < 1e-4, "max relative dual gap " + num(worst, 2));
  o.require(balance < 1e-6, "sum alpha*y " + num(balance, 2));
  o.require(kkt <= 1e-3 + 1e-12, "KKT gap " + num(kkt, 2));
  return o;
}

// 4. classical baselines
Outcome classical(const ExperimentConfig& cfg) {
  Outcome o;
  for (const auto& r : run_classical(cfg)) {
    const double target = r.kernel == "linear" ? 0.912 : 0.930;
    o.require(within(r.test.accuracy, target, 0.02),
              r.kernel + " " + num(r.test.accuracy) + " (target " + num(target) + " +- 0.02, C=" +
                  num(r.search.best.C) + (r.kernel == "rbf" ? " gamma=" + num(r.search.best.gamma) : "") + ")");
  }
  return o;
}

// 5. hand-crafted QSVMs
Outcome handcrafted(const ExperimentConfig& cfg) {
  Outcome o;
  const std::vector<std::tuple<std::string, double, double>> targets{
      {"raw", 0.930, 0.02}, {"z", 0.895, 0.04}, {"zz", 0.640, 0.05}};
  for (const auto& [name, target, tol] : targets) {
    const auto spec = handcrafted_spec(cfg, name);
    const auto data = prepare_data(cfg, map_feature_count(cfg, spec));
    const auto r = run_quantum(cfg, spec, data, std::nullopt);
    o.require(within(r.test.accuracy, target, tol),
              name + " " + num(r.test.accuracy) + " (target " + num(target) + " +- " + num(tol) + ")");
  }
  return o;
}

// 6. published genomes
Outcome published(const ExperimentConfig& cfg) {
  Outcome o;
  for (const auto& [name, target] : {std::pair{"hw_free", 0.912}, std::pair{"hw_fixed_rz", 0.877}}) {
    const auto ev = evaluate_genome(cfg, bundled(name));
    o.require(within(ev.quantum.test.accuracy, target, 0.05),
              std::string(name) + " " + num(ev.quantum.test.accuracy) + " (target " + num(target) + " +- 0.05)");
  }
  return o;
}

// 7. GA behavior
Outcome search(const ExperimentConfig& cfg) {
  Outcome o;
  double best_test = 0, slowest = 0;
  bool monotone = true, valid = true;
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto nas = resolve_nas_config(cfg, "hw-free", seed);
    const auto t0 = std::chrono::steady_clock::now();
    const auto run = run_nas(cfg, nas);
    slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    for (std::size_t g = 1; g < run.trace.best_per_generation.size(); ++g)
      monotone = monotone && run.trace.best_per_generation[g] >= run.trace.best_per_generation[g - 1];
    valid = valid && run.violations.empty() && nas.population == 8 && nas.generations == 4 && nas.subsample == 200 &&
            nas.n_qubits == 10;
    failures += run.trace.failures;
    best_test = std::max(best_test, run.best.test.accuracy);
    o.detail += (o.detail.empty() ? "" : " ") + ("seed" + std::to_string(seed) + "=" + num(run.best.test.accuracy, 3));
  }
  o.require(monotone, "monotone best fitness");
  o.require(valid, "all genomes hardware-valid, " + std::to_string(failures) + " failed evaluations");
  o.require(best_test >= 0.85, "best test " + num(best_test, 3) + " >= 0.85");
  o.require(slowest < 1800, "slowest run " + num(slowest, 3) + " s");
  return o;
}

// 8. transpilation
Outcome transpilation() {
  Outcome o;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3 * std::numbers::pi, 3 * std::numbers::pi);
  double worst = 0;
  const std::vector<double> none;
  for (auto kind : kAllGateKinds) {
    const int trials = is_parametric(kind) ? 20 : 1;
    for (int t = 0; t < trials; ++t) {
      const int n = gate_arity(kind);
      for (std::array<int, 2> qs : n == 2 ? std::vector<std::array<int, 2>>{{0, 1}, {1, 0}}
                                          : std::vector<std::array<int, 2>>{{0, -1}}) {
        const SymbolicGate g{kind, qs, Angle::fixed(is_parametric(kind) ? u(rng) : 0.0)};
        auto dense = [&](const std::vector<Gate>& gates) {
          oracle::Dense m = oracle::Dense::identity(std::size_t{1} << n);
          for (const auto& x : gates) {
            std::vector<int> q(qubits_of(x).begin(), qubits_of(x).end());
            m = oracle::embed(oracle::Dense::from(gate_matrix(x.kind, x.angle)), q, n) * m;
          }
          return m;
        };
        const auto target = dense(bind_symbolic(std::vector<SymbolicGate>{g}, none));
        const auto got = dense(bind_symbolic(rewrite_native(g), none));
        worst = std::max(worst, std::abs(1.0 - oracle::phase_overlap(target, got)));
      }
    }
  }
  o.require(worst < 1e-9, "rewrite rules up to phase " + num(worst, 2));

  const auto all = transpile_estimate(symbolic_from_genome(bundled("all_gates").genome, 10), CouplingMap::chain(10));
  const auto count = all.gates.size();
  o.require(count >= 18 && count <= 22, "all-gates native count " + std::to_string(count) + " in [18, 22]");

  bool fixed = true;
  for (const char* name : {"hw_free", "hw_fixed_rz"}) {
    const auto spec = genome_spec(bundled(name));
    const auto sym = symbolic_from_genome(spec.genome, spec.n_qubits);
    fixed = fixed && transpile_estimate(sym, CouplingMap::chain(spec.n_qubits)).gates == sym;
  }
  o.require(fixed, "native genomes are fixed points");
  return o;
}

// 9. noise
Outcome noise(const ExperimentConfig& cfg) {
  Outcome o;
  const NoiseModel model{0.01, 0.02, 0.005};
  const auto nas = resolve_nas_config(cfg, "noisy", 0);
  o.require(nas.noise && *nas.noise == model, "noisy preset uses NoiseModel(0.01, 0.02, 0.005)");
  const auto run = run_nas(cfg, nas);
  FeatureMapSpec spec;
  spec.kind = MapKind::Genome;
  spec.n_qubits = nas.n_qubits;
  spec.fixed_rz = nas.fixed_rz;
  spec.genome = run.trace.best_genome;
  const auto data = prepare_data(cfg, spec.n_qubits);

  std::vector<std::size_t> rows(40);
  std::iota(rows.begin(), rows.end(), 0);
  KernelOptions opt;
  opt.noise = model;
  opt.threads = cfg.threads;
  const auto gram = gram_matrix(spec, data.train.X.select_rows(std::span<const std::size_t>(rows)), nullptr, opt);
  const auto d = diagnose(gram);
  o.require(d.max_diagonal < 1.0, "noisy diagonal max " + num(d.max_diagonal, 6) + " < 1");
  o.require(d.min_eigenvalue >= -1e-8, "noisy Gram lmin " + num(d.min_eigenvalue, 3));
  double trace_err = 0;
  for (std::size_t i = 0; i < 5; ++i)
    trace_err = std::max(trace_err, std::abs(encode_density(spec, data.train.X.row(i), model).trace() - 1.0));
  o.require(trace_err < 1e-10, "state trace " + num(trace_err, 2));

  const auto clean = run_quantum(cfg, spec, data, std::nullopt);
  const auto noisy = run_quantum(cfg, spec, data, model);
  o.require(noisy.test.accuracy < clean.test.accuracy,
            "same genome noisy " + num(noisy.test.accuracy) + " < noiseless " + num(clean.test.accuracy) +
                " (reference noisy 0.702, reported only)");
  return o;
}

// 10. determinism
int run_cli(const std::string& args) {
  const std::string cmd = std::string(HWQSVM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

std::map<std::string, std::string> reports(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.ends_with(".timing.json")) continue;  // wall-clock only
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[name] = ss.str();
  }
  return out;
}

Outcome determinism() {
  Outcome o;
  const std::string genome = kData + "/genomes/hw_free.genome";
  const std::vector<std::string> commands{
      "baseline-classical",
      "baseline-quantum --map zz",
      "nas run --variant hw-free --seed 1",
      "eval-genome --file " + genome,
      "report-hardware",
      "kernel-dump --map efficient --out efficient.csv",
  };
  const auto root = fs::temp_directory_path() / "hwqsvm_acceptance";
  fs::remove_all(root);
  std::map<std::string, std::map<std::string, std::string>> by_run;
  for (const char* tag : {"t1", "t1b", "t4"}) {
    const auto dir = root / tag;
    fs::create_directories(dir);
    const std::string threads = std::string(tag) == "t4" ? "4" : "1";
    for (const auto& c : commands)
      if (run_cli("--threads " + threads + " --out-dir " + dir.string() + " " + c) != 0)
        o.require(false, "command failed: " + c);
    by_run[tag] = reports(dir);
  }
  o.require(by_run["t1"].size() >= 10, std::to_string(by_run["t1"].size()) + " report files");
  o.require(by_run["t1"] == by_run["t1b"], "repeat run byte-identical");
  o.require(by_run["t1"] == by_run["t4"], "--threads 1 vs 4 byte-identical");
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  ExperimentConfig cfg;
  cfg.threads = 1;
  const std::vector<std::tuple<int, std::string, double, std::function<Outcome()>>> criteria{
      {1, "simulator correctness", 60, simulator},
      {2, "kernel properties", 300, [&] { return kernels(cfg); }},
      {3, "SVM solver", 60, solver},
      {4, "classical baselines", 120, [&] { return classical(cfg); }},
      {5, "hand-crafted QSVMs", 600, [&] { return handcrafted(cfg); }},
      {6, "published genomes", 300, [&] { return published(cfg); }},
      {7, "GA behavior", 5 * 1800, [&] { return search(cfg); }},
      {8, "transpilation", 0, transpilation},
      {9, "noise", 0, [&] { return noise(cfg); }},
      {10, "determinism", 0, determinism},
  };
  int failed = 0;
  for (const auto& [id, name, limit, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit > 0) o.require(secs < limit, "runtime " + num(secs, 3) + " s < " + num(limit, 5) + " s");
    failed += !o.pass;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
