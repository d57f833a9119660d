#include "hwqsvm/nas.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "hwqsvm/error.hpp"
#include "hwqsvm/featuremap.hpp"
#include "hwqsvm/kernel.hpp"
#include "hwqsvm/parallel.hpp"
#include "hwqsvm/svm.hpp"

namespace hwqsvm {

namespace {

bool in_unit(double p) { return p >= 0.0 && p <= 1.0; }

const std::vector<std::string> kPresetNames{"hw-fixed-rz", "hw-free", "all-gates", "noisy", "sparse"};

CouplingMap resolve_coupling(const std::string& name, const std::string& data_dir) {
  if (name.rfind("chain", 0) == 0 && name.size() > 5 &&
      std::all_of(name.begin() + 5, name.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    return CouplingMap::chain(std::stoi(name.substr(5)));
  return CouplingMap::bundled(name, data_dir);
}

}  // namespace

void NasConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("nas config: " + m); };
  if (population < 2) fail("population must be at least 2");
  if (generations < 0) fail("generations must be non-negative");
  if (elitism < 0 || elitism >= population) fail("elitism must lie in [0, population)");
  if (tournament_k < 1 || tournament_k > population) fail("tournament_k must lie in [1, population]");
  if (!in_unit(p_mut) || !in_unit(p_insert) || !in_unit(p_delete)) fail("probabilities must lie in [0, 1]");
  if (min_length < 1 || min_length > max_length) fail("length bounds must satisfy 1 <= min <= max");
  if (vocabulary.kinds.empty()) fail("empty gate vocabulary");
  if (n_qubits < 1 || n_qubits > kMaxQubits) fail("n_qubits must lie in [1, " + std::to_string(kMaxQubits) + "]");
  if (coupling.n_qubits() != n_qubits)
    fail("coupling map has " + std::to_string(coupling.n_qubits()) + " qubits but n_qubits is " + std::to_string(n_qubits));
  if (vocabulary.has_two_qubit_kinds() && coupling.edges().empty())
    fail("two-qubit gates in the vocabulary but the coupling map has no edges");
  if (sparsity_lambda < 0.0 || !std::isfinite(sparsity_lambda)) fail("sparsity_lambda must be finite and >= 0");
  if (cv_folds < 2) fail("cv_folds must be at least 2");
  if (subsample < 2 * cv_folds) fail("subsample too small for the fold count");
  if (!(svm_C > 0.0)) fail("svm_C must be positive");
  if (noise) {
    try {
      noise->validate();
    } catch (const Error& e) {
      fail(e.what());
    }
  }
}

const std::vector<std::string>& NasConfig::preset_names() { return kPresetNames; }

NasConfig NasConfig::preset(const std::string& variant) {
  NasConfig c;
  c.variant = variant;
  auto set_chain = [&](int n) {
    c.n_qubits = n;
    c.coupling = CouplingMap::chain(n);
    c.coupling_name = "chain" + std::to_string(n);
  };
  if (variant == "hw-fixed-rz") {
    set_chain(6);
    c.fixed_rz = true;
  } else if (variant == "hw-free") {
    set_chain(10);
  } else if (variant == "all-gates") {
    set_chain(10);
    c.vocabulary = GateVocabulary::extended();
  } else if (variant == "noisy") {
    set_chain(6);
    c.noise = NoiseModel{};
  } else if (variant == "sparse") {
    set_chain(10);
    c.sparsity_lambda = 0.01;
  } else {
    throw ConfigError("unknown NAS variant '" + variant + "'");
  }
  return c;
}

nlohmann::json nas_config_to_json(const NasConfig& c) {
  nlohmann::json edges = nlohmann::json::array();
  for (auto [a, b] : c.coupling.edges()) edges.push_back({a, b});
  nlohmann::json noise = nullptr;
  if (c.noise)
    noise = {{"p1", c.noise->p1}, {"p2", c.noise->p2}, {"gamma", c.noise->gamma},
             {"convention", std::string(convention_name(c.noise->convention))}};
  return nlohmann::json{{"variant", c.variant},
                        {"population", c.population},
                        {"generations", c.generations},
                        {"elitism", c.elitism},
                        {"tournament_k", c.tournament_k},
                        {"p_mut", c.p_mut},
                        {"p_insert", c.p_insert},
                        {"p_delete", c.p_delete},
                        {"min_length", c.min_length},
                        {"max_length", c.max_length},
                        {"vocabulary", c.vocabulary.name},
                        {"coupling_name", c.coupling_name},
                        {"coupling", {{"n_qubits", c.coupling.n_qubits()}, {"edges", edges}}},
                        {"n_qubits", c.n_qubits},
                        {"fixed_rz", c.fixed_rz},
                        {"noise", noise},
                        {"sparsity_lambda", c.sparsity_lambda},
                        {"seed", c.seed},
                        {"subsample", c.subsample},
                        {"cv_folds", c.cv_folds},
                        {"svm_C", c.svm_C}};
}

NasConfig nas_config_from_json(const nlohmann::json& j, const std::string& data_dir) {
  if (!j.is_object()) throw ConfigError("nas config must be a JSON object");
  NasConfig c = j.contains("variant") ? NasConfig::preset(j.at("variant").get<std::string>()) : NasConfig{};
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "variant") continue;
      else if (key == "population") c.population = v.get<int>();
      else if (key == "generations") c.generations = v.get<int>();
      else if (key == "elitism") c.elitism = v.get<int>();
      else if (key == "tournament_k") c.tournament_k = v.get<int>();
      else if (key == "p_mut") c.p_mut = v.get<double>();
      else if (key == "p_insert") c.p_insert = v.get<double>();
      else if (key == "p_delete") c.p_delete = v.get<double>();
      else if (key == "min_length") c.min_length = v.get<int>();
      else if (key == "max_length") c.max_length = v.get<int>();
      else if (key == "vocabulary") c.vocabulary = GateVocabulary::by_name(v.get<std::string>());
      else if (key == "coupling_name") c.coupling_name = v.get<std::string>();
      else if (key == "coupling") {
        if (v.is_string()) {
          c.coupling_name = v.get<std::string>();
          c.coupling = resolve_coupling(c.coupling_name, data_dir);
        } else {
          std::vector<std::pair<int, int>> edges;
          for (const auto& e : v.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
          c.coupling = CouplingMap(v.at("n_qubits").get<int>(), std::move(edges));
          if (!j.contains("coupling_name")) c.coupling_name = "custom";
        }
      } else if (key == "n_qubits") c.n_qubits = v.get<int>();
      else if (key == "fixed_rz") c.fixed_rz = v.get<bool>();
      else if (key == "noise") {
        if (v.is_null()) {
          c.noise.reset();
        } else {
          NoiseModel m;
          for (const auto& [nk, nv] : v.items()) {
            if (nk == "p1") m.p1 = nv.get<double>();
            else if (nk == "p2") m.p2 = nv.get<double>();
            else if (nk == "gamma") m.gamma = nv.get<double>();
            else if (nk == "convention") {
              auto conv = parse_convention(nv.get<std::string>());
              if (!conv) throw ConfigError("unknown depolarizing convention '" + nv.get<std::string>() + "'");
              m.convention = *conv;
            } else throw ConfigError("unknown noise key '" + nk + "'");
          }
          c.noise = m;
        }
      } else if (key == "sparsity_lambda") c.sparsity_lambda = v.get<double>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "subsample") c.subsample = v.get<int>();
      else if (key == "cv_folds") c.cv_folds = v.get<int>();
      else if (key == "svm_C") c.svm_C = v.get<double>();
      else throw ConfigError("unknown nas config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("nas config: ") + e.what());
  } catch (const TopologyError& e) {
    throw ConfigError(std::string("nas config: ") + e.what());
  }
  c.validate();
  return c;
}

GateToken random_token(const NasConfig& config, RandomStream& rng, int feature_dim) {
  const auto& kinds = config.vocabulary.kinds;
  if (kinds.empty()) throw ConfigError("empty gate vocabulary");
  GateToken t;
  t.kind = kinds[rng.below(kinds.size())];
  if (gate_arity(t.kind) == 2) {
    const auto& edges = config.coupling.edges();
    if (edges.empty()) throw ConfigError("no coupling edges for a two-qubit gate");
    auto [a, b] = edges[rng.below(edges.size())];
    if (rng.bernoulli(0.5)) std::swap(a, b);
    t.qubits = {a, b};
  } else {
    t.qubits = {static_cast<int>(rng.below(static_cast<std::uint64_t>(config.n_qubits))), -1};
  }
  if (is_parametric(t.kind)) t.feature = feature_dim > 0 ? t.qubits[0] % feature_dim : t.qubits[0];
  return t;
}

Genome random_genome(const NasConfig& config, RandomStream& rng, int feature_dim) {
  const int len = rng.uniform_int(config.min_length, config.max_length);
  Genome g;
  for (int i = 0; i < len; ++i) g.tokens.push_back(random_token(config, rng, feature_dim));
  return g;
}

std::size_t tournament_select(std::span<const double> fitness, int k, RandomStream& rng) {
  const std::size_t n = fitness.size();
  if (n == 0) throw InvalidParameterError("tournament over an empty population");
  if (k < 1 || static_cast<std::size_t>(k) > n) throw InvalidParameterError("tournament size out of range");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i)
    std::swap(idx[i], idx[i + static_cast<std::size_t>(rng.below(n - i))]);
  std::size_t best = idx[0];
  for (std::size_t i = 1; i < static_cast<std::size_t>(k); ++i) {
    const std::size_t c = idx[i];
    if (fitness[c] > fitness[best] || (fitness[c] == fitness[best] && c < best)) best = c;
  }
  return best;
}

namespace {

void clamp_length(Genome& g, const NasConfig& config, RandomStream& rng, int feature_dim) {
  if (g.tokens.size() > static_cast<std::size_t>(config.max_length)) g.tokens.resize(static_cast<std::size_t>(config.max_length));
  while (g.tokens.size() < static_cast<std::size_t>(config.min_length)) g.tokens.push_back(random_token(config, rng, feature_dim));
}

std::size_t cut_point(std::size_t len, RandomStream& rng) {
  if (len < 2) return len;
  return 1 + static_cast<std::size_t>(rng.below(len - 1));
}

}  // namespace

std::pair<Genome, Genome> crossover(const Genome& a, const Genome& b, const NasConfig& config, RandomStream& rng,
                                    int feature_dim) {
  const std::size_t ca = cut_point(a.size(), rng);
  const std::size_t cb = cut_point(b.size(), rng);
  Genome c1, c2;
  c1.tokens.assign(a.tokens.begin(), a.tokens.begin() + static_cast<std::ptrdiff_t>(ca));
  c1.tokens.insert(c1.tokens.end(), b.tokens.begin() + static_cast<std::ptrdiff_t>(cb), b.tokens.end());
  c2.tokens.assign(b.tokens.begin(), b.tokens.begin() + static_cast<std::ptrdiff_t>(cb));
  c2.tokens.insert(c2.tokens.end(), a.tokens.begin() + static_cast<std::ptrdiff_t>(ca), a.tokens.end());
  clamp_length(c1, config, rng, feature_dim);
  clamp_length(c2, config, rng, feature_dim);
  return {std::move(c1), std::move(c2)};
}

Genome mutate(const Genome& genome, const NasConfig& config, RandomStream& rng, int feature_dim, MutationInfo* info) {
  Genome g = genome;
  MutationInfo local;
  for (auto& t : g.tokens) {
    if (rng.bernoulli(config.p_mut)) {
      t = random_token(config, rng, feature_dim);
      ++local.replaced;
    }
  }
  if (rng.bernoulli(config.p_insert) && g.tokens.size() < static_cast<std::size_t>(config.max_length)) {
    const auto pos = static_cast<std::ptrdiff_t>(rng.below(g.tokens.size() + 1));
    g.tokens.insert(g.tokens.begin() + pos, random_token(config, rng, feature_dim));
    local.inserted = true;
  }
  if (rng.bernoulli(config.p_delete) && g.tokens.size() > static_cast<std::size_t>(config.min_length)) {
    const auto pos = static_cast<std::ptrdiff_t>(rng.below(g.tokens.size()));
    g.tokens.erase(g.tokens.begin() + pos);
    local.deleted = true;
  }
  if (info) *info = local;
  return g;
}

FitnessEvaluator::FitnessEvaluator(NasConfig config, Dataset data) : config_(std::move(config)), data_(std::move(data)) {
  if (data_.positives() == 0 || data_.negatives() == 0)
    throw DegenerateInputError("fitness data needs both classes");
}

FitnessResult FitnessEvaluator::compute(const Genome& genome, int threads) const {
  FitnessResult r;
  try {
    FeatureMapSpec spec;
    spec.kind = MapKind::Genome;
    spec.n_qubits = config_.n_qubits;
    spec.fixed_rz = config_.fixed_rz;
    spec.genome = genome;
    KernelOptions opts;
    opts.noise = config_.noise;
    opts.threads = threads;
    const auto gram = gram_matrix(spec, data_.X, nullptr, opts);
    const auto cv = cross_validate(gram.values, data_.y, config_.svm_C, config_.cv_folds, config_.seed);
    r.cv_accuracy = cv.mean_accuracy;
    r.penalty = config_.sparsity_lambda * genome.two_qubit_count();
    r.fitness = r.cv_accuracy - r.penalty;
  } catch (const std::exception& e) {
    r = FitnessResult{};
    r.failed = true;
    r.error = e.what();
  }
  return r;
}

std::optional<FitnessResult> FitnessEvaluator::cached(const Genome& genome) const {
  std::lock_guard lock(mutex_);
  auto it = memo_.find(format_genome(genome));
  if (it == memo_.end()) return std::nullopt;
  return it->second;
}

FitnessResult FitnessEvaluator::evaluate(const Genome& genome, int threads) {
  const auto key = format_genome(genome);
  {
    std::lock_guard lock(mutex_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  auto r = compute(genome, threads);
  std::lock_guard lock(mutex_);
  ++evaluations_;
  return memo_.emplace(key, std::move(r)).first->second;
}

namespace {

struct Individual {
  Genome genome;
  std::string origin;
  std::vector<int> parents;
  std::vector<std::string> operators;
};

std::vector<std::string> mutation_ops(const MutationInfo& m) {
  std::vector<std::string> ops;
  if (m.replaced > 0) ops.push_back("replace:" + std::to_string(m.replaced));
  if (m.inserted) ops.push_back("insert");
  if (m.deleted) ops.push_back("delete");
  return ops;
}

}  // namespace

SearchTrace evolve(const NasConfig& config, const Dataset& data, int threads) {
  config.validate();
  const int workers = resolve_threads(threads);
  FitnessEvaluator evaluator(config, data);
  const int dim = evaluator.feature_dim();
  const auto P = static_cast<std::size_t>(config.population);

  std::vector<Individual> pop;
  for (std::size_t i = 0; i < P; ++i) {
    auto rng = RandomStream::derive(config.seed, "nas-init", {i});
    pop.push_back({random_genome(config, rng, dim), "init", {}, {}});
  }

  SearchTrace trace;
  double best_so_far = -std::numeric_limits<double>::infinity();
  for (int gen = 0; gen <= config.generations; ++gen) {
    // Decide memo hits sequentially so the trace does not depend on scheduling.
    std::vector<std::size_t> fresh;
    std::vector<bool> hit(P, false);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < P; ++i) {
      const auto key = format_genome(pop[i].genome);
      if (evaluator.cached(pop[i].genome) || seen.count(key)) hit[i] = true;
      else {
        seen.insert(key);
        fresh.push_back(i);
      }
    }
    const int outer = std::max(1, std::min<int>(workers, static_cast<int>(fresh.size())));
    const int inner = std::max(1, workers / outer);
    parallel_for(fresh.size(), outer, [&](std::size_t k) { evaluator.evaluate(pop[fresh[k]].genome, inner); });

    std::vector<double> fitness(P);
    double gen_best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < P; ++i) {
      TraceRecord rec;
      rec.generation = gen;
      rec.index = static_cast<int>(i);
      rec.genome = pop[i].genome;
      rec.result = *evaluator.cached(pop[i].genome);
      rec.origin = pop[i].origin;
      rec.parents = pop[i].parents;
      rec.operators = pop[i].operators;
      rec.memo_hit = hit[i];
      fitness[i] = rec.result.fitness;
      if (rec.result.failed) ++trace.failures;
      gen_best = std::max(gen_best, fitness[i]);
      // strict improvement keeps the earliest of equally fit genomes
      if (fitness[i] > trace.best_fitness || trace.records.empty()) {
        trace.best_fitness = fitness[i];
        trace.best_genome = pop[i].genome;
        trace.best_generation = gen;
        trace.best_index = static_cast<int>(i);
      }
      trace.records.push_back(std::move(rec));
    }
    best_so_far = std::max(best_so_far, gen_best);
    trace.best_per_generation.push_back(best_so_far);
    trace.generation_best.push_back(gen_best);
    if (gen == config.generations) break;

    std::vector<std::size_t> rank(P);
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });

    std::vector<Individual> next;
    for (int e = 0; e < config.elitism; ++e) {
      const auto src = rank[static_cast<std::size_t>(e)];
      next.push_back({pop[src].genome, "elite", {static_cast<int>(src)}, {"elite"}});
    }
    for (std::uint64_t pair = 0; next.size() < P; ++pair) {
      const auto g = static_cast<std::uint64_t>(gen);
      auto sel_a = RandomStream::derive(config.seed, "nas-select", {g, pair, 0});
      auto sel_b = RandomStream::derive(config.seed, "nas-select", {g, pair, 1});
      const auto ia = tournament_select(fitness, config.tournament_k, sel_a);
      const auto ib = tournament_select(fitness, config.tournament_k, sel_b);
      auto xrng = RandomStream::derive(config.seed, "nas-crossover", {g, pair});
      auto [c1, c2] = crossover(pop[ia].genome, pop[ib].genome, config, xrng, dim);
      std::array<Genome*, 2> children{&c1, &c2};
      for (std::uint64_t c = 0; c < 2 && next.size() < P; ++c) {
        auto mrng = RandomStream::derive(config.seed, "nas-mutate", {g, pair, c});
        MutationInfo info;
        Genome child = mutate(*children[c], config, mrng, dim, &info);
        std::vector<std::string> ops{"crossover"};
        for (auto& op : mutation_ops(info)) ops.push_back(std::move(op));
        next.push_back({std::move(child), "offspring", {static_cast<int>(ia), static_cast<int>(ib)}, std::move(ops)});
      }
    }
    pop = std::move(next);
  }
  return trace;
}

nlohmann::json trace_record_json(const TraceRecord& r) {
  nlohmann::json tokens = nlohmann::json::array();
  for (const auto& t : r.genome.tokens) tokens.push_back(format_token(t));
  nlohmann::json j{{"generation", r.generation},
                   {"index", r.index},
                   {"genome", tokens},
                   {"fitness", r.result.failed ? nlohmann::json(nullptr) : nlohmann::json(r.result.fitness)},
                   {"cv_accuracy", r.result.cv_accuracy},
                   {"penalty", r.result.penalty},
                   {"two_qubit_gates", r.genome.two_qubit_count()},
                   {"origin", r.origin},
                   {"parents", r.parents},
                   {"operators", r.operators},
                   {"memo_hit", r.memo_hit},
                   {"failed", r.result.failed}};
  if (r.result.failed) j["error"] = r.result.error;
  return j;
}

std::string trace_jsonl(const SearchTrace& trace) {
  std::string out;
  for (const auto& r : trace.records) out += trace_record_json(r).dump() + "\n";
  return out;
}

nlohmann::json trace_summary_json(const SearchTrace& trace) {
  nlohmann::json tokens = nlohmann::json::array();
  for (const auto& t : trace.best_genome.tokens) tokens.push_back(format_token(t));
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json best_so_far = nlohmann::json::array(), per_gen = nlohmann::json::array();
  for (double v : trace.best_per_generation) best_so_far.push_back(finite_or_null(v));
  for (double v : trace.generation_best) per_gen.push_back(finite_or_null(v));
  return nlohmann::json{{"best_genome", tokens},
                        {"best_fitness", finite_or_null(trace.best_fitness)},
                        {"best_generation", trace.best_generation},
                        {"best_index", trace.best_index},
                        {"best_so_far", best_so_far},
                        {"generation_best", per_gen},
                        {"evaluated", trace.records.size()},
                        {"failures", trace.failures}};
}

}  // namespace hwqsvm
