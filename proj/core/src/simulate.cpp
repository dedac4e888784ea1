#include "kernelpf/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace kernelpf {

namespace {

std::vector<std::string> default_labels(std::size_t n, std::vector<std::string> given) {
  if (!given.empty()) return given;
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return labels;
}

}  // namespace

Preset build_split_chain_preset(const SplitChainParams& params) {
  const std::size_t n = params.g.size();
  if (params.P.rows() != n || params.P.cols() != n || params.gamma.size() != n)
    throw dimension_mismatch("split-chain pieces must share one state set");
  double gamma_total = 0.0;
  for (double v : params.gamma) gamma_total += v;
  if (std::abs(gamma_total - 1.0) > 1e-12)
    throw PreconditionError("invalid-argument", "split-chain gamma must be a probability vector");
  for (std::size_t i = 0; i < n; ++i) {
    if (params.g[i] < 0.0 || params.g[i] > 1.0)
      throw PreconditionError("invalid-argument", "split-chain g must lie in [0,1]");
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += params.P(i, j);
    if (std::abs(row - 1.0) > 1e-12)
      throw PreconditionError("invalid-argument", "split-chain P must be stochastic");
  }

  auto space = TypeSpace::finite(default_labels(n, params.labels));
  auto kernel = DenseKernel::from_full(space, params.P, params.g, params.gamma);

  // residual kernel rows p(x,.)/(1-g(x))
  std::vector<std::vector<double>> residual(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) residual[i][j] = kernel->stem_operator()(i, j);

  Preset preset;
  preset.name = "split-chain";
  preset.kernel = kernel;
  const std::vector<double> g = params.g;
  preset.reproduction.sample = [g, residual](double type, Rng& rng) {
    const auto x = static_cast<std::size_t>(type);
    Reproduction rep;
    if (rng.bernoulli(g[x])) {
      rep.cluster_count = 1;  // regeneration: no stem offspring
    } else {
      rep.stem_offspring.push_back(static_cast<double>(rng.categorical(residual[x])));
    }
    return rep;
  };
  const std::vector<double> gamma = params.gamma;
  preset.cluster.sample = [gamma](Rng& rng) {
    return ParticleList{static_cast<double>(rng.categorical(gamma))};
  };
  return preset;
}

Preset build_linear_fractional_preset(const LinearFractionalParams& params) {
  const std::size_t n = params.survival.size();
  if (params.transition.rows() != n || params.transition.cols() != n ||
      params.gamma.size() != n)
    throw dimension_mismatch("linear-fractional pieces must share one state set");
  if (!(params.mean_clusters > 0.0))
    throw PreconditionError("invalid-argument", "mean cluster count must be positive");
  for (double q : params.survival)
    if (q < 0.0 || q > 1.0)
      throw PreconditionError("invalid-argument", "survival probabilities must lie in [0,1]");

  auto space = TypeSpace::finite(default_labels(n, params.labels));
  // m(x,A) = P(xi^(x)(A) = 1) = q(x) * transition(x,A); g(x) = EN * q(x)
  Matrix m(n, n);
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = params.mean_clusters * params.survival[i];
    for (std::size_t j = 0; j < n; ++j)
      m(i, j) = params.survival[i] * params.transition(i, j);
  }
  auto kernel = DenseKernel::from_parts(space, std::move(m), g, params.gamma);

  Preset preset;
  preset.name = "linear-fractional";
  preset.kernel = kernel;
  const auto survival = params.survival;
  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) rows[i][j] = params.transition(i, j);
  // geometric on {0,1,...} with the requested mean
  const double p_geo = 1.0 / (1.0 + params.mean_clusters);
  preset.reproduction.sample = [survival, rows, p_geo](double type, Rng& rng) {
    const auto x = static_cast<std::size_t>(type);
    Reproduction rep;
    if (rng.bernoulli(survival[x])) {
      rep.stem_offspring.push_back(static_cast<double>(rng.categorical(rows[x])));
      rep.cluster_count = rng.geometric0(p_geo);  // N = N~ on survival
    }
    return rep;
  };
  const auto gamma = params.gamma;
  preset.cluster.sample = [gamma](Rng& rng) {
    return ParticleList{static_cast<double>(rng.categorical(gamma))};
  };
  return preset;
}

Preset build_pure_atom_preset(const PureAtomParams& params) {
  const std::size_t n = params.g.size();
  if (params.gamma.size() != n)
    throw dimension_mismatch("pure-atom pieces must share one state set");
  auto space = TypeSpace::finite(default_labels(n, params.labels));
  auto kernel =
      DenseKernel::from_parts(space, Matrix(n, n, 0.0), params.g, params.gamma);

  Preset preset;
  preset.name = "pure-atom";
  preset.kernel = kernel;
  const auto g = params.g;
  preset.reproduction.sample = [g](double type, Rng& rng) {
    Reproduction rep;
    rep.cluster_count = rng.poisson(g[static_cast<std::size_t>(type)]);
    return rep;  // no stem: the particle dies childless
  };
  const auto gamma = params.gamma;
  double total = 0.0;
  for (double v : gamma) total += v;
  const double gamma_total = total;
  preset.cluster.sample = [gamma, gamma_total](Rng& rng) {
    ParticleList particles;
    const std::uint64_t size = rng.poisson(gamma_total);
    particles.reserve(size);
    for (std::uint64_t k = 0; k < size; ++k)
      particles.push_back(static_cast<double>(rng.categorical(gamma)));
    return particles;
  };
  return preset;
}

Preset build_analytic_preset(const AnalyticPresetParams& params) {
  auto kernel = AnalyticKernel::create(params.a, params.b, params.c, params.nodes, params.T);
  Preset preset;
  preset.name = "analytic-example";
  preset.kernel = kernel;
  const double a = params.a, b = params.b, c = params.c;
  preset.reproduction.sample = [a, b, c](double type, Rng& rng) {
    Reproduction rep;
    const std::uint64_t count = rng.poisson(a);
    rep.stem_offspring.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k)
      rep.stem_offspring.push_back(type + rng.exponential(1.0));
    rep.cluster_count = rng.poisson(c * std::exp(-b * type));
    return rep;
  };
  preset.cluster.sample = [](Rng&) { return ParticleList{0.0}; };
  return preset;
}

Preset build_preset(const std::string& name) {
  if (name == "split-chain") {
    SplitChainParams p;
    p.P = Matrix::from_rows({{0.5, 0.5}, {0.25, 0.75}});
    p.g = {0.2, 0.4};
    p.gamma = {0.5, 0.5};
    return build_split_chain_preset(p);
  }
  if (name == "linear-fractional") {
    LinearFractionalParams p;
    p.survival = {0.8, 0.6};
    p.transition = Matrix::from_rows({{0.5, 0.5}, {0.3, 0.7}});
    p.mean_clusters = 1.0;
    p.gamma = {0.5, 0.5};
    return build_linear_fractional_preset(p);
  }
  if (name == "pure-atom") {
    PureAtomParams p;
    p.g = {0.8};
    p.gamma = {1.0};
    return build_pure_atom_preset(p);
  }
  if (name == "analytic-example") return build_analytic_preset({});
  throw PreconditionError("unknown-preset", "no preset named '" + name + "'");
}

// --- simulation -------------------------------------------------------------------

LifeRecord simulate_life_record(const ReproductionLaw& reproduction,
                                const ClusterLaw& cluster, Rng& rng, std::size_t horizon,
                                std::size_t population_cap) {
  if (horizon < 1) throw PreconditionError("invalid-argument", "horizon must be >= 1");
  LifeRecord record;
  ParticleList generation = cluster.sample(rng);
  for (std::size_t n = 1; n <= horizon; ++n) {
    ParticleList next;
    std::uint64_t clusters = 0;
    for (double type : generation) {
      Reproduction rep = reproduction.sample(type, rng);
      clusters += rep.cluster_count;
      next.insert(next.end(), rep.stem_offspring.begin(), rep.stem_offspring.end());
    }
    record.X.push_back(clusters);
    generation = std::move(next);
    if (generation.empty()) {
      record.L = n;
      return record;
    }
    if (generation.size() > population_cap) {
      record.L = n;
      record.censored = true;
      return record;
    }
  }
  record.L = horizon;
  record.censored = true;  // stem survived the horizon
  return record;
}

std::vector<std::uint64_t> simulate_cmj(const ReproductionLaw& reproduction,
                                        const ClusterLaw& cluster, Rng& rng,
                                        std::size_t horizon,
                                        std::size_t population_cap) {
  if (horizon < 1) throw PreconditionError("invalid-argument", "horizon must be >= 1");
  std::vector<std::uint64_t> W;
  ParticleList generation = cluster.sample(rng);
  for (std::size_t n = 1; n <= horizon; ++n) {
    ParticleList next;
    std::uint64_t clusters = 0;
    for (double type : generation) {
      Reproduction rep = reproduction.sample(type, rng);
      clusters += rep.cluster_count;
      next.insert(next.end(), rep.stem_offspring.begin(), rep.stem_offspring.end());
    }
    W.push_back(clusters);
    for (std::uint64_t k = 0; k < clusters; ++k) {
      ParticleList tau = cluster.sample(rng);
      next.insert(next.end(), tau.begin(), tau.end());
    }
    if (next.size() > population_cap)
      throw ExplosionError("population cap " + std::to_string(population_cap) +
                               " exceeded at time " + std::to_string(n),
                           std::move(W));
    generation = std::move(next);
    if (generation.empty()) break;
  }
  return W;
}

std::size_t effective_worker_count(std::size_t requested) {
  std::size_t workers = requested;
  if (workers == 0) {
    workers = std::max(1u, std::thread::hardware_concurrency());
    if (const char* cap = std::getenv("KERNELPF_THREADS")) {
      const long parsed = std::strtol(cap, nullptr, 10);
      if (parsed > 0) workers = std::min<std::size_t>(workers, static_cast<std::size_t>(parsed));
    }
  }
  return std::max<std::size_t>(1, workers);
}

SimBatch estimate_series(const ReproductionLaw& reproduction, const ClusterLaw& cluster,
                         std::size_t replicates, std::size_t horizon,
                         std::uint64_t master_seed, std::size_t workers) {
  if (replicates < 100)
    throw PreconditionError("invalid-argument", "need at least 100 replicates");
  SimBatch batch;
  batch.replicates = replicates;
  batch.seed = master_seed;
  batch.horizon = horizon;
  batch.records.resize(replicates);
  batch.W_trajectories.resize(replicates);
  std::vector<char> exploded(replicates, 0);

  const std::size_t nworkers = effective_worker_count(workers);
  std::atomic<std::size_t> cursor{0};
  auto run = [&]() {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= replicates) return;
      Rng life_rng = Rng::stream(master_seed, 2 * i);
      batch.records[i] = simulate_life_record(reproduction, cluster, life_rng, horizon);
      Rng cmj_rng = Rng::stream(master_seed, 2 * i + 1);
      try {
        batch.W_trajectories[i] = simulate_cmj(reproduction, cluster, cmj_rng, horizon);
      } catch (const ExplosionError& e) {
        batch.W_trajectories[i] = e.partial();
        exploded[i] = 1;
      }
    }
  };
  if (nworkers == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nworkers);
    for (std::size_t w = 0; w < nworkers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }

  // deterministic fold in replicate order
  for (std::size_t i = 0; i < replicates; ++i) {
    batch.explosions += exploded[i] ? 1 : 0;
    batch.censored += batch.records[i].censored ? 1 : 0;
  }
  if (2 * batch.explosions > replicates)
    throw PreconditionError("unreliable-estimate",
                            "more than half of the replicates hit the population cap");

  batch.f_hat.assign(horizon, {});
  batch.F_hat.assign(horizon, {});
  for (std::size_t n = 0; n < horizon; ++n) {
    double sum = 0.0, sum_sq = 0.0;
    std::size_t count_n = 0;
    for (std::size_t i = 0; i < replicates; ++i) {
      const auto& record = batch.records[i];
      // records stopped by the population cap (censored short of the
      // horizon) carry no information beyond their last generation
      if (record.censored && record.X.size() < horizon && n >= record.X.size())
        continue;
      const double v = n < record.X.size() ? static_cast<double>(record.X[n]) : 0.0;
      sum += v;
      sum_sq += v * v;
      ++count_n;
    }
    const double count = static_cast<double>(count_n);
    const double mean = count_n > 0 ? sum / count : 0.0;
    const double var = count_n > 1
                           ? std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0))
                           : 0.0;
    batch.f_hat[n] = {mean, count_n > 0 ? std::sqrt(var / count) : 0.0, count_n};

    double Fsum = 0.0, Fsum_sq = 0.0;
    std::size_t Fcount = 0;
    for (std::size_t i = 0; i < replicates; ++i) {
      const auto& W = batch.W_trajectories[i];
      if (exploded[i] && n >= W.size()) continue;  // truncated beyond validity
      const double v = n < W.size() ? static_cast<double>(W[n]) : 0.0;
      Fsum += v;
      Fsum_sq += v * v;
      ++Fcount;
    }
    if (Fcount > 0) {
      const double fc = static_cast<double>(Fcount);
      const double Fmean = Fsum / fc;
      const double Fvar =
          Fcount > 1 ? std::max(0.0, (Fsum_sq - fc * Fmean * Fmean) / (fc - 1.0)) : 0.0;
      batch.F_hat[n] = {Fmean, std::sqrt(Fvar / fc), Fcount};
    }
  }
  return batch;
}

GapSample regeneration_times(const ReproductionLaw& reproduction, const ClusterLaw& cluster,
                             std::size_t count, std::size_t horizon,
                             std::uint64_t master_seed) {
  GapSample sample;
  sample.gaps.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = Rng::stream(master_seed, i);
    const LifeRecord record = simulate_life_record(reproduction, cluster, rng, horizon);
    if (record.censored) {
      ++sample.censored;
      continue;
    }
    sample.gaps.push_back(record.L);
  }
  if (!sample.gaps.empty()) {
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t gap : sample.gaps) {
      sum += static_cast<double>(gap);
      sum_sq += static_cast<double>(gap) * static_cast<double>(gap);
    }
    const double n = static_cast<double>(sample.gaps.size());
    sample.mean = sum / n;
    const double var = n > 1 ? std::max(0.0, (sum_sq - n * sample.mean * sample.mean) / (n - 1.0)) : 0.0;
    sample.se = std::sqrt(var / n);
  }
  return sample;
}

}  // namespace kernelpf
