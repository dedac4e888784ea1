#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kernelpf/atom_kernel.hpp"
#include "kernelpf/rng.hpp"

namespace kernelpf {

/// Particle types: the state index for finite presets, the coordinate for
/// the continuous one.
using ParticleList = std::vector<double>;

/// One reproduction event: the stem offspring xi and the number N of new
/// clusters. Dependence between the two is allowed and used by the
/// split-chain and linear-fractional presets.
struct Reproduction {
  ParticleList stem_offspring;
  std::uint64_t cluster_count = 0;
};

struct ReproductionLaw {
  std::function<Reproduction(double type, Rng&)> sample;
};

struct ClusterLaw {
  std::function<ParticleList(Rng&)> sample;
};

/// Simulation laws together with the exact mean kernel they realize
/// (E xi^(x)(A) = m(x,A), E N^(x) = g(x), E tau(A) = gamma(A)), for
/// cross-module consistency checks.
struct Preset {
  std::string name;
  ReproductionLaw reproduction;
  ClusterLaw cluster;
  KernelPtr kernel;
};

struct SplitChainParams {
  Matrix P;                    // stochastic kernel
  std::vector<double> g;       // regeneration probabilities, in [0,1]
  std::vector<double> gamma;   // regeneration measure, a probability vector
  std::vector<std::string> labels;  // optional state names
};

struct LinearFractionalParams {
  std::vector<double> survival;   // P(xi^(x)(E) = 1)
  Matrix transition;              // offspring type given survival (stochastic)
  double mean_clusters = 1.0;     // mean of the geometric cluster count
  std::vector<double> gamma;      // cluster type distribution
  std::vector<std::string> labels;
};

struct PureAtomParams {
  std::vector<double> g;       // cluster-count means per state
  std::vector<double> gamma;   // cluster mean measure
  std::vector<std::string> labels;
};

struct AnalyticPresetParams {
  double a = 2.0, b = 2.0, c = 0.2;
  std::size_t nodes = 400;
  std::optional<double> T;
};

/// Split chain of a stochastic kernel: each particle has exactly one
/// offspring; a g(x)-coin decides between the gamma-transition (counted as
/// one cluster) and the residual kernel p(x,.)/(1-g(x)).
Preset build_split_chain_preset(const SplitChainParams& params);

/// Linear-fractional reproduction: at most one stem offspring, and a
/// geometric number of simple clusters on survival.
Preset build_linear_fractional_preset(const LinearFractionalParams& params);

/// No stem at all: N ~ Poisson(g(x)); a cluster holds Poisson(gamma(E))
/// particles drawn from gamma/gamma(E).
Preset build_pure_atom_preset(const PureAtomParams& params);

/// The three-parameter continuous kernel: Poisson(a) stem offspring with
/// independent unit-exponential displacements, Poisson(c e^{-bx}) clusters,
/// each cluster a single particle of type 0.
Preset build_analytic_preset(const AnalyticPresetParams& params);

/// Dispatch by preset name with each family's documented defaults.
Preset build_preset(const std::string& name);

// --- simulation -----------------------------------------------------------------

struct LifeRecord {
  /// X_n = clusters produced at time n by the stem particles born at n-1
  std::vector<std::uint64_t> X;
  std::size_t L = 0;       // stem extinction time (X.size())
  bool censored = false;   // stem still alive at the horizon
};

constexpr std::size_t kDefaultPopulationCap = 10000000;

/// The life record of one embedded individual: the stem process from a
/// single cluster, evolved generation-wise, counting new clusters.
LifeRecord simulate_life_record(const ReproductionLaw& reproduction,
                                const ClusterLaw& cluster, Rng& rng, std::size_t horizon,
                                std::size_t population_cap = kDefaultPopulationCap);

/// Thrown by simulate_cmj when the population cap is exceeded; carries the
/// completed part of the trajectory.
class ExplosionError : public Error {
public:
  ExplosionError(const std::string& message, std::vector<std::uint64_t> partial)
      : Error("explosion", message), partial_(std::move(partial)) {}
  const std::vector<std::uint64_t>& partial() const { return partial_; }

private:
  std::vector<std::uint64_t> partial_;
};

/// W_n for n = 1..horizon: newborn clusters at each time in the full
/// population grown from one initial cluster.
std::vector<std::uint64_t> simulate_cmj(const ReproductionLaw& reproduction,
                                        const ClusterLaw& cluster, Rng& rng,
                                        std::size_t horizon,
                                        std::size_t population_cap = kDefaultPopulationCap);

struct Estimate {
  double mean = 0.0;
  double se = 0.0;          // sample sd / sqrt(samples)
  std::size_t samples = 0;
};

struct SimBatch {
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::size_t horizon = 0;
  std::vector<Estimate> f_hat;  // index n-1 holds the estimate of f_n
  std::vector<Estimate> F_hat;
  std::vector<LifeRecord> records;                    // per replicate
  std::vector<std::vector<std::uint64_t>> W_trajectories;  // per replicate
  std::size_t explosions = 0;
  std::size_t censored = 0;
};

/// Monte Carlo estimates of f_n and F_n over independent replicates: each
/// replicate derives its own streams from (master seed, replicate index),
/// and aggregation is a fold in replicate order, so the batch is
/// bit-identical for a fixed seed regardless of the worker count.
/// Worker count 0 picks hardware concurrency capped by KERNELPF_THREADS.
SimBatch estimate_series(const ReproductionLaw& reproduction, const ClusterLaw& cluster,
                         std::size_t replicates, std::size_t horizon,
                         std::uint64_t master_seed, std::size_t workers = 0);

struct GapSample {
  std::vector<std::size_t> gaps;
  std::size_t censored = 0;
  double mean = 0.0;
  double se = 0.0;
};

/// Inter-arrival times of the embedded renewal process from a stream of
/// single-lineage life records (split-chain preset): each uncensored record
/// contributes its length L as one gap; lineages that never regenerate
/// within the horizon are censored entries.
GapSample regeneration_times(const ReproductionLaw& reproduction, const ClusterLaw& cluster,
                             std::size_t count, std::size_t horizon,
                             std::uint64_t master_seed);

std::size_t effective_worker_count(std::size_t requested);

}  // namespace kernelpf
