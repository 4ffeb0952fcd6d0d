#pragma once

#include "lassocv/rng.hpp"
#include "lassocv/solvers.hpp"
#include "lassocv/types.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lassocv {

// Rows i.i.d. N(0, D(rho)): standard normals times the symmetric root of D(rho).
MatrixXd generate_design(Index n, Index p, double rho, std::uint64_t seed);
MatrixXd generate_design(Index n, const Covariance& d, std::uint64_t seed);

// s = ceil(n^alpha) Laplace(1) entries at randomly permuted positions, zeros elsewhere.
VectorXd generate_coefficients(Index n, Index p, double alpha, std::uint64_t seed);

// beta * sqrt(snr / beta^T D beta)
VectorXd scale_to_snr(const VectorXd& beta, const MatrixXd& d, double snr);

// Unit-variance noise: N(0, 1) or t(3) / sqrt(3).
VectorXd generate_noise(Index n, NoiseKind kind, std::uint64_t seed);

// One draw of the simulation DGP (sigma^2 = 1).
struct SimDraw {
  PopulationModel model;
  Dataset data;
};
SimDraw draw_replication(const SimCondition& cond, std::shared_ptr<const Covariance> d,
                         std::uint64_t rep_seed);

// Stream key for replication `rep` of a condition: (master seed, condition id, rep).
std::uint64_t replication_seed(const SimCondition& cond, int rep);

struct RunOptions {
  std::vector<Selector> selectors{Selector::CV, Selector::AIC, Selector::BIC, Selector::GCV,
                                  Selector::SSR};
  Index k = 10;
  Index grid_size = 100;
  double q = 2.0;
  // Normalizing rate for t_max = ||Y||^2 / a_n; nullopt uses min(n, default_a_n).
  std::optional<double> a_n;
  bool gic_unnormalized = false;
  SolverConfig solver;
  int workers = 1;
};

struct ReplicationRecord {
  SimCondition condition;
  int rep = 0;
  Selector selector = Selector::CV;
  double t_hat = 0.0;
  double risk_ratio = 0.0;   // R(beta_hat) / sigma^2
  double excess_risk = 0.0;  // R(beta_hat) - R(beta_{t_n})
  double wall_time_ms = 0.0;
  std::string error;         // nonempty: the replication failed and numeric fields are NaN

  bool ok() const { return error.empty(); }
};

// Records ordered by (rep, selector order in opts.selectors).
std::vector<ReplicationRecord> run_condition(const SimCondition& cond, const RunOptions& opts);
// Conditions in the given order, each as run_condition.
std::vector<ReplicationRecord> run_conditions(const std::vector<SimCondition>& conds,
                                              const RunOptions& opts);

// The t_max rule and oracle radius used by run_condition for a given condition.
double simulation_a_n(const SimCondition& cond, const RunOptions& opts);
double simulation_t_n(const SimCondition& cond, const RunOptions& opts);

struct ConsistencyOptions {
  std::vector<Index> n_list{100, 200, 400, 800};
  // p(n) = p_multiplier * n, or p_constant when set.
  double p_multiplier = 2.0;
  std::optional<Index> p_constant;
  double q = 2.0;
  Index k = 2;
  // m_n; nullopt uses max(1, log log n).
  std::optional<double> m_n;
  int reps = 50;
  std::uint64_t seed = 1;
  double delta = 0.5;
  double rho = 0.2;
  double alpha = 0.1;
  double snr = 0.5;
  NoiseKind noise = NoiseKind::Gaussian;
  Index grid_size = 100;
  SolverConfig solver;
  int workers = 1;

  Index p_of(Index n) const;
  void validate() const;
};

struct ConsistencyRow {
  Index n = 0;
  Index p = 0;
  Index b_n = 0;
  double a_n = 0.0;
  double t_n = 0.0;
  double median_excess = 0.0;
  double exceed_fraction = 0.0;  // fraction of replications with E > delta
  int failures = 0;
  std::vector<double> excess;    // per replication, NaN on failure
};

std::vector<ConsistencyRow> consistency_experiment(const ConsistencyOptions& opts);

// Runs task(i) for i in [0, count) on up to `workers` threads. Exceptions are rethrown.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& task);

// LASSOCV_WORKERS if set and valid, otherwise `fallback`.
int workers_from_env(int fallback);

}  // namespace lassocv
