#pragma once

#include "lassocv/rng.hpp"
#include "lassocv/types.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace lassocv {

struct BoundInputs {
  Index n = 0;
  Index p = 0;
  double q = 2.0;      // may be infinite
  Index c_n = 0;
  double a_n = 0.0;
  double t_n = 0.0;
  double f_const = 0.0;  // F, the bound on f*(X)^2
  double kappa = 1.0;    // psi_2 bound on the noise
  // Replaces log p when set, e.g. to evaluate at log p = 1 exactly.
  std::optional<double> log_p;

  void validate() const;
  Index b_n() const { return std::min(c_n, n - c_n); }
};

struct BoundTerms {
  double omega1 = 0.0;
  double omega2 = 0.0;
};

// Omega_1 = [1 + 2 n (F + 4 kappa^2) / a_n]^2 sqrt((log p)^{1+2/q})
//           (n^{-1/2} + c_n^{-1/2} + (n - c_n)^{-1/2})
// Omega_2 = (1 + t_n)^2 sqrt((log p)^{1+2/q} / n)
BoundTerms theorem1_terms(const BoundInputs& in);

// F proxy for a Gaussian design: 9 E[f*(X)^2] = 9 beta*^T D beta*.
double f_proxy(const PopulationModel& model);

struct ConcentrationFit {
  std::vector<Index> sizes;
  std::vector<double> mean_error;  // mean over reps of max_ij |Sigma_hat_v - Sigma_n|
  double slope = 0.0;              // least-squares slope of log mean_error on log |v|
};

// Draws `rows` observations Z_i = (Y_i, X_i^T) as the rows of the returned matrix.
using ZSampler = std::function<MatrixXd(Index rows, Rng& rng)>;

ConcentrationFit concentration_rate(const PopulationModel& model, const std::vector<Index>& v_sizes,
                                    int reps, std::uint64_t seed, int workers = 1);
ConcentrationFit concentration_rate(const ZSampler& sampler, const MatrixXd& population_moment,
                                    const std::vector<Index>& v_sizes, int reps,
                                    std::uint64_t seed, int workers = 1);

// n i.i.d. draws of (Y, X) from the model as a dataset.
Dataset sample_model(const PopulationModel& model, Index n, Rng& rng);

struct TailRow {
  Index n = 0;
  double a_n = 0.0;
  double t_n = 0.0;
  double p_d_complement = 0.0;  // frequency of t_max >= 2 n (F + 4 kappa^2) / a_n
  double p_e_complement = 0.0;  // frequency of t_max < t_n
  double bound = 0.0;           // e^{-n/8}
  double allowance = 0.0;       // bound + 3 binomial standard errors at the bound
  bool within() const { return p_d_complement <= allowance && p_e_complement <= allowance; }
};

struct TailOptions {
  std::function<double(Index n)> a_n_rule;
  std::function<double(Index n)> t_n_rule;
  std::vector<Index> n_list;
  int reps = 1000;
  std::uint64_t seed = 1;
  double f_const = 0.0;
  double kappa = 1.0;
  int workers = 1;
};

std::vector<TailRow> tail_events(const PopulationModel& model, const TailOptions& opts);

struct NoiseTailRow {
  double x = 0.0;
  double threshold = 0.0;  // sqrt(8 n kappa^4 x) + kappa^2 x
  double frequency = 0.0;  // of | ||eps||^2 - kappa1 n | >= threshold
  double bound = 0.0;      // e^{-x}
  double allowance = 0.0;  // bound + 3 binomial standard errors
};

struct NoiseTailReport {
  std::vector<NoiseTailRow> rows;
  bool passed = true;
};

// Checks the sub-Gaussian chi-square deviation inequality at x in {1, 2, 4}.
// Only Gaussian noise qualifies; ScaledT3 is rejected.
NoiseTailReport noise_tail_check(NoiseKind kind, Index n, int reps, std::uint64_t seed,
                                 double kappa = 1.0, double kappa1 = 1.0, int workers = 1);

}  // namespace lassocv
