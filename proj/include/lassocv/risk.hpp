#pragma once

#include "lassocv/solvers.hpp"
#include "lassocv/types.hpp"

#include <span>

namespace lassocv {

struct RiskReport {
  double population_risk = 0.0;  // R(beta_hat)
  double oracle_risk = 0.0;      // R(beta_{t_n})
  double excess_risk = 0.0;      // population_risk - oracle_risk, may be negative
  double noise_floor = 0.0;      // sigma^2
};

// Sigma_n = E[Z Z^T] for the linear model: [[b'Db + s2, b'D], [Db, D]].
AugmentedSecondMoment population_second_moment(const PopulationModel& model);

// (1/n) sum_i Z_i Z_i^T over all rows, or over the given rows.
AugmentedSecondMoment empirical_second_moment(const Dataset& data);
AugmentedSecondMoment empirical_second_moment(const Dataset& data, std::span<const Index> rows);

// E[(Y - beta^T X)^2] = (beta - beta*)^T D (beta - beta*) + sigma^2.
double population_risk(const VectorXd& beta, const PopulationModel& model);

// (1/n)||Y - X beta||^2
double empirical_risk(const VectorXd& beta, const Dataset& data);

// K-fold validation error averaged over folds; each fold refits on its complement.
// Fold contributions are summed in ascending order of each fold's smallest index, so
// the value does not depend on the order of the fold list.
double cv_risk(const Dataset& data, const EstimatorSpec& spec, const FoldScheme& folds,
               const SolverConfig& cfg = {});

// argmin of R(beta) over the l1 ball of radius t: the constrained fit on the synthetic
// dataset (design L, response L beta*) with L^T L = D.
VectorXd oracle_coefficients(const PopulationModel& model, double t, const SolverConfig& cfg = {});

RiskReport excess_risk(const VectorXd& beta_hat, double t_n, const PopulationModel& model,
                       const SolverConfig& cfg = {});
// Same, with the oracle coefficients already computed.
RiskReport excess_risk_against(const VectorXd& beta_hat, const VectorXd& oracle_beta,
                               const PopulationModel& model);

// Entry-wise max norm max_ij |A_ij|.
double max_abs_entry(const MatrixXd& a);

}  // namespace lassocv
