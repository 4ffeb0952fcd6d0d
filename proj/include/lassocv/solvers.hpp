#pragma once

#include "lassocv/types.hpp"

#include <optional>
#include <vector>

namespace lassocv {

struct SolverConfig {
  int max_iter = 50000;
  // Relative accuracy: a fit is accepted once its Frank-Wolfe duality gap is at most
  // tol times the objective at beta = 0.
  double tol = 1e-10;
  // |beta_j| at or below this counts as zero for degrees of freedom.
  double zero_threshold = 1e-8;

  void validate() const;
};

struct FitResult {
  VectorXd beta;
  double objective = 0.0;  // (1/n)||Y - X beta||^2 (plus 2 lambda ||beta||_1 for fit_lagrangian)
  double gap = 0.0;        // duality gap certificate (KKT residual for fit_lagrangian)
  int iterations = 0;
  bool converged = true;   // false: max_iter reached before the tolerance was met
};

// Euclidean projection onto {b : ||b||_1 <= t}. Returns v unchanged when already feasible.
VectorXd project_l1_ball(const VectorXd& v, double t);

// Euclidean projection onto {b : sum_g sqrt(|g|) ||b_g||_2 <= t}.
VectorXd project_group_ball(const VectorXd& v, const GroupPartition& groups, double t);

// (1/n)||Y - X beta||_2^2
double least_squares_objective(const Dataset& data, const VectorXd& beta);

// Constrained least squares over one dataset at many radii. Gram columns are cached
// lazily, so an instance must not be shared between threads; the dataset must outlive it.
class ConstrainedSolver {
 public:
  ConstrainedSolver(const Dataset& data, Penalty penalty,
                    std::optional<GroupPartition> groups = std::nullopt,
                    SolverConfig cfg = {});

  // Minimizer of (1/n)||Y - X beta||^2 over the constraint set of radius t.
  // A warm start outside the set is projected first.
  FitResult solve(double t, const VectorXd* warm = nullptr) const;

  const Dataset& data() const { return data_; }
  const SolverConfig& config() const { return cfg_; }

 private:
  FitResult solve_lasso(double t, const VectorXd* warm) const;
  FitResult solve_group(double t, const VectorXd* warm) const;
  FitResult solve_sqrt(double t, const VectorXd* warm) const;

  const VectorXd& gram_column(Index j) const;
  VectorXd full_gradient(const VectorXd& beta, const std::vector<Index>& support) const;

  const Dataset& data_;
  Penalty penalty_;
  std::optional<GroupPartition> groups_;
  SolverConfig cfg_;
  VectorXd xty_;   // X^T Y
  double yy_;      // Y^T Y
  mutable std::vector<VectorXd> gram_cols_;
  mutable std::vector<char> have_col_;
};

FitResult fit_constrained(const Dataset& data, const EstimatorSpec& spec,
                          const SolverConfig& cfg = {});
FitResult fit_constrained(const Dataset& data, const EstimatorSpec& spec, const SolverConfig& cfg,
                          const VectorXd& warm);

// Minimizer of (1/n)||Y - X beta||^2 + 2 lambda ||beta||_1 by cyclic coordinate descent.
// Iterates until every KKT residual is within 1e-8 (or max_iter sweeps).
FitResult fit_lagrangian(const Dataset& data, double lambda, const SolverConfig& cfg = {},
                         const VectorXd* warm = nullptr);

// Largest KKT violation of a Lagrangian fit: |(1/n) X_j^T r - lambda sign(b_j)| on the
// support, max(0, |(1/n) X_j^T r| - lambda) off it.
double lagrangian_kkt_residual(const Dataset& data, const VectorXd& beta, double lambda);

// t0 = ||(X^T X)^+ X^T Y||_1, the radius beyond which the constraint stops binding.
double binding_threshold(const Dataset& data);

}  // namespace lassocv
