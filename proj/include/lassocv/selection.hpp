#pragma once

#include "lassocv/solvers.hpp"
#include "lassocv/types.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace lassocv {

// Uniform discretization of T = [0, t_max].
struct SearchGrid {
  double t_max = 0.0;
  std::vector<double> points;

  Index size() const { return static_cast<Index>(points.size()); }
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// t_max = ||Y||^2 / a_n
double compute_t_max(const Dataset& data, double a_n);

// m_n = max(1, log log n)
double default_m_n(Index n);

// a_n = n (log p)^{1/4 + 1/(2q)} m_n / b_n^{1/4}; q may be kInfinity.
double default_a_n(Index n, Index p, double q, Index b_n, double m_n);

// t_n = b_n^{1/4} / (m_n (log p)^{1/4 + 1/(2q)}). Note a_n t_n = n.
double rate_t_n(Index p, double q, Index b_n, double m_n);

SearchGrid build_grid(double t_max, Index size);

// ||beta||_0 - 1 with entries above zero_threshold counted, floored at 0.
int df_hat(const VectorXd& beta, double zero_threshold);

// Constraint family indexed by the radius t.
struct PenaltyFamily {
  Penalty penalty = Penalty::Lasso;
  std::optional<GroupPartition> groups;

  EstimatorSpec at(double t) const { return EstimatorSpec(penalty, t, groups); }
};

// Fits along the grid on the full data, each warm-started from the previous point.
std::vector<FitResult> fit_path(const Dataset& data, const PenaltyFamily& family,
                                const std::vector<double>& grid, const SolverConfig& cfg = {});

// K-fold CV risk at every grid point. Each fold walks the grid with warm starts;
// fold errors are combined in ascending order of each fold's smallest index.
std::vector<double> cv_curve(const Dataset& data, const PenaltyFamily& family,
                             const FoldScheme& folds, const std::vector<double>& grid,
                             const SolverConfig& cfg = {});

// Optional `path` must be fit_path(data, family, grid.points, cfg); it saves the refit.
SelectionResult select_cv(const Dataset& data, const PenaltyFamily& family,
                          const FoldScheme& folds, const SearchGrid& grid,
                          const SolverConfig& cfg = {},
                          const std::vector<FitResult>* path = nullptr);

// GIC(t) = R_n(beta_t) + c_n sigma2 df(t) / n, or without the 1/n when unnormalized.
SelectionResult select_gic(const Dataset& data, const PenaltyFamily& family,
                           const SearchGrid& grid, double c_n, double sigma2,
                           const SolverConfig& cfg = {}, bool unnormalized = false,
                           const std::vector<FitResult>* path = nullptr);
// c_n = 2
SelectionResult select_aic(const Dataset& data, const PenaltyFamily& family,
                           const SearchGrid& grid, double sigma2, const SolverConfig& cfg = {},
                           bool unnormalized = false,
                           const std::vector<FitResult>* path = nullptr);
// c_n = log n
SelectionResult select_bic(const Dataset& data, const PenaltyFamily& family,
                           const SearchGrid& grid, double sigma2, const SolverConfig& cfg = {},
                           bool unnormalized = false,
                           const std::vector<FitResult>* path = nullptr);

// GCV(t) = R_n(beta_t) / (1 - df(t)/n)^2 over grid points with df(t) < n.
// Points with df(t) >= n get criterion +inf; throws SelectionError if all do.
SelectionResult select_gcv(const Dataset& data, const PenaltyFamily& family,
                           const SearchGrid& grid, const SolverConfig& cfg = {},
                           const std::vector<FitResult>* path = nullptr);

// Scaled sparse regression: sigma <- ||Y - X beta||/sqrt(n), beta <- lagrangian fit at
// lambda0 * sigma, lambda0 = sqrt(2 log p / n), from sigma = sd(Y). `grid` holds the
// l1 norm of each iterate and `criterion` the matching sigma; t_hat = ||beta_hat||_1.
// converged is false when 100 iterations pass without |delta sigma| < 1e-6.
SelectionResult select_ssr(const Dataset& data, const SolverConfig& cfg = {});

}  // namespace lassocv
