#include "lassocv/selection.hpp"

#include "lassocv/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lassocv {

namespace {

double log_p_power(Index p, double q) {
  if (p < 2) throw InputError("p must be >= 2 for the log p rates");
  if (!(q >= 1.0)) throw InputError("q must be >= 1 (or infinite)");
  const double inv = std::isinf(q) ? 0.0 : 1.0 / (2.0 * q);
  return std::pow(std::log(static_cast<double>(p)), 0.25 + inv);
}

// First index attaining the minimum; the grid is ascending, so ties go to the smallest t.
std::size_t argmin_first(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[best]) best = i;
  }
  return best;
}

void check_grid(const SearchGrid& grid) {
  if (grid.points.empty()) throw InputError("search grid is empty");
}

const std::vector<FitResult>& path_or_fit(const Dataset& data, const PenaltyFamily& family,
                                          const SearchGrid& grid, const SolverConfig& cfg,
                                          const std::vector<FitResult>* path,
                                          std::vector<FitResult>& storage) {
  if (path) {
    if (path->size() != grid.points.size()) {
      throw InputError("precomputed path does not match the grid");
    }
    return *path;
  }
  storage = fit_path(data, family, grid.points, cfg);
  return storage;
}

SelectionResult make_result(Selector sel, const SearchGrid& grid, std::vector<double> crit,
                            const std::vector<FitResult>& path) {
  SelectionResult r;
  r.selector = sel;
  r.grid = grid.points;
  r.criterion = std::move(crit);
  const std::size_t i = argmin_first(r.criterion);
  r.t_hat = r.grid[i];
  r.beta_hat = path[i].beta;
  r.converged = path[i].converged;
  return r;
}

}  // namespace

double compute_t_max(const Dataset& data, double a_n) {
  if (!(a_n > 0.0) || !std::isfinite(a_n)) throw InputError("a_n must be positive and finite");
  return data.y().squaredNorm() / a_n;
}

double default_m_n(Index n) {
  if (n < 1) throw InputError("n must be >= 1");
  const double ln = std::log(static_cast<double>(n));
  if (ln <= 1.0) return 1.0;
  return std::max(1.0, std::log(ln));
}

double default_a_n(Index n, Index p, double q, Index b_n, double m_n) {
  if (n < 1) throw InputError("n must be >= 1");
  if (b_n < 1 || b_n > n) throw InputError("b_n must lie in [1, n]");
  if (!(m_n > 0.0)) throw InputError("m_n must be positive");
  return static_cast<double>(n) * log_p_power(p, q) * m_n /
         std::pow(static_cast<double>(b_n), 0.25);
}

double rate_t_n(Index p, double q, Index b_n, double m_n) {
  if (b_n < 1) throw InputError("b_n must be >= 1");
  if (!(m_n > 0.0)) throw InputError("m_n must be positive");
  return std::pow(static_cast<double>(b_n), 0.25) / (m_n * log_p_power(p, q));
}

SearchGrid build_grid(double t_max, Index size) {
  if (size < 2) throw InputError("grid size must be >= 2");
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw InputError("t_max must be finite and >= 0");
  SearchGrid g;
  g.t_max = t_max;
  g.points.resize(static_cast<std::size_t>(size));
  const double last = static_cast<double>(size - 1);
  for (Index i = 0; i < size; ++i) {
    g.points[static_cast<std::size_t>(i)] = t_max * (static_cast<double>(i) / last);
  }
  g.points.back() = t_max;
  return g;
}

int df_hat(const VectorXd& beta, double zero_threshold) {
  int nnz = 0;
  for (Index j = 0; j < beta.size(); ++j) {
    if (std::abs(beta(j)) > zero_threshold) ++nnz;
  }
  return std::max(0, nnz - 1);
}

std::vector<FitResult> fit_path(const Dataset& data, const PenaltyFamily& family,
                                const std::vector<double>& grid, const SolverConfig& cfg) {
  ConstrainedSolver solver(data, family.penalty, family.groups, cfg);
  std::vector<FitResult> out;
  out.reserve(grid.size());
  for (double t : grid) {
    const VectorXd* warm = out.empty() ? nullptr : &out.back().beta;
    out.push_back(solver.solve(t, warm));
  }
  return out;
}

std::vector<double> cv_curve(const Dataset& data, const PenaltyFamily& family,
                             const FoldScheme& folds, const std::vector<double>& grid,
                             const SolverConfig& cfg) {
  if (folds.n() != data.n()) throw InputError("fold scheme does not match the dataset size");
  const auto& fs = folds.folds();
  const std::size_t k = fs.size();
  std::vector<std::vector<double>> err(k);
  for (std::size_t f = 0; f < k; ++f) {
    const std::vector<Index> train = folds.complement(f);
    if (train.empty()) throw InputError("a fold leaves no training observations");
    const Dataset train_data = data.rows(train);
    const Dataset valid = data.rows(fs[f]);
    const auto path = fit_path(train_data, family, grid, cfg);
    err[f].resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      err[f][i] = least_squares_objective(valid, path[i].beta);
    }
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return *std::min_element(fs[a].begin(), fs[a].end()) <
           *std::min_element(fs[b].begin(), fs[b].end());
  });
  std::vector<double> curve(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double total = 0.0;
    for (std::size_t f : order) total += err[f][i];
    curve[i] = total / static_cast<double>(k);
  }
  return curve;
}

SelectionResult select_cv(const Dataset& data, const PenaltyFamily& family,
                          const FoldScheme& folds, const SearchGrid& grid,
                          const SolverConfig& cfg, const std::vector<FitResult>* path) {
  check_grid(grid);
  std::vector<double> crit = cv_curve(data, family, folds, grid.points, cfg);
  SelectionResult r;
  r.selector = Selector::CV;
  r.grid = grid.points;
  r.criterion = std::move(crit);
  const std::size_t i = argmin_first(r.criterion);
  r.t_hat = r.grid[i];
  if (path) {
    if (path->size() != grid.points.size()) {
      throw InputError("precomputed path does not match the grid");
    }
    r.beta_hat = (*path)[i].beta;
    r.converged = (*path)[i].converged;
  } else {
    FitResult fit = fit_constrained(data, family.at(r.t_hat), cfg);
    r.beta_hat = std::move(fit.beta);
    r.converged = fit.converged;
  }
  return r;
}

SelectionResult select_gic(const Dataset& data, const PenaltyFamily& family,
                           const SearchGrid& grid, double c_n, double sigma2,
                           const SolverConfig& cfg, bool unnormalized,
                           const std::vector<FitResult>* path) {
  check_grid(grid);
  if (!(c_n > 0.0)) throw InputError("c_n must be positive");
  if (!(sigma2 > 0.0)) throw InputError("sigma2 must be positive");
  std::vector<FitResult> storage;
  const auto& fits = path_or_fit(data, family, grid, cfg, path, storage);
  const double n = static_cast<double>(data.n());
  const double scale = unnormalized ? 1.0 : 1.0 / n;
  std::vector<double> crit(fits.size());
  for (std::size_t i = 0; i < fits.size(); ++i) {
    crit[i] = least_squares_objective(data, fits[i].beta) +
              c_n * sigma2 * df_hat(fits[i].beta, cfg.zero_threshold) * scale;
  }
  const Selector sel = c_n == 2.0 ? Selector::AIC : Selector::BIC;
  return make_result(sel, grid, std::move(crit), fits);
}

SelectionResult select_aic(const Dataset& data, const PenaltyFamily& family,
                           const SearchGrid& grid, double sigma2, const SolverConfig& cfg,
                           bool unnormalized, const std::vector<FitResult>* path) {
  SelectionResult r = select_gic(data, family, grid, 2.0, sigma2, cfg, unnormalized, path);
  r.selector = Selector::AIC;
  return r;
}

SelectionResult select_bic(const Dataset& data, const PenaltyFamily& family,
                           const SearchGrid& grid, double sigma2, const SolverConfig& cfg,
                           bool unnormalized, const std::vector<FitResult>* path) {
  SelectionResult r = select_gic(data, family, grid, std::log(static_cast<double>(data.n())),
                                 sigma2, cfg, unnormalized, path);
  r.selector = Selector::BIC;
  return r;
}

SelectionResult select_gcv(const Dataset& data, const PenaltyFamily& family,
                           const SearchGrid& grid, const SolverConfig& cfg,
                           const std::vector<FitResult>* path) {
  check_grid(grid);
  std::vector<FitResult> storage;
  const auto& fits = path_or_fit(data, family, grid, cfg, path, storage);
  const double n = static_cast<double>(data.n());
  std::vector<double> crit(fits.size());
  bool any = false;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const int df = df_hat(fits[i].beta, cfg.zero_threshold);
    if (df >= data.n()) {
      crit[i] = kInfinity;
      continue;
    }
    const double shrink = 1.0 - df / n;
    crit[i] = least_squares_objective(data, fits[i].beta) / (shrink * shrink);
    any = true;
  }
  if (!any) throw SelectionError("GCV: every grid point has df >= n");
  return make_result(Selector::GCV, grid, std::move(crit), fits);
}

SelectionResult select_ssr(const Dataset& data, const SolverConfig& cfg) {
  const Index p = data.p();
  if (p < 2) throw InputError("SSR needs p >= 2");
  const double n = static_cast<double>(data.n());
  const double lambda0 = std::sqrt(2.0 * std::log(static_cast<double>(p)) / n);
  const VectorXd& y = data.y();

  SelectionResult r;
  r.selector = Selector::SSR;
  double sigma = 0.0;
  if (data.n() > 1) {
    const double mean = y.mean();
    sigma = std::sqrt((y.array() - mean).square().sum() / (n - 1.0));
  }
  VectorXd beta = VectorXd::Zero(p);
  r.converged = false;
  for (int it = 0; it < 100; ++it) {
    if (sigma == 0.0) {
      beta.setZero();
      r.grid.push_back(0.0);
      r.criterion.push_back(0.0);
      r.converged = true;
      break;
    }
    beta = fit_lagrangian(data, lambda0 * sigma, cfg, &beta).beta;
    const double next = (y - data.x() * beta).norm() / std::sqrt(n);
    r.grid.push_back(beta.lpNorm<1>());
    r.criterion.push_back(next);
    const bool done = std::abs(next - sigma) < 1e-6;
    sigma = next;
    if (done) {
      r.converged = true;
      break;
    }
  }
  r.beta_hat = std::move(beta);
  r.t_hat = r.grid.back();
  return r;
}

}  // namespace lassocv
