#include "lassocv/risk.hpp"

#include "lassocv/error.hpp"

#include <algorithm>
#include <numeric>

namespace lassocv {

AugmentedSecondMoment population_second_moment(const PopulationModel& model) {
  const Index p = model.p();
  const MatrixXd& d = model.d();
  const VectorXd db = d * model.beta_star();
  MatrixXd sigma(p + 1, p + 1);
  sigma(0, 0) = model.beta_star().dot(db) + model.sigma2();
  sigma.block(0, 1, 1, p) = db.transpose();
  sigma.block(1, 0, p, 1) = db;
  sigma.block(1, 1, p, p) = d;
  return AugmentedSecondMoment(std::move(sigma));
}

namespace {

MatrixXd augmented_rows(const Dataset& data) {
  MatrixXd z(data.n(), data.p() + 1);
  z.col(0) = data.y();
  z.rightCols(data.p()) = data.x();
  return z;
}

}  // namespace

AugmentedSecondMoment empirical_second_moment(const Dataset& data) {
  const MatrixXd z = augmented_rows(data);
  MatrixXd sigma = (z.transpose() * z) / static_cast<double>(data.n());
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  return AugmentedSecondMoment(std::move(sigma));
}

AugmentedSecondMoment empirical_second_moment(const Dataset& data, std::span<const Index> rows) {
  if (rows.empty()) throw InputError("second moment over an empty row set");
  return empirical_second_moment(data.rows(rows));
}

double population_risk(const VectorXd& beta, const PopulationModel& model) {
  if (beta.size() != model.p()) throw InputError("beta length does not match the model");
  const VectorXd diff = beta - model.beta_star();
  return diff.dot(model.d() * diff) + model.sigma2();
}

double empirical_risk(const VectorXd& beta, const Dataset& data) {
  return least_squares_objective(data, beta);
}

double cv_risk(const Dataset& data, const EstimatorSpec& spec, const FoldScheme& folds,
               const SolverConfig& cfg) {
  if (folds.n() != data.n()) throw InputError("fold scheme does not match the dataset size");
  const auto& fs = folds.folds();
  std::vector<double> err(fs.size());
  for (std::size_t f = 0; f < fs.size(); ++f) {
    const std::vector<Index> train = folds.complement(f);
    if (train.empty()) throw InputError("a fold leaves no training observations");
    const Dataset train_data = data.rows(train);
    const VectorXd beta = fit_constrained(train_data, spec, cfg).beta;
    double sse = 0.0;
    for (Index r : fs[f]) {
      const double e = data.y()(r) - data.x().row(r).dot(beta);
      sse += e * e;
    }
    err[f] = sse / static_cast<double>(fs[f].size());
  }
  std::vector<std::size_t> order(fs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return *std::min_element(fs[a].begin(), fs[a].end()) <
           *std::min_element(fs[b].begin(), fs[b].end());
  });
  double total = 0.0;
  for (std::size_t f : order) total += err[f];
  return total / static_cast<double>(fs.size());
}

VectorXd oracle_coefficients(const PopulationModel& model, double t, const SolverConfig& cfg) {
  if (!(t >= 0.0)) throw InputError("oracle radius must be >= 0");
  const VectorXd& bstar = model.beta_star();
  if (bstar.lpNorm<1>() <= t) return bstar;
  const MatrixXd& root = model.covariance().root();
  const Dataset synthetic(root * bstar, root);
  return fit_constrained(synthetic, EstimatorSpec::lasso(t), cfg).beta;
}

RiskReport excess_risk_against(const VectorXd& beta_hat, const VectorXd& oracle_beta,
                               const PopulationModel& model) {
  RiskReport r;
  r.population_risk = population_risk(beta_hat, model);
  r.oracle_risk = population_risk(oracle_beta, model);
  r.excess_risk = r.population_risk - r.oracle_risk;
  r.noise_floor = model.sigma2();
  return r;
}

RiskReport excess_risk(const VectorXd& beta_hat, double t_n, const PopulationModel& model,
                       const SolverConfig& cfg) {
  return excess_risk_against(beta_hat, oracle_coefficients(model, t_n, cfg), model);
}

double max_abs_entry(const MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().maxCoeff();
}

}  // namespace lassocv
