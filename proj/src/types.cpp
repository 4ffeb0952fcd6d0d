#include "lassocv/types.hpp"

#include "lassocv/error.hpp"
#include "lassocv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace lassocv {

Dataset::Dataset(VectorXd y, MatrixXd x) : y_(std::move(y)), x_(std::move(x)) {
  if (x_.rows() < 1 || x_.cols() < 1) throw InputError("dataset needs n >= 1 and p >= 1");
  if (y_.size() != x_.rows()) {
    throw InputError("response length " + std::to_string(y_.size()) +
                     " does not match design rows " + std::to_string(x_.rows()));
  }
  if (!y_.allFinite() || !x_.allFinite()) throw InputError("dataset contains non-finite values");
}

Dataset Dataset::rows(std::span<const Index> idx) const {
  VectorXd y(static_cast<Index>(idx.size()));
  MatrixXd x(static_cast<Index>(idx.size()), p());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const Index i = idx[r];
    if (i < 0 || i >= n()) throw InputError("row index out of range");
    y(static_cast<Index>(r)) = y_(i);
    x.row(static_cast<Index>(r)) = x_.row(i);
  }
  return Dataset(std::move(y), std::move(x));
}

std::string_view to_string(NoiseKind kind) {
  return kind == NoiseKind::Gaussian ? "gaussian" : "t3";
}

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "gaussian" || name == "Gaussian" || name == "normal") return NoiseKind::Gaussian;
  if (name == "t3" || name == "ScaledT3" || name == "scaled_t3") return NoiseKind::ScaledT3;
  throw InputError("unknown noise kind '" + std::string(name) + "' (expected gaussian or t3)");
}

Covariance::Covariance(MatrixXd d) : d_(std::move(d)) {
  if (d_.rows() != d_.cols() || d_.rows() < 1) throw InputError("covariance must be square");
  if (!d_.allFinite()) throw InputError("covariance contains non-finite values");
  if ((d_ - d_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InputError("covariance is not symmetric within 1e-12");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(d_);
  if (eig.info() != Eigen::Success) throw InputError("covariance eigendecomposition failed");
  VectorXd lambda = eig.eigenvalues();
  if (lambda.minCoeff() < -1e-10) {
    throw InputError("covariance is indefinite (smallest eigenvalue " +
                     std::to_string(lambda.minCoeff()) + ")");
  }
  lambda = lambda.cwiseMax(0.0).cwiseSqrt();
  const MatrixXd& v = eig.eigenvectors();
  root_ = v * lambda.asDiagonal() * v.transpose();
  root_ = 0.5 * (root_ + root_.transpose()).eval();
}

Covariance Covariance::equicorrelation(Index p, double rho) {
  if (p < 1) throw InputError("equicorrelation needs p >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) throw InputError("rho must lie in [0, 1)");
  MatrixXd d = MatrixXd::Constant(p, p, rho);
  d.diagonal().setOnes();
  // Spectrum: 1 + (p-1) rho on span{1}, 1 - rho on its complement.
  const double pd = static_cast<double>(p);
  const double s_perp = std::sqrt(1.0 - rho);
  const double s_one = std::sqrt(1.0 + (pd - 1.0) * rho);
  MatrixXd root = MatrixXd::Constant(p, p, (s_one - s_perp) / pd);
  root.diagonal().array() += s_perp;
  return Covariance(std::move(d), std::move(root));
}

PopulationModel::PopulationModel(VectorXd beta_star, std::shared_ptr<const Covariance> d,
                                 double sigma2, NoiseKind noise)
    : beta_star_(std::move(beta_star)), cov_(std::move(d)), sigma2_(sigma2), noise_(noise) {
  if (!cov_) throw InputError("population model needs a covariance");
  if (beta_star_.size() != cov_->dim()) throw InputError("beta* length does not match D");
  if (!beta_star_.allFinite()) throw InputError("beta* contains non-finite values");
  if (!(sigma2_ > 0.0) || !std::isfinite(sigma2_)) throw InputError("sigma2 must be positive");
}

PopulationModel::PopulationModel(VectorXd beta_star, MatrixXd d, double sigma2, NoiseKind noise)
    : PopulationModel(std::move(beta_star), std::make_shared<const Covariance>(std::move(d)),
                      sigma2, noise) {}

double PopulationModel::snr() const { return beta_star_.dot(d() * beta_star_); }

AugmentedSecondMoment::AugmentedSecondMoment(MatrixXd sigma) : sigma_(std::move(sigma)) {
  if (sigma_.rows() != sigma_.cols() || sigma_.rows() < 2) {
    throw InputError("augmented second moment must be square with p >= 1");
  }
  if (!sigma_.allFinite()) throw InputError("augmented second moment is not finite");
  const double scale = std::max(1.0, sigma_.cwiseAbs().maxCoeff());
  if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InputError("augmented second moment is not symmetric");
  }
  if (sigma_.diagonal().minCoeff() < 0.0) {
    throw InputError("augmented second moment has a negative diagonal entry");
  }
}

double AugmentedSecondMoment::quadratic_risk(const VectorXd& beta) const {
  if (beta.size() != p()) throw InputError("beta length does not match second moment");
  VectorXd gamma(p() + 1);
  gamma(0) = -1.0;
  gamma.tail(p()) = beta;
  return gamma.dot(sigma_ * gamma);
}

std::string_view to_string(Penalty penalty) {
  switch (penalty) {
    case Penalty::Lasso: return "lasso";
    case Penalty::GroupLasso: return "group";
    case Penalty::SqrtLasso: return "sqrt";
  }
  return "?";
}

GroupPartition::GroupPartition(std::vector<std::vector<Index>> groups, Index p)
    : groups_(std::move(groups)), p_(p) {
  if (p_ < 1) throw InputError("group partition needs p >= 1");
  std::vector<int> seen(static_cast<std::size_t>(p_), 0);
  for (const auto& g : groups_) {
    if (g.empty()) throw InputError("group partition contains an empty group");
    for (Index j : g) {
      if (j < 0 || j >= p_) throw InputError("group index out of range");
      if (seen[static_cast<std::size_t>(j)]++) {
        throw InputError("groups are not disjoint (index " + std::to_string(j) + ")");
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw InputError("groups do not cover every coefficient");
  }
}

GroupPartition GroupPartition::singletons(Index p) {
  std::vector<std::vector<Index>> g;
  for (Index j = 0; j < p; ++j) g.push_back({j});
  return GroupPartition(std::move(g), p);
}

double group_norm(const VectorXd& beta, const GroupPartition& groups) {
  if (beta.size() != groups.p()) throw InputError("beta length does not match partition");
  double total = 0.0;
  for (const auto& g : groups.groups()) {
    double sq = 0.0;
    for (Index j : g) sq += beta(j) * beta(j);
    total += std::sqrt(static_cast<double>(g.size()) * sq);
  }
  return total;
}

EstimatorSpec::EstimatorSpec(Penalty penalty, double t, std::optional<GroupPartition> groups)
    : penalty_(penalty), t_(t), groups_(std::move(groups)) {
  if (!(t_ >= 0.0) || !std::isfinite(t_)) throw InputError("constraint radius t must be >= 0");
  if (penalty_ == Penalty::GroupLasso && !groups_) {
    throw InputError("group lasso requires a group partition");
  }
  if (penalty_ != Penalty::GroupLasso && groups_) {
    throw InputError("groups are only meaningful for the group lasso");
  }
}

EstimatorSpec EstimatorSpec::with_radius(double t) const {
  return EstimatorSpec(penalty_, t, groups_);
}

double EstimatorSpec::constraint_value(const VectorXd& beta) const {
  if (penalty_ == Penalty::GroupLasso) return group_norm(beta, *groups_);
  return beta.lpNorm<1>();
}

FoldScheme::FoldScheme(std::vector<std::vector<Index>> folds, Index n)
    : folds_(std::move(folds)), n_(n) {
  if (n_ < 1) throw InputError("fold scheme needs n >= 1");
  if (folds_.empty()) throw InputError("fold scheme needs at least one fold");
  std::vector<char> seen(static_cast<std::size_t>(n_), 0);
  std::size_t lo = folds_.front().size(), hi = lo;
  for (const auto& f : folds_) {
    if (f.empty()) throw InputError("fold scheme contains an empty fold");
    lo = std::min(lo, f.size());
    hi = std::max(hi, f.size());
    for (Index i : f) {
      if (i < 0 || i >= n_) throw InputError("fold index out of range");
      if (seen[static_cast<std::size_t>(i)]++) throw InputError("folds are not disjoint");
    }
  }
  if (hi - lo > 1) throw InputError("folds are unbalanced (size spread > 1)");
}

FoldScheme FoldScheme::random(Index n, Index k, std::uint64_t seed) {
  if (k < 1 || k > n) throw InputError("number of folds must lie in [1, n]");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<Index>> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < perm.size(); ++i) {
    folds[i % static_cast<std::size_t>(k)].push_back(perm[i]);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return FoldScheme(std::move(folds), n);
}

std::vector<Index> FoldScheme::complement(std::size_t f) const {
  std::vector<char> in(static_cast<std::size_t>(n_), 0);
  for (Index i : folds_.at(f)) in[static_cast<std::size_t>(i)] = 1;
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(n_));
  for (Index i = 0; i < n_; ++i) {
    if (!in[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

std::string_view to_string(Selector s) {
  switch (s) {
    case Selector::CV: return "CV";
    case Selector::AIC: return "AIC";
    case Selector::BIC: return "BIC";
    case Selector::GCV: return "GCV";
    case Selector::SSR: return "SSR";
  }
  return "?";
}

Selector parse_selector(std::string_view name) {
  std::string up(name);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "CV") return Selector::CV;
  if (up == "AIC") return Selector::AIC;
  if (up == "BIC") return Selector::BIC;
  if (up == "GCV") return Selector::GCV;
  if (up == "SSR") return Selector::SSR;
  throw InputError("unknown selector '" + std::string(name) + "' (expected CV, AIC, BIC, GCV, SSR)");
}

void check_selection(const SelectionResult& r, double constraint_value, double criterion_tol) {
  if (r.grid.size() != r.criterion.size() || r.grid.empty()) {
    throw InputError("selection grid and criterion must be nonempty and aligned");
  }
  auto it = std::find(r.grid.begin(), r.grid.end(), r.t_hat);
  if (it == r.grid.end()) throw InputError("selected t is not a grid point");
  const double at = r.criterion[static_cast<std::size_t>(it - r.grid.begin())];
  const double best = *std::min_element(r.criterion.begin(), r.criterion.end());
  if (at > best + criterion_tol) throw InputError("selected t does not minimize the criterion");
  if (constraint_value > r.t_hat + 1e-8) throw InputError("fit violates the constraint at t_hat");
}

Index SimCondition::sparsity() const {
  return static_cast<Index>(std::ceil(std::pow(static_cast<double>(n), alpha) - 1e-12));
}

void SimCondition::validate() const {
  if (n < 2) throw InputError("n must be >= 2");
  if (p < 1) throw InputError("p must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw InputError("rho must lie in [0, 1), got " + std::to_string(rho));
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw InputError("alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
  if (!(snr > 0.0) || !std::isfinite(snr)) throw InputError("snr must be positive");
  if (replications < 1) throw InputError("replications must be >= 1");
  if (sparsity() > p) {
    throw InputError("sparsity ceil(n^alpha) = " + std::to_string(sparsity()) + " exceeds p");
  }
}

std::string SimCondition::id() const {
  std::ostringstream os;
  os << "n" << n << "_p" << p << "_rho" << rho << "_alpha" << alpha << "_snr" << snr << "_"
     << to_string(noise);
  return os.str();
}

}  // namespace lassocv
