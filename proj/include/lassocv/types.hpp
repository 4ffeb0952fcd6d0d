#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lassocv {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Observed sample: response y (length n) and design x (n x p, row i is X_i).
class Dataset {
 public:
  Dataset(VectorXd y, MatrixXd x);

  const VectorXd& y() const { return y_; }
  const MatrixXd& x() const { return x_; }
  Index n() const { return x_.rows(); }
  Index p() const { return x_.cols(); }

  // Rows in the given order; used for training/validation splits.
  Dataset rows(std::span<const Index> idx) const;

 private:
  VectorXd y_;
  MatrixXd x_;
};

enum class NoiseKind { Gaussian, ScaledT3 };

std::string_view to_string(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view name);

// Validated PSD design covariance together with its symmetric square root.
// The root is computed once, so a covariance can back many models.
class Covariance {
 public:
  // General symmetric PSD matrix; eigendecomposition with clipping at zero.
  explicit Covariance(MatrixXd d);

  // D(rho) = (1 - rho) I + rho 11^T, rho in [0, 1). Square root in closed form.
  static Covariance equicorrelation(Index p, double rho);

  const MatrixXd& matrix() const { return d_; }
  // Symmetric L with L L = D (so L^T L = D as well).
  const MatrixXd& root() const { return root_; }
  Index dim() const { return d_.rows(); }

 private:
  Covariance(MatrixXd d, MatrixXd root) : d_(std::move(d)), root_(std::move(root)) {}

  MatrixXd d_;
  MatrixXd root_;
};

// Linear data-generating process Y = X^T beta* + eps, X ~ (0, D), Var(eps) = sigma2.
class PopulationModel {
 public:
  PopulationModel(VectorXd beta_star, std::shared_ptr<const Covariance> d, double sigma2,
                  NoiseKind noise = NoiseKind::Gaussian);
  PopulationModel(VectorXd beta_star, MatrixXd d, double sigma2,
                  NoiseKind noise = NoiseKind::Gaussian);

  const VectorXd& beta_star() const { return beta_star_; }
  const MatrixXd& d() const { return cov_->matrix(); }
  const Covariance& covariance() const { return *cov_; }
  std::shared_ptr<const Covariance> covariance_ptr() const { return cov_; }
  double sigma2() const { return sigma2_; }
  NoiseKind noise_kind() const { return noise_; }
  Index p() const { return beta_star_.size(); }

  // beta*^T D beta*
  double snr() const;

 private:
  VectorXd beta_star_;
  std::shared_ptr<const Covariance> cov_;
  double sigma2_;
  NoiseKind noise_;
};

// (p+1) x (p+1) second moment of Z = (Y, X^T)^T; index 0 is the response.
class AugmentedSecondMoment {
 public:
  explicit AugmentedSecondMoment(MatrixXd sigma);

  const MatrixXd& matrix() const { return sigma_; }
  Index p() const { return sigma_.rows() - 1; }

  // gamma^T Sigma gamma with gamma = (-1, beta^T)^T.
  double quadratic_risk(const VectorXd& beta) const;

 private:
  MatrixXd sigma_;
};

enum class Penalty { Lasso, GroupLasso, SqrtLasso };

std::string_view to_string(Penalty penalty);

// Partition of {0..p-1} into disjoint, covering index groups.
class GroupPartition {
 public:
  GroupPartition(std::vector<std::vector<Index>> groups, Index p);

  static GroupPartition singletons(Index p);

  const std::vector<std::vector<Index>>& groups() const { return groups_; }
  Index p() const { return p_; }

 private:
  std::vector<std::vector<Index>> groups_;
  Index p_;
};

// sum_g sqrt(|g|) ||beta_g||_2
double group_norm(const VectorXd& beta, const GroupPartition& groups);

class EstimatorSpec {
 public:
  EstimatorSpec(Penalty penalty, double t, std::optional<GroupPartition> groups = std::nullopt);

  static EstimatorSpec lasso(double t) { return EstimatorSpec(Penalty::Lasso, t); }

  Penalty penalty() const { return penalty_; }
  double t() const { return t_; }
  const std::optional<GroupPartition>& groups() const { return groups_; }

  EstimatorSpec with_radius(double t) const;

  // Value of the constraint function (l1 norm or weighted group norm) at beta.
  double constraint_value(const VectorXd& beta) const;

 private:
  Penalty penalty_;
  double t_;
  std::optional<GroupPartition> groups_;
};

// K balanced, disjoint validation sets over {0..n-1}.
class FoldScheme {
 public:
  FoldScheme(std::vector<std::vector<Index>> folds, Index n);

  // Seeded permutation of 0..n-1 dealt round-robin into k folds.
  static FoldScheme random(Index n, Index k, std::uint64_t seed);

  const std::vector<std::vector<Index>>& folds() const { return folds_; }
  Index n() const { return n_; }
  Index k() const { return static_cast<Index>(folds_.size()); }

  // c_n = floor(n / K)
  Index c_n() const { return n_ / k(); }
  // b_n = min(n - c_n, c_n)
  Index b_n() const { return std::min(n_ - c_n(), c_n()); }

  // Indices not in fold f, ascending.
  std::vector<Index> complement(std::size_t f) const;

 private:
  std::vector<std::vector<Index>> folds_;
  Index n_;
};

enum class Selector { CV, AIC, BIC, GCV, SSR };

std::string_view to_string(Selector s);
Selector parse_selector(std::string_view name);

struct SelectionResult {
  Selector selector = Selector::CV;
  double t_hat = 0.0;
  std::vector<double> grid;
  std::vector<double> criterion;
  VectorXd beta_hat;
  bool converged = true;
};

// Throws InputError unless t_hat is a grid point attaining the minimum criterion
// (within criterion_tol) and constraint_value(beta_hat) <= t_hat + 1e-8.
void check_selection(const SelectionResult& r, double constraint_value,
                     double criterion_tol = 0.0);

struct SimCondition {
  Index n = 100;
  Index p = 75;
  double rho = 0.2;
  double alpha = 0.1;
  double snr = 5.0;
  NoiseKind noise = NoiseKind::Gaussian;
  int replications = 100;
  std::uint64_t seed = 1;

  // s = ceil(n^alpha)
  Index sparsity() const;
  void validate() const;
  std::string id() const;
};

}  // namespace lassocv
