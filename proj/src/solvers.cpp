#include "lassocv/solvers.hpp"

#include "lassocv/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace lassocv {

namespace {

double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

// Shrinks w by at most a few ulps until norm(w) <= t.
template <typename Norm>
void fit_to_radius(VectorXd& w, double t, Norm norm) {
  double s = norm(w);
  for (int guard = 0; s > t && guard < 8; ++guard) {
    w *= std::nextafter(t / s, 0.0);
    s = norm(w);
  }
}

std::vector<Index> support_of(const VectorXd& b) {
  std::vector<Index> s;
  for (Index j = 0; j < b.size(); ++j) {
    if (b(j) != 0.0) s.push_back(j);
  }
  return s;
}

double l1_gap(const VectorXd& beta, const VectorXd& grad, double t) {
  if (grad.size() == 0) return 0.0;
  return grad.dot(beta) + t * grad.cwiseAbs().maxCoeff();
}

// Minimizer of b^T G b - 2 c^T b restricted to span(S) and the l1 ball of radius t, under
// the sign pattern s. Returns the unconstrained minimizer when it is already feasible,
// otherwise the minimizer on the face {s^T b = t}. nullopt if G is numerically singular,
// the face multiplier is negative or a sign flips.
std::optional<VectorXd> face_minimizer(const MatrixXd& gram, const VectorXd& c,
                                       const VectorXd& signs, double t) {
  Eigen::LLT<MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const VectorXd diag = llt.matrixLLT().diagonal();
  if (!(diag.minCoeff() > 1e-7 * diag.maxCoeff())) return std::nullopt;
  VectorXd u = llt.solve(c);
  if (!u.allFinite()) return std::nullopt;
  if (u.lpNorm<1>() <= t) return u;
  const VectorXd w = llt.solve(signs);
  const double denom = signs.dot(w);
  if (!(denom > 0.0)) return std::nullopt;
  const double nu = (signs.dot(u) - t) / denom;
  if (!(nu > 0.0)) return std::nullopt;
  VectorXd b = u - nu * w;
  for (Index j = 0; j < b.size(); ++j) {
    if (!(b(j) * signs(j) > 0.0)) return std::nullopt;
  }
  fit_to_radius(b, t, [](const VectorXd& v) { return v.lpNorm<1>(); });
  return b;
}

double power_iteration(const std::function<VectorXd(const VectorXd&)>& apply, Index dim) {
  VectorXd v = VectorXd::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  double lambda = 0.0;
  for (int it = 0; it < 50; ++it) {
    VectorXd w = apply(v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    lambda = norm;
    v = w / norm;
  }
  return lambda;
}

// Smooth objective over a projection-friendly set, solved by accelerated projected
// gradient with backtracking and adaptive restart. `polish` may return an improved
// candidate from the current iterate's support; it is accepted only if its gap is small.
struct ProjectedProblem {
  std::function<double(const VectorXd&, VectorXd*)> value_grad;
  std::function<VectorXd(const VectorXd&)> project;
  std::function<double(const VectorXd&, const VectorXd&)> gap;
  std::function<std::optional<VectorXd>(const VectorXd&)> polish;
};

FitResult accelerated_projected_gradient(const ProjectedProblem& prob, VectorXd x, double lip,
                                         double target, int max_iter) {
  FitResult out;
  VectorXd gx(x.size());
  double fx = prob.value_grad(x, &gx);
  double gap = prob.gap(x, gx);
  VectorXd y = x, gy = gx;
  double fy = fx;
  double theta = 1.0;
  std::vector<Index> last_support = support_of(x);
  int it = 0;
  const double slack = 1e-13;
  while (gap > target && it < max_iter) {
    VectorXd xn, gxn(x.size());
    double fxn = 0.0;
    for (;;) {
      xn = prob.project(y - gy / lip);
      fxn = prob.value_grad(xn, &gxn);
      const VectorXd d = xn - y;
      if (fxn <= fy + gy.dot(d) + 0.5 * lip * d.squaredNorm() + slack * std::abs(fy)) break;
      lip *= 2.0;
      if (!std::isfinite(lip)) break;
    }
    if ((y - xn).dot(xn - x) > 0.0) theta = 1.0;
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    const double mom = (theta - 1.0) / theta_next;
    y = xn + mom * (xn - x);
    x = std::move(xn);
    gx = std::move(gxn);
    fx = fxn;
    theta = theta_next;
    fy = prob.value_grad(y, &gy);
    ++it;
    gap = prob.gap(x, gx);
    if (gap > target && prob.polish && it % 10 == 0) {
      std::vector<Index> s = support_of(x);
      if (s == last_support) {
        if (auto cand = prob.polish(x)) {
          VectorXd gc(x.size());
          prob.value_grad(*cand, &gc);
          const double gap_c = prob.gap(*cand, gc);
          if (gap_c <= target) {
            x = std::move(*cand);
            gx = std::move(gc);
            gap = gap_c;
            break;
          }
        }
      }
      last_support = std::move(s);
    }
  }
  out.beta = std::move(x);
  out.gap = gap;
  out.iterations = it;
  out.converged = gap <= target;
  return out;
}

}  // namespace

void SolverConfig::validate() const {
  if (max_iter < 1) throw InputError("max_iter must be positive");
  if (!(tol > 0.0)) throw InputError("tol must be positive");
  if (!(zero_threshold > 0.0)) throw InputError("zero_threshold must be positive");
}

VectorXd project_l1_ball(const VectorXd& v, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("projection radius must be >= 0");
  if (!v.allFinite()) throw InputError("projection input is not finite");
  if (v.lpNorm<1>() <= t) return v;
  if (t == 0.0) return VectorXd::Zero(v.size());

  std::vector<double> u(static_cast<std::size_t>(v.size()));
  for (Index j = 0; j < v.size(); ++j) u[static_cast<std::size_t>(j)] = std::abs(v(j));
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumsum += u[k];
    const double cand = (cumsum - t) / static_cast<double>(k + 1);
    if (u[k] > cand) {
      theta = cand;
    } else {
      break;
    }
  }
  VectorXd w(v.size());
  for (Index j = 0; j < v.size(); ++j) {
    const double mag = std::max(std::abs(v(j)) - theta, 0.0);
    w(j) = v(j) < 0.0 ? -mag : mag;
  }
  fit_to_radius(w, t, [](const VectorXd& x) { return x.lpNorm<1>(); });
  return w;
}

VectorXd project_group_ball(const VectorXd& v, const GroupPartition& groups, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("projection radius must be >= 0");
  if (v.size() != groups.p()) throw InputError("vector length does not match the partition");
  if (!v.allFinite()) throw InputError("projection input is not finite");
  if (group_norm(v, groups) <= t) return v;
  if (t == 0.0) return VectorXd::Zero(v.size());

  // Each group shrinks to max(0, ||v_g|| - lambda w_g) with w_g = sqrt(|g|); lambda solves
  // sum_g w_g^2 (a_g - lambda)_+ = t with a_g = ||v_g|| / w_g, located by sorting a_g.
  const auto& gs = groups.groups();
  const std::size_t m = gs.size();
  std::vector<double> norm(m), weight(m), ratio(m);
  for (std::size_t g = 0; g < m; ++g) {
    double sq = 0.0;
    for (Index j : gs[g]) sq += v(j) * v(j);
    norm[g] = std::sqrt(sq);
    weight[g] = std::sqrt(static_cast<double>(gs[g].size()));
    ratio[g] = norm[g] / weight[g];
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ratio[a] > ratio[b] || (ratio[a] == ratio[b] && a < b);
  });
  double s1 = 0.0, s2 = 0.0, lambda = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t g = order[k];
    s1 += weight[g] * norm[g];
    s2 += weight[g] * weight[g];
    const double cand = (s1 - t) / s2;
    if (ratio[g] > cand) {
      lambda = cand;
    } else {
      break;
    }
  }
  VectorXd w = VectorXd::Zero(v.size());
  for (std::size_t g = 0; g < m; ++g) {
    if (norm[g] == 0.0) continue;
    const double shrunk = norm[g] - lambda * weight[g];
    if (shrunk <= 0.0) continue;
    const double factor = shrunk / norm[g];
    for (Index j : gs[g]) w(j) = factor * v(j);
  }
  fit_to_radius(w, t, [&](const VectorXd& x) { return group_norm(x, groups); });
  return w;
}

double least_squares_objective(const Dataset& data, const VectorXd& beta) {
  if (beta.size() != data.p()) throw InputError("beta length does not match the design");
  return (data.y() - data.x() * beta).squaredNorm() / static_cast<double>(data.n());
}

ConstrainedSolver::ConstrainedSolver(const Dataset& data, Penalty penalty,
                                     std::optional<GroupPartition> groups, SolverConfig cfg)
    : data_(data), penalty_(penalty), groups_(std::move(groups)), cfg_(cfg) {
  cfg_.validate();
  if (penalty_ == Penalty::GroupLasso) {
    if (!groups_) throw InputError("group lasso requires a group partition");
    if (groups_->p() != data_.p()) throw InputError("group partition does not match p");
  }
  xty_ = data_.x().transpose() * data_.y();
  yy_ = data_.y().squaredNorm();
  if (penalty_ == Penalty::Lasso) {
    gram_cols_.resize(static_cast<std::size_t>(data_.p()));
    have_col_.assign(static_cast<std::size_t>(data_.p()), 0);
  }
}

const VectorXd& ConstrainedSolver::gram_column(Index j) const {
  const auto k = static_cast<std::size_t>(j);
  if (!have_col_[k]) {
    gram_cols_[k] = data_.x().transpose() * data_.x().col(j);
    have_col_[k] = 1;
  }
  return gram_cols_[k];
}

VectorXd ConstrainedSolver::full_gradient(const VectorXd& beta,
                                          const std::vector<Index>& support) const {
  VectorXd g = -xty_;
  for (Index j : support) g.noalias() += beta(j) * gram_column(j);
  return g * (2.0 / static_cast<double>(data_.n()));
}

FitResult ConstrainedSolver::solve(double t, const VectorXd* warm) const {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("constraint radius t must be >= 0");
  if (warm && warm->size() != data_.p()) throw InputError("warm start has the wrong length");
  switch (penalty_) {
    case Penalty::Lasso: return solve_lasso(t, warm);
    case Penalty::GroupLasso: return solve_group(t, warm);
    case Penalty::SqrtLasso: return solve_sqrt(t, warm);
  }
  return {};
}

FitResult ConstrainedSolver::solve_lasso(double t, const VectorXd* warm) const {
  const Index p = data_.p();
  const double n = static_cast<double>(data_.n());
  FitResult out;
  out.beta = VectorXd::Zero(p);
  const double f0 = yy_ / n;
  out.objective = f0;
  if (t == 0.0 || f0 == 0.0) return out;
  const double target = cfg_.tol * f0;

  VectorXd beta = warm ? project_l1_ball(*warm, t) : VectorXd::Zero(p);
  std::vector<Index> support = support_of(beta);
  VectorXd grad = full_gradient(beta, support);
  double gap = l1_gap(beta, grad, t);
  int iters = 0;
  int rounds = 0;
  Index extra = std::min<Index>(p, 8);

  while (gap > target) {
    if (iters >= cfg_.max_iter || rounds++ >= 200) break;

    // Working set: current support plus the largest gradient entries outside it.
    std::vector<char> in(static_cast<std::size_t>(p), 0);
    std::vector<Index> work = support;
    for (Index j : support) in[static_cast<std::size_t>(j)] = 1;
    std::vector<Index> outside;
    for (Index j = 0; j < p; ++j) {
      if (!in[static_cast<std::size_t>(j)]) outside.push_back(j);
    }
    const auto take = std::min<std::size_t>(outside.size(), static_cast<std::size_t>(extra));
    std::partial_sort(outside.begin(), outside.begin() + static_cast<std::ptrdiff_t>(take),
                      outside.end(), [&](Index a, Index b) {
                        const double ga = std::abs(grad(a)), gb = std::abs(grad(b));
                        return ga > gb || (ga == gb && a < b);
                      });
    work.insert(work.end(), outside.begin(), outside.begin() + static_cast<std::ptrdiff_t>(take));
    std::sort(work.begin(), work.end());
    const auto m = static_cast<Index>(work.size());

    MatrixXd gram(m, m);
    VectorXd c(m), x(m);
    for (Index b = 0; b < m; ++b) {
      const VectorXd& col = gram_column(work[static_cast<std::size_t>(b)]);
      for (Index a = 0; a < m; ++a) gram(a, b) = col(work[static_cast<std::size_t>(a)]);
      c(b) = xty_(work[static_cast<std::size_t>(b)]);
      x(b) = beta(work[static_cast<std::size_t>(b)]);
    }

    const double inner_target = 0.25 * target;
    auto local_gap = [&](const VectorXd& xv, const VectorXd& gx) {
      return (2.0 / n) * ((gx - c).dot(xv) + t * (gx - c).cwiseAbs().maxCoeff());
    };
    auto try_polish = [&](const VectorXd& xv) -> std::optional<VectorXd> {
      std::vector<Index> s = support_of(xv);
      if (s.empty() || static_cast<Index>(s.size()) > data_.n()) return std::nullopt;
      const auto k = static_cast<Index>(s.size());
      MatrixXd gs(k, k);
      VectorXd cs(k), sg(k);
      for (Index a = 0; a < k; ++a) {
        for (Index b = 0; b < k; ++b) {
          gs(a, b) = gram(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]);
        }
        cs(a) = c(s[static_cast<std::size_t>(a)]);
        sg(a) = xv(s[static_cast<std::size_t>(a)]) > 0.0 ? 1.0 : -1.0;
      }
      auto face = face_minimizer(gs, cs, sg, t);
      if (!face) return std::nullopt;
      VectorXd cand = VectorXd::Zero(m);
      for (Index a = 0; a < k; ++a) cand(s[static_cast<std::size_t>(a)]) = (*face)(a);
      return cand;
    };

    VectorXd gx = gram * x;
    double lgap = local_gap(x, gx);
    // Nothing left to gain: the working set already spans every coordinate.
    if (m == p && lgap <= inner_target && gap <= 4.0 * target) break;
    if (lgap > inner_target) {
      if (auto cand = try_polish(x)) {
        const VectorXd gc = gram * *cand;
        const double cgap = local_gap(*cand, gc);
        if (cgap <= inner_target) {
          x = *cand;
          gx = gc;
          lgap = cgap;
        }
      }
    }

    if (lgap > inner_target) {
      const double lam_max = power_iteration([&](const VectorXd& v) { return VectorXd(gram * v); }, m);
      double lip = lam_max > 0.0 ? 1.05 * 2.0 * lam_max / n : 1.0;
      VectorXd y = x, gy = gx;
      double theta = 1.0;
      std::vector<Index> last_support = support_of(x);
      while (iters < cfg_.max_iter) {
        const VectorXd grad_y = (2.0 / n) * (gy - c);
        VectorXd xn, gxn;
        for (;;) {
          xn = project_l1_ball(y - grad_y / lip, t);
          gxn = gram * xn;
          const VectorXd d = xn - y;
          const double curv = d.dot(gxn - gy) / n;
          if (curv <= 0.5 * lip * d.squaredNorm() * (1.0 + 1e-12)) break;
          lip *= 2.0;
        }
        if ((y - xn).dot(xn - x) > 0.0) theta = 1.0;
        const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
        const double mom = (theta - 1.0) / theta_next;
        y = xn + mom * (xn - x);
        gy = gxn + mom * (gxn - gx);
        x = std::move(xn);
        gx = std::move(gxn);
        theta = theta_next;
        ++iters;
        if (iters % 10 != 0) continue;
        lgap = local_gap(x, gx);
        if (lgap <= inner_target) break;
        std::vector<Index> s = support_of(x);
        if (s == last_support) {
          if (auto cand = try_polish(x)) {
            const VectorXd gc = gram * *cand;
            const double cgap = local_gap(*cand, gc);
            if (cgap <= inner_target) {
              x = *cand;
              gx = gc;
              break;
            }
          }
        }
        last_support = std::move(s);
      }
    }

    beta.setZero();
    for (Index a = 0; a < m; ++a) beta(work[static_cast<std::size_t>(a)]) = x(a);
    support = support_of(beta);
    grad = full_gradient(beta, support);
    gap = l1_gap(beta, grad, t);
    extra = std::min<Index>(p, 2 * extra);
  }

  out.beta = std::move(beta);
  VectorXd resid = data_.y();
  for (Index j : support) resid.noalias() -= out.beta(j) * data_.x().col(j);
  out.objective = resid.squaredNorm() / n;
  out.gap = std::max(gap, 0.0);
  out.iterations = iters;
  out.converged = gap <= target;
  return out;
}

FitResult ConstrainedSolver::solve_group(double t, const VectorXd* warm) const {
  const Index p = data_.p();
  const double n = static_cast<double>(data_.n());
  const MatrixXd& x = data_.x();
  const VectorXd& y = data_.y();
  const GroupPartition& groups = *groups_;
  const double f0 = yy_ / n;
  if (t == 0.0 || f0 == 0.0) {
    FitResult out;
    out.beta = VectorXd::Zero(p);
    out.objective = f0;
    return out;
  }

  ProjectedProblem prob;
  prob.value_grad = [&](const VectorXd& b, VectorXd* g) {
    const VectorXd r = y - x * b;
    if (g) *g = (-2.0 / n) * (x.transpose() * r);
    return r.squaredNorm() / n;
  };
  prob.project = [&](const VectorXd& v) { return project_group_ball(v, groups, t); };
  prob.gap = [&](const VectorXd& b, const VectorXd& g) {
    double dual = 0.0;
    for (const auto& grp : groups.groups()) {
      double sq = 0.0;
      for (Index j : grp) sq += g(j) * g(j);
      dual = std::max(dual, std::sqrt(sq / static_cast<double>(grp.size())));
    }
    return g.dot(b) + t * dual;
  };
  const double lam = power_iteration(
      [&](const VectorXd& v) { return VectorXd(x.transpose() * (x * v)); }, p);
  const double lip = lam > 0.0 ? 1.05 * 2.0 * lam / n : 1.0;
  VectorXd start = warm ? project_group_ball(*warm, groups, t) : VectorXd::Zero(p);
  FitResult out = accelerated_projected_gradient(prob, std::move(start), lip, cfg_.tol * f0,
                                                 cfg_.max_iter);
  out.objective = least_squares_objective(data_, out.beta);
  return out;
}

FitResult ConstrainedSolver::solve_sqrt(double t, const VectorXd* warm) const {
  // Minimizes (1/n)||Y - X beta||_2 directly. Its minimizer over the l1 ball coincides
  // with the squared-loss minimizer; the certificate below is the gap of this objective.
  const Index p = data_.p();
  const double n = static_cast<double>(data_.n());
  const MatrixXd& x = data_.x();
  const VectorXd& y = data_.y();
  const double h0 = std::sqrt(yy_) / n;
  if (t == 0.0 || h0 == 0.0) {
    FitResult out;
    out.beta = VectorXd::Zero(p);
    out.objective = yy_ / n;
    return out;
  }

  ProjectedProblem prob;
  prob.value_grad = [&](const VectorXd& b, VectorXd* g) {
    const VectorXd r = y - x * b;
    const double rn = r.norm();
    if (g) {
      if (rn > 0.0) {
        *g = (-1.0 / (n * rn)) * (x.transpose() * r);
      } else {
        g->setZero(p);
      }
    }
    return rn / n;
  };
  prob.project = [&](const VectorXd& v) { return project_l1_ball(v, t); };
  // At an (almost) interpolating point the objective is nonsmooth; there the squared
  // loss itself certifies optimality since it is bounded below by 0.
  prob.gap = [&](const VectorXd& b, const VectorXd& g) {
    const double f = (y - x * b).squaredNorm() / n;
    if (f <= cfg_.tol * cfg_.tol * yy_ / n) return 0.0;
    return l1_gap(b, g, t);
  };
  prob.polish = [&](const VectorXd& b) -> std::optional<VectorXd> {
    const std::vector<Index> s = support_of(b);
    if (s.empty() || static_cast<Index>(s.size()) > data_.n()) return std::nullopt;
    const auto k = static_cast<Index>(s.size());
    MatrixXd xs(data_.n(), k);
    VectorXd sg(k);
    for (Index a = 0; a < k; ++a) {
      xs.col(a) = x.col(s[static_cast<std::size_t>(a)]);
      sg(a) = b(s[static_cast<std::size_t>(a)]) > 0.0 ? 1.0 : -1.0;
    }
    const MatrixXd gs = xs.transpose() * xs;
    const VectorXd cs = xs.transpose() * y;
    auto face = face_minimizer(gs, cs, sg, t);
    if (!face) return std::nullopt;
    VectorXd cand = VectorXd::Zero(p);
    for (Index a = 0; a < k; ++a) cand(s[static_cast<std::size_t>(a)]) = (*face)(a);
    return cand;
  };
  const double lam = power_iteration(
      [&](const VectorXd& v) { return VectorXd(x.transpose() * (x * v)); }, p);
  // Curvature of ||r||/n at the start; backtracking corrects it along the way.
  const double lip = lam > 0.0 ? lam / (n * std::sqrt(yy_)) : 1.0;
  VectorXd start = warm ? project_l1_ball(*warm, t) : VectorXd::Zero(p);
  FitResult out = accelerated_projected_gradient(prob, std::move(start), lip, cfg_.tol * h0,
                                                 cfg_.max_iter);
  out.objective = least_squares_objective(data_, out.beta);
  return out;
}

FitResult fit_constrained(const Dataset& data, const EstimatorSpec& spec, const SolverConfig& cfg) {
  return ConstrainedSolver(data, spec.penalty(), spec.groups(), cfg).solve(spec.t());
}

FitResult fit_constrained(const Dataset& data, const EstimatorSpec& spec, const SolverConfig& cfg,
                          const VectorXd& warm) {
  return ConstrainedSolver(data, spec.penalty(), spec.groups(), cfg).solve(spec.t(), &warm);
}

double lagrangian_kkt_residual(const Dataset& data, const VectorXd& beta, double lambda) {
  const VectorXd corr =
      data.x().transpose() * (data.y() - data.x() * beta) / static_cast<double>(data.n());
  double worst = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    if (beta(j) != 0.0) {
      const double sign = beta(j) > 0.0 ? 1.0 : -1.0;
      worst = std::max(worst, std::abs(corr(j) - lambda * sign));
    } else {
      worst = std::max(worst, std::abs(corr(j)) - lambda);
    }
  }
  return std::max(worst, 0.0);
}

FitResult fit_lagrangian(const Dataset& data, double lambda, const SolverConfig& cfg,
                         const VectorXd* warm) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("lambda must be positive");
  cfg.validate();
  const Index p = data.p();
  const double n = static_cast<double>(data.n());
  const MatrixXd& x = data.x();
  if (warm && warm->size() != p) throw InputError("warm start has the wrong length");

  VectorXd beta = warm ? *warm : VectorXd::Zero(p);
  const VectorXd colsq = x.colwise().squaredNorm().transpose() / n;
  VectorXd resid = data.y() - x * beta;
  const double scale = std::max(data.y().squaredNorm() / n, std::numeric_limits<double>::min());

  auto update = [&](Index j) {
    if (colsq(j) == 0.0) {
      beta(j) = 0.0;
      return 0.0;
    }
    const double z = x.col(j).dot(resid) / n + colsq(j) * beta(j);
    const double next = soft_threshold(z, lambda) / colsq(j);
    const double delta = next - beta(j);
    if (delta != 0.0) {
      resid.noalias() -= delta * x.col(j);
      beta(j) = next;
    }
    return colsq(j) * delta * delta;
  };

  const double inner_tol = 1e-28 * scale;
  const double kkt_tol = 1e-8;
  int sweeps = 0;
  double kkt = std::numeric_limits<double>::infinity();
  while (sweeps < cfg.max_iter) {
    for (Index j = 0; j < p; ++j) update(j);
    ++sweeps;
    while (sweeps < cfg.max_iter) {
      double change = 0.0;
      for (Index j = 0; j < p; ++j) {
        if (beta(j) != 0.0) change = std::max(change, update(j));
      }
      ++sweeps;
      if (change <= inner_tol) break;
    }
    resid = data.y() - x * beta;
    kkt = lagrangian_kkt_residual(data, beta, lambda);
    if (kkt <= kkt_tol) break;
  }

  FitResult out;
  out.objective = resid.squaredNorm() / n + 2.0 * lambda * beta.lpNorm<1>();
  out.beta = std::move(beta);
  out.gap = kkt;
  out.iterations = sweeps;
  out.converged = kkt <= kkt_tol;
  return out;
}

double binding_threshold(const Dataset& data) {
  if (data.y().squaredNorm() == 0.0) return 0.0;
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(data.x());
  return cod.solve(data.y()).lpNorm<1>();
}

}  // namespace lassocv
