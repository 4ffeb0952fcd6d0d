#pragma once

// Reference implementations used only by the tests. They share no code with the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double ls_objective(const MatrixXd& x, const VectorXd& y, const VectorXd& b) {
  return (y - x * b).squaredNorm() / static_cast<double>(x.rows());
}

// Exact constrained least squares over the l1 ball by face enumeration.
// Every (support, sign) face is visited; on each one the stationary point of the
// objective restricted to the face's affine hull (with and without the active
// constraint) is computed, and the best feasible candidate wins. An optimum with
// minimal support is the unique stationary point of its face, so it is always found.
inline double l1_ball_minimum(const MatrixXd& x, const VectorXd& y, double t,
                              VectorXd* argmin = nullptr) {
  const Index n = x.rows();
  const Index p = x.cols();
  double best = y.squaredNorm() / static_cast<double>(n);
  if (argmin) *argmin = VectorXd::Zero(p);
  if (t <= 0.0) return best;
  const MatrixXd h = x.transpose() * x / static_cast<double>(n);
  const VectorXd g = x.transpose() * y / static_cast<double>(n);
  auto consider = [&](const std::vector<Index>& s, const std::vector<int>& sign,
                      const VectorXd& bs) {
    double l1 = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (sign[k] * bs(static_cast<Index>(k)) < -1e-12) return;
      l1 += std::abs(bs(static_cast<Index>(k)));
    }
    if (l1 > t * (1.0 + 1e-12) + 1e-14) return;
    VectorXd b = VectorXd::Zero(p);
    for (std::size_t k = 0; k < s.size(); ++k) b(s[k]) = bs(static_cast<Index>(k));
    const double obj = ls_objective(x, y, b);
    if (obj < best) {
      best = obj;
      if (argmin) *argmin = b;
    }
  };
  for (unsigned mask = 1; mask < (1u << p); ++mask) {
    std::vector<Index> s;
    for (Index j = 0; j < p; ++j) {
      if (mask & (1u << j)) s.push_back(j);
    }
    const Index m = static_cast<Index>(s.size());
    MatrixXd hs(m, m);
    VectorXd gs(m);
    for (Index a = 0; a < m; ++a) {
      gs(a) = g(s[static_cast<std::size_t>(a)]);
      for (Index b = 0; b < m; ++b) hs(a, b) = h(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]);
    }
    // Interior stationary point (sign-independent).
    Eigen::FullPivLU<MatrixXd> lu(hs);
    const bool hs_invertible = lu.isInvertible();
    VectorXd interior;
    if (hs_invertible) interior = lu.solve(gs);
    for (unsigned sm = 0; sm < (1u << m); ++sm) {
      std::vector<int> sign(static_cast<std::size_t>(m));
      VectorXd sv(m);
      for (Index k = 0; k < m; ++k) {
        sign[static_cast<std::size_t>(k)] = (sm & (1u << k)) ? -1 : 1;
        sv(k) = sign[static_cast<std::size_t>(k)];
      }
      if (hs_invertible) consider(s, sign, interior);
      MatrixXd kkt = MatrixXd::Zero(m + 1, m + 1);
      kkt.topLeftCorner(m, m) = hs;
      kkt.block(0, m, m, 1) = sv;
      kkt.block(m, 0, 1, m) = sv.transpose();
      VectorXd rhs(m + 1);
      rhs.head(m) = gs;
      rhs(m) = t;
      Eigen::FullPivLU<MatrixXd> klu(kkt);
      if (!klu.isInvertible()) continue;
      const VectorXd sol = klu.solve(rhs);
      consider(s, sign, sol.head(m));
    }
  }
  return best;
}

// Best objective over `draws` random points of the l1 ball (uniform direction on the
// cross-polytope surface scaled by a random radius, plus the 2p vertices).
inline double l1_ball_sampled_minimum(const MatrixXd& x, const VectorXd& y, double t, int draws,
                                      std::mt19937_64& rng) {
  const Index p = x.cols();
  double best = ls_objective(x, y, VectorXd::Zero(p));
  for (Index j = 0; j < p; ++j) {
    for (int s : {-1, 1}) {
      VectorXd b = VectorXd::Zero(p);
      b(j) = s * t;
      best = std::min(best, ls_objective(x, y, b));
    }
  }
  std::exponential_distribution<double> ex(1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (int d = 0; d < draws; ++d) {
    VectorXd b(p);
    for (Index j = 0; j < p; ++j) b(j) = (coin(rng) ? 1.0 : -1.0) * ex(rng);
    const double r = d % 2 == 0 ? t : t * u(rng);
    b *= r / b.lpNorm<1>();
    best = std::min(best, ls_objective(x, y, b));
  }
  return best;
}

// Projection onto {b : sum_g w_g ||b_g||_2 <= t} by bisection on the multiplier.
// Singleton groups with unit weights give the l1 ball.
inline VectorXd weighted_group_projection(const VectorXd& v,
                                          const std::vector<std::vector<Index>>& groups,
                                          double t) {
  std::vector<double> w, norm;
  for (const auto& g : groups) {
    w.push_back(std::sqrt(static_cast<double>(g.size())));
    double s = 0.0;
    for (Index j : g) s += v(j) * v(j);
    norm.push_back(std::sqrt(s));
  }
  auto value = [&](double lam) {
    double s = 0.0;
    for (std::size_t k = 0; k < groups.size(); ++k) s += w[k] * std::max(0.0, norm[k] - lam * w[k]);
    return s;
  };
  if (value(0.0) <= t) return v;
  if (t <= 0.0) return VectorXd::Zero(v.size());
  double lo = 0.0, hi = 0.0;
  for (std::size_t k = 0; k < groups.size(); ++k) hi = std::max(hi, norm[k] / w[k]);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (value(mid) > t ? lo : hi) = mid;
  }
  const double lam = 0.5 * (lo + hi);
  VectorXd out = VectorXd::Zero(v.size());
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (norm[k] <= lam * w[k]) continue;
    const double f = 1.0 - lam * w[k] / norm[k];
    for (Index j : groups[k]) out(j) = f * v(j);
  }
  return out;
}

// Minimum-norm least squares via a hand-rolled SVD (one-sided Jacobi).
inline VectorXd pinv_solve(const MatrixXd& x, const VectorXd& y) {
  MatrixXd u = x;
  const Index p = x.cols();
  MatrixXd v = MatrixXd::Identity(p, p);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Index i = 0; i < p; ++i) {
      for (Index j = i + 1; j < p; ++j) {
        const double a = u.col(i).squaredNorm();
        const double b = u.col(j).squaredNorm();
        const double c = u.col(i).dot(u.col(j));
        if (std::abs(c) <= 1e-300) continue;
        off = std::max(off, std::abs(c) / std::sqrt(a * b + 1e-300));
        const double zeta = (b - a) / (2.0 * c);
        const double tt = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + tt * tt);
        const double sn = cs * tt;
        for (MatrixXd* m : {&u, &v}) {
          const VectorXd ci = m->col(i);
          const VectorXd cj = m->col(j);
          m->col(i) = cs * ci - sn * cj;
          m->col(j) = sn * ci + cs * cj;
        }
      }
    }
    if (off < 1e-15) break;
  }
  VectorXd sig(p);
  for (Index j = 0; j < p; ++j) sig(j) = u.col(j).norm();
  const double smax = sig.maxCoeff();
  VectorXd out = VectorXd::Zero(p);
  for (Index j = 0; j < p; ++j) {
    if (sig(j) <= 1e-10 * smax) continue;
    const VectorXd uj = u.col(j) / sig(j);
    out += v.col(j) * (uj.dot(y) / sig(j));
  }
  return out;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace oracle
