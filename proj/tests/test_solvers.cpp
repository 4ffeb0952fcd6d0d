#include "doctest.h"
#include "oracles.hpp"

#include "lassocv/error.hpp"
#include "lassocv/solvers.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace lassocv;

namespace {

MatrixXd gaussian(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  MatrixXd m(r, c);
  for (Index j = 0; j < c; ++j) {
    for (Index i = 0; i < r; ++i) m(i, j) = z(rng);
  }
  return m;
}

Dataset make_data(Index n, Index p, std::mt19937_64& rng) {
  MatrixXd x = gaussian(n, p, rng);
  VectorXd beta = VectorXd::Zero(p);
  beta(0) = 1.5;
  if (p > 2) beta(2) = -1.0;
  VectorXd y = x * beta + 0.5 * gaussian(n, 1, rng).col(0);
  return Dataset(std::move(y), std::move(x));
}

}  // namespace

TEST_CASE("l1 projection examples") {
  VectorXd v(2);
  v << 3, -1;
  VectorXd got = project_l1_ball(v, 1.0);
  CHECK(got(0) == doctest::Approx(1.0));
  CHECK(got(1) == doctest::Approx(0.0));
  // grid search over the ball
  double best = std::numeric_limits<double>::infinity();
  VectorXd arg(2);
  for (int i = -1000; i <= 1000; ++i) {
    for (int j = -1000; j <= 1000; ++j) {
      const double a = i / 1000.0, b = j / 1000.0;
      if (std::abs(a) + std::abs(b) > 1.0) continue;
      const double d = (a - 3) * (a - 3) + (b + 1) * (b + 1);
      if (d < best) {
        best = d;
        arg << a, b;
      }
    }
  }
  CHECK((got - arg).cwiseAbs().maxCoeff() < 2e-3);

  v << 0.2, 0.1;
  CHECK(project_l1_ball(v, 1.0) == v);
  v << 1, 1;
  got = project_l1_ball(v, 1.0);
  CHECK(got(0) == doctest::Approx(0.5));
  CHECK(got(1) == doctest::Approx(0.5));
  CHECK(project_l1_ball(v, 0.0).isZero(0.0));
  CHECK_THROWS_AS(project_l1_ball(v, -1.0), InputError);
  v(0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(project_l1_ball(v, 1.0), InputError);
}

TEST_CASE("group projection examples") {
  std::mt19937_64 rng(3);
  const VectorXd v = gaussian(6, 1, rng).col(0);
  const GroupPartition single = GroupPartition::singletons(6);
  for (double t : {0.0, 0.3, 1.0, 100.0}) {
    CHECK((project_group_ball(v, single, t) - project_l1_ball(v, t)).cwiseAbs().maxCoeff() < 1e-14);
  }
  VectorXd w(4);
  w << 1, 2, 2, 0;  // norm 3
  const GroupPartition one({{0, 1, 2, 3}}, 4);
  CHECK((project_group_ball(w, one, 2.0) - w / 3.0).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(project_group_ball(w, one, 0.0).isZero(0.0));
  CHECK_THROWS_AS(project_group_ball(w, GroupPartition::singletons(3), 1.0), InputError);
}

TEST_CASE("projection properties on random cases") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> pd(1, 12);
  std::uniform_real_distribution<double> td(0.0, 4.0);
  for (int c = 0; c < 300; ++c) {
    const Index p = pd(rng);
    const VectorXd u = 2.0 * gaussian(p, 1, rng).col(0);
    const VectorXd v = 2.0 * gaussian(p, 1, rng).col(0);
    const double t = td(rng);
    const VectorXd pu = project_l1_ball(u, t);
    CHECK(pu.lpNorm<1>() <= t + 1e-12);
    CHECK((project_l1_ball(pu, t) - pu).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((pu - project_l1_ball(v, t)).norm() <= (u - v).norm() + 1e-12);
    std::vector<std::vector<Index>> singles;
    for (Index j = 0; j < p; ++j) singles.push_back({j});
    CHECK((pu - oracle::weighted_group_projection(u, singles, t)).cwiseAbs().maxCoeff() < 1e-9);

    // random contiguous partition
    std::vector<std::vector<Index>> groups;
    for (Index j = 0; j < p;) {
      const Index len = std::min<Index>(p - j, 1 + static_cast<Index>(rng() % 3));
      std::vector<Index> g;
      for (Index k = 0; k < len; ++k) g.push_back(j + k);
      groups.push_back(g);
      j += len;
    }
    const GroupPartition gp(groups, p);
    const VectorXd gu = project_group_ball(u, gp, t);
    CHECK(group_norm(gu, gp) <= t + 1e-10);
    CHECK((project_group_ball(gu, gp, t) - gu).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((gu - project_group_ball(v, gp, t)).norm() <= (u - v).norm() + 1e-12);
    CHECK((gu - oracle::weighted_group_projection(u, groups, t)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = SolverConfig{};
  cfg.zero_threshold = -1.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("constrained fit examples") {
  std::mt19937_64 rng(5);
  const Dataset d = make_data(10, 4, rng);
  CHECK(fit_constrained(d, EstimatorSpec::lasso(0.0)).beta.isZero(0.0));

  VectorXd y(3);
  y << 1, 2, 3;
  const Dataset id(y, MatrixXd::Identity(3, 3));
  const FitResult r = fit_constrained(id, EstimatorSpec::lasso(10.0));
  CHECK((r.beta - y).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(r.objective < 1e-14);
  CHECK(r.converged);
  CHECK_THROWS_AS(fit_constrained(id, EstimatorSpec::lasso(1.0), SolverConfig{}, VectorXd::Zero(2)),
                  InputError);
}

TEST_CASE("constrained fit matches the face-enumeration oracle") {
  std::mt19937_64 rng(17);
  for (int c = 0; c < 30; ++c) {
    const Index n = 5, p = 8;
    const Dataset d = make_data(n, p, rng);
    const double t = (c % 5 == 0) ? 1.0 : 0.3 * (c % 7 + 1);
    VectorXd arg;
    const double best = oracle::l1_ball_minimum(d.x(), d.y(), t, &arg);
    const FitResult fit = fit_constrained(d, EstimatorSpec::lasso(t));
    CHECK(fit.beta.lpNorm<1>() <= t + 1e-8);
    CHECK(std::abs(fit.objective - best) < 1e-6);
    CHECK(oracle::l1_ball_sampled_minimum(d.x(), d.y(), t, 2000, rng) >= fit.objective - 1e-9);
  }
}

TEST_CASE("objective is nonincreasing in t") {
  std::mt19937_64 rng(23);
  const Dataset d = make_data(30, 50, rng);
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 20; ++i) {
    const double obj = fit_constrained(d, EstimatorSpec::lasso(0.2 * i)).objective;
    CHECK(obj <= prev + 1e-12);
    prev = obj;
  }
}

TEST_CASE("warm start reaches the same optimum") {
  std::mt19937_64 rng(29);
  const Dataset d = make_data(40, 20, rng);
  const ConstrainedSolver s(d, Penalty::Lasso);
  const VectorXd warm = 3.0 * VectorXd::Ones(20);
  const FitResult cold = s.solve(1.5);
  const FitResult hot = s.solve(1.5, &warm);
  CHECK(std::abs(cold.objective - hot.objective) < 1e-10);
  CHECK((cold.beta - hot.beta).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("sqrt-lasso and lasso share the argmin") {
  std::mt19937_64 rng(31);
  for (int c = 0; c < 20; ++c) {
    const Dataset d = make_data(20, 10, rng);
    for (double t : {0.1, 0.5, 1.0, 2.0, 4.0}) {
      const VectorXd a = fit_constrained(d, EstimatorSpec::lasso(t)).beta;
      const VectorXd b = fit_constrained(d, EstimatorSpec(Penalty::SqrtLasso, t)).beta;
      CHECK((a - b).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("group lasso fit is feasible and optimal against sampling") {
  std::mt19937_64 rng(37);
  const Dataset d = make_data(25, 6, rng);
  const GroupPartition g({{0, 1}, {2, 3, 4}, {5}}, 6);
  const EstimatorSpec spec(Penalty::GroupLasso, 1.2, g);
  const FitResult fit = fit_constrained(d, spec);
  CHECK(group_norm(fit.beta, g) <= 1.2 + 1e-8);
  // projected-gradient stationarity: beta = P(beta - step * grad)
  const VectorXd grad = -2.0 / 25.0 * d.x().transpose() * (d.y() - d.x() * fit.beta);
  const VectorXd fixed = project_group_ball(fit.beta - 0.05 * grad, g, 1.2);
  CHECK((fixed - fit.beta).cwiseAbs().maxCoeff() < 1e-6);
  std::normal_distribution<double> z;
  for (int i = 0; i < 2000; ++i) {
    VectorXd b(6);
    for (Index j = 0; j < 6; ++j) b(j) = z(rng);
    b = project_group_ball(b, g, 1.2);
    CHECK(least_squares_objective(d, b) >= fit.objective - 1e-9);
  }
}

TEST_CASE("lagrangian fit examples") {
  std::mt19937_64 rng(41);
  const Dataset d = make_data(30, 8, rng);
  const double lmax = (d.x().transpose() * d.y()).cwiseAbs().maxCoeff() / 30.0;
  CHECK(fit_lagrangian(d, lmax).beta.isZero(0.0));
  CHECK(fit_lagrangian(d, 1.5 * lmax).beta.isZero(0.0));
  CHECK_THROWS_AS(fit_lagrangian(d, 0.0), InputError);

  // orthogonal columns with X^T X = n I: soft thresholding of OLS
  const Index n = 16, p = 4;
  MatrixXd h = MatrixXd::Ones(1, 1);
  while (h.rows() < n) {
    const Index m = h.rows();
    MatrixXd next(2 * m, 2 * m);
    next << h, h, h, -h;
    h = next;
  }
  const MatrixXd x = h.leftCols(p);
  VectorXd y = gaussian(n, 1, rng).col(0) + x.col(1) * 0.8;
  const Dataset od(y, x);
  const double lam = 0.2;
  const VectorXd ols = x.transpose() * y / static_cast<double>(n);
  const VectorXd got = fit_lagrangian(od, lam).beta;
  for (Index j = 0; j < p; ++j) {
    const double st = std::copysign(std::max(0.0, std::abs(ols(j)) - lam), ols(j));
    CHECK(got(j) == doctest::Approx(st).epsilon(1e-10));
  }
}

TEST_CASE("lagrangian KKT and duality with the constrained form") {
  std::mt19937_64 rng(43);
  for (int c = 0; c < 40; ++c) {
    const Index n = 5 + static_cast<Index>(rng() % 30);
    const Index p = 3 + static_cast<Index>(rng() % 40);
    const Dataset d = make_data(n, p, rng);
    const double lmax = (d.x().transpose() * d.y()).cwiseAbs().maxCoeff() / static_cast<double>(n);
    const double lam = lmax * (0.05 + 0.9 * (c % 10) / 10.0);
    const FitResult fit = fit_lagrangian(d, lam);
    CHECK(lagrangian_kkt_residual(d, fit.beta, lam) <= 1e-6);
    const VectorXd r = d.y() - d.x() * fit.beta;
    for (Index j = 0; j < p; ++j) {
      const double g = d.x().col(j).dot(r) / static_cast<double>(n);
      if (fit.beta(j) != 0.0) {
        CHECK(std::abs(g - lam * (fit.beta(j) > 0 ? 1.0 : -1.0)) <= 1e-6);
      } else {
        CHECK(std::abs(g) <= lam + 1e-6);
      }
    }
    const double quad = least_squares_objective(d, fit.beta);
    const FitResult con = fit_constrained(d, EstimatorSpec::lasso(fit.beta.lpNorm<1>()));
    CHECK(std::abs(con.objective - quad) < 1e-6);
  }
}

TEST_CASE("binding threshold") {
  VectorXd y(3);
  y << 1, -2, 3;
  CHECK(binding_threshold(Dataset(y, MatrixXd::Identity(3, 3))) == doctest::Approx(6.0));
  CHECK(binding_threshold(Dataset(VectorXd::Zero(3), MatrixXd::Identity(3, 3))) == 0.0);

  std::mt19937_64 rng(47);
  for (int c = 0; c < 10; ++c) {
    const Dataset d = make_data(4, 6, rng);
    const double t0 = binding_threshold(d);
    CHECK(std::abs(t0 - oracle::pinv_solve(d.x(), d.y()).lpNorm<1>()) < 1e-8);
  }
  for (int c = 0; c < 10; ++c) {
    const Dataset d = make_data(12, 4, rng);
    const double t0 = binding_threshold(d);
    const VectorXd ols = oracle::pinv_solve(d.x(), d.y());
    const double ls = least_squares_objective(d, ols);
    for (double f : {1.0, 1.5, 3.0}) {
      CHECK(std::abs(fit_constrained(d, EstimatorSpec::lasso(f * t0)).objective - ls) < 1e-8);
    }
  }
}
