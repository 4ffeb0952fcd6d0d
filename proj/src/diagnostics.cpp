#include "lassocv/diagnostics.hpp"

#include "lassocv/error.hpp"
#include "lassocv/risk.hpp"
#include "lassocv/selection.hpp"
#include "lassocv/simulate.hpp"

#include <cmath>

namespace lassocv {

namespace {

double log_power(const BoundInputs& in) {
  const double lp = in.log_p ? *in.log_p : std::log(static_cast<double>(in.p));
  const double expo = std::isinf(in.q) ? 1.0 : 1.0 + 2.0 / in.q;
  return std::pow(lp, expo);
}

double binomial_allowance(double bound, int reps) {
  return bound + 3.0 * std::sqrt(bound * (1.0 - bound) / static_cast<double>(reps));
}

double slope_of(const std::vector<Index>& sizes, const std::vector<double>& err) {
  const std::size_t m = sizes.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += std::log(static_cast<double>(sizes[i]));
    my += std::log(err[i]);
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = std::log(static_cast<double>(sizes[i])) - mx;
    sxy += dx * (std::log(err[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace

void BoundInputs::validate() const {
  if (n < 2) throw InputError("n must be >= 2");
  if (!log_p && p < 2) throw InputError("p must be >= 2");
  if (log_p && !(*log_p > 0.0)) throw InputError("log p must be positive");
  if (!(q >= 1.0)) throw InputError("q must be >= 1 (or infinite)");
  if (c_n <= 0 || c_n >= n) throw InputError("c_n must satisfy 0 < c_n < n");
  if (!(a_n > 0.0)) throw InputError("a_n must be positive");
  if (!(t_n >= 0.0) || !std::isfinite(t_n)) throw InputError("t_n must be finite and >= 0");
  if (!(f_const >= 0.0)) throw InputError("F must be >= 0");
  if (!(kappa >= 0.0)) throw InputError("kappa must be >= 0");
}

BoundTerms theorem1_terms(const BoundInputs& in) {
  in.validate();
  const double n = static_cast<double>(in.n);
  const double c = static_cast<double>(in.c_n);
  const double lp = log_power(in);
  const double bracket = 1.0 + 2.0 * (n * (in.f_const + 4.0 * in.kappa * in.kappa) / in.a_n);
  BoundTerms out;
  out.omega1 = bracket * bracket * std::sqrt(lp) *
               (1.0 / std::sqrt(n) + 1.0 / std::sqrt(c) + 1.0 / std::sqrt(n - c));
  out.omega2 = (1.0 + in.t_n) * (1.0 + in.t_n) * std::sqrt(lp / n);
  return out;
}

double f_proxy(const PopulationModel& model) { return 9.0 * model.snr(); }

Dataset sample_model(const PopulationModel& model, Index n, Rng& rng) {
  if (n < 1) throw InputError("sample size must be >= 1");
  const Index p = model.p();
  std::normal_distribution<double> normal;
  MatrixXd z(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) z(i, j) = normal(rng);
  }
  MatrixXd x = z * model.covariance().root();
  VectorXd eps(n);
  const double sd = std::sqrt(model.sigma2());
  if (model.noise_kind() == NoiseKind::Gaussian) {
    for (Index i = 0; i < n; ++i) eps(i) = sd * normal(rng);
  } else {
    std::student_t_distribution<double> t3(3.0);
    for (Index i = 0; i < n; ++i) eps(i) = sd * t3(rng) / std::sqrt(3.0);
  }
  VectorXd y = x * model.beta_star() + eps;
  return Dataset(std::move(y), std::move(x));
}

ConcentrationFit concentration_rate(const ZSampler& sampler, const MatrixXd& population_moment,
                                    const std::vector<Index>& v_sizes, int reps,
                                    std::uint64_t seed, int workers) {
  if (reps < 10) throw InputError("concentration_rate needs reps >= 10");
  if (v_sizes.size() < 2) throw InputError("need at least two sample sizes");
  for (std::size_t i = 0; i < v_sizes.size(); ++i) {
    if (v_sizes[i] < 1) throw InputError("sample sizes must be >= 1");
    if (i > 0 && v_sizes[i] <= v_sizes[i - 1]) {
      throw InputError("sample sizes must be strictly increasing");
    }
  }
  const std::size_t m = v_sizes.size();
  const auto r = static_cast<std::size_t>(reps);
  std::vector<double> err(m * r);
  parallel_for(m * r, workers, [&](std::size_t task) {
    const std::size_t i = task / r;
    Rng rng(child_seed(child_seed(seed, i), task % r));
    const MatrixXd z = sampler(v_sizes[i], rng);
    if (z.rows() != v_sizes[i] || z.cols() != population_moment.cols()) {
      throw InputError("sampler returned a matrix of the wrong shape");
    }
    const MatrixXd sigma_hat = (z.transpose() * z) / static_cast<double>(z.rows());
    err[task] = max_abs_entry(sigma_hat - population_moment);
  });
  ConcentrationFit fit;
  fit.sizes = v_sizes;
  fit.mean_error.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < r; ++k) s += err[i * r + k];
    fit.mean_error[i] = s / static_cast<double>(r);
  }
  bool positive = true;
  for (double e : fit.mean_error) positive = positive && e > 0.0;
  fit.slope = positive ? slope_of(fit.sizes, fit.mean_error) : 0.0;
  return fit;
}

ConcentrationFit concentration_rate(const PopulationModel& model, const std::vector<Index>& v_sizes,
                                    int reps, std::uint64_t seed, int workers) {
  const MatrixXd sigma = population_second_moment(model).matrix();
  ZSampler sampler = [&](Index rows, Rng& rng) {
    const Dataset d = sample_model(model, rows, rng);
    MatrixXd z(rows, model.p() + 1);
    z.col(0) = d.y();
    z.rightCols(model.p()) = d.x();
    return z;
  };
  return concentration_rate(sampler, sigma, v_sizes, reps, seed, workers);
}

std::vector<TailRow> tail_events(const PopulationModel& model, const TailOptions& opts) {
  if (!opts.a_n_rule || !opts.t_n_rule) throw InputError("a_n and t_n rules are required");
  if (opts.n_list.empty()) throw InputError("n_list is empty");
  if (opts.reps < 1) throw InputError("reps must be >= 1");
  if (!(opts.f_const >= 0.0) || !(opts.kappa >= 0.0)) throw InputError("F and kappa must be >= 0");
  const std::size_t m = opts.n_list.size();
  std::vector<TailRow> rows(m);
  for (std::size_t i = 0; i < m; ++i) {
    TailRow& row = rows[i];
    row.n = opts.n_list[i];
    if (row.n < 1) throw InputError("n must be >= 1");
    row.a_n = opts.a_n_rule(row.n);
    row.t_n = opts.t_n_rule(row.n);
    if (!(row.a_n > 0.0)) throw InputError("a_n must be positive");
    if (!(row.t_n >= 0.0)) throw InputError("t_n must be >= 0");
    row.bound = std::exp(-static_cast<double>(row.n) / 8.0);
    row.allowance = binomial_allowance(row.bound, opts.reps);
  }
  const auto r = static_cast<std::size_t>(opts.reps);
  std::vector<char> d_fail(m * r), e_fail(m * r);
  parallel_for(m * r, opts.workers, [&](std::size_t task) {
    const std::size_t i = task / r;
    const TailRow& row = rows[i];
    Rng rng(child_seed(child_seed(opts.seed, static_cast<std::uint64_t>(row.n)), task % r));
    const Dataset d = sample_model(model, row.n, rng);
    const double t_max = compute_t_max(d, row.a_n);
    const double n = static_cast<double>(row.n);
    const double upper = 2.0 * n * (opts.f_const + 4.0 * opts.kappa * opts.kappa) / row.a_n;
    d_fail[task] = t_max >= upper;
    e_fail[task] = t_max < row.t_n;
  });
  for (std::size_t i = 0; i < m; ++i) {
    int dc = 0, ec = 0;
    for (std::size_t k = 0; k < r; ++k) {
      dc += d_fail[i * r + k];
      ec += e_fail[i * r + k];
    }
    rows[i].p_d_complement = static_cast<double>(dc) / static_cast<double>(r);
    rows[i].p_e_complement = static_cast<double>(ec) / static_cast<double>(r);
  }
  return rows;
}

NoiseTailReport noise_tail_check(NoiseKind kind, Index n, int reps, std::uint64_t seed,
                                 double kappa, double kappa1, int workers) {
  if (kind == NoiseKind::ScaledT3) {
    throw InputError(
        "noise tail check requires sub-Gaussian noise; t(3) has no finite psi_2 norm, so the "
        "condition ||eps||_psi2 <= kappa fails");
  }
  if (n < 1) throw InputError("n must be >= 1");
  if (reps < 1) throw InputError("reps must be >= 1");
  if (!(kappa > 0.0) || !(kappa1 > 0.0)) throw InputError("kappa and kappa1 must be positive");
  const auto r = static_cast<std::size_t>(reps);
  std::vector<double> dev(r);
  parallel_for(r, workers, [&](std::size_t k) {
    const VectorXd eps = generate_noise(n, kind, child_seed(seed, k));
    dev[k] = std::abs(eps.squaredNorm() - kappa1 * static_cast<double>(n));
  });
  NoiseTailReport rep;
  const double k2 = kappa * kappa;
  for (double x : {1.0, 2.0, 4.0}) {
    NoiseTailRow row;
    row.x = x;
    row.threshold = std::sqrt(8.0 * static_cast<double>(n) * k2 * k2 * x) + k2 * x;
    int hits = 0;
    for (double d : dev) hits += d >= row.threshold;
    row.frequency = static_cast<double>(hits) / static_cast<double>(r);
    row.bound = std::exp(-x);
    row.allowance = binomial_allowance(row.bound, reps);
    rep.passed = rep.passed && row.frequency <= row.allowance;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace lassocv
