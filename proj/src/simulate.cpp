#include "lassocv/simulate.hpp"

#include "lassocv/error.hpp"
#include "lassocv/risk.hpp"
#include "lassocv/selection.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace lassocv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum Stream : std::uint64_t { kCoefficients = 1, kDesign = 2, kNoise = 3, kFolds = 4 };

MatrixXd standard_normals(Index n, Index p, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  MatrixXd z(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) z(i, j) = normal(rng);
  }
  return z;
}

Index fold_b_n(Index n, Index k) {
  if (k < 2 || k > n) throw InputError("number of folds must lie in [2, n]");
  const Index c = n / k;
  return std::min(c, n - c);
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

double median_of(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

MatrixXd generate_design(Index n, Index p, double rho, std::uint64_t seed) {
  if (n < 1 || p < 1) throw InputError("design dimensions must be positive");
  if (!(rho >= 0.0 && rho < 1.0)) throw InputError("rho must lie in [0, 1)");
  MatrixXd z = standard_normals(n, p, seed);
  if (rho == 0.0) return z;
  // Z D^{1/2} with D^{1/2} = a I + c 11^T.
  const double a = std::sqrt(1.0 - rho);
  const double c = (std::sqrt(1.0 + static_cast<double>(p - 1) * rho) - a) / static_cast<double>(p);
  const VectorXd row_sums = z.rowwise().sum();
  z *= a;
  z.colwise() += c * row_sums;
  return z;
}

MatrixXd generate_design(Index n, const Covariance& d, std::uint64_t seed) {
  if (n < 1) throw InputError("n must be >= 1");
  return standard_normals(n, d.dim(), seed) * d.root();
}

VectorXd generate_coefficients(Index n, Index p, double alpha, std::uint64_t seed) {
  if (n < 1 || p < 1) throw InputError("n and p must be positive");
  if (!(alpha > 0.0)) throw InputError("alpha must be positive");
  SimCondition c;
  c.n = n;
  c.alpha = alpha;
  const Index s = c.sparsity();
  if (s > p) throw InputError("sparsity ceil(n^alpha) exceeds p");
  Rng rng(seed);
  std::vector<Index> pos(static_cast<std::size_t>(p));
  std::iota(pos.begin(), pos.end(), Index{0});
  std::shuffle(pos.begin(), pos.end(), rng);
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution coin(0.5);
  VectorXd beta = VectorXd::Zero(p);
  for (Index i = 0; i < s; ++i) {
    const double mag = expo(rng);
    beta(pos[static_cast<std::size_t>(i)]) = coin(rng) ? mag : -mag;
  }
  return beta;
}

VectorXd scale_to_snr(const VectorXd& beta, const MatrixXd& d, double snr) {
  if (beta.size() != d.rows() || d.rows() != d.cols()) {
    throw InputError("beta and D dimensions disagree");
  }
  if (!(snr > 0.0)) throw InputError("snr must be positive");
  const double raw = beta.dot(d * beta);
  if (!(raw > 0.0)) throw InputError("cannot scale a coefficient vector with zero signal");
  return beta * std::sqrt(snr / raw);
}

VectorXd generate_noise(Index n, NoiseKind kind, std::uint64_t seed) {
  if (n < 1) throw InputError("n must be >= 1");
  Rng rng(seed);
  VectorXd eps(n);
  if (kind == NoiseKind::Gaussian) {
    std::normal_distribution<double> normal;
    for (Index i = 0; i < n; ++i) eps(i) = normal(rng);
  } else {
    std::student_t_distribution<double> t3(3.0);
    const double scale = 1.0 / std::sqrt(3.0);
    for (Index i = 0; i < n; ++i) eps(i) = scale * t3(rng);
  }
  return eps;
}

std::uint64_t replication_seed(const SimCondition& cond, int rep) {
  return child_seed(child_seed(cond.seed, fnv1a64(cond.id())), static_cast<std::uint64_t>(rep));
}

SimDraw draw_replication(const SimCondition& cond, std::shared_ptr<const Covariance> d,
                         std::uint64_t rep_seed) {
  cond.validate();
  if (!d || d->dim() != cond.p) throw InputError("covariance does not match the condition");
  VectorXd beta = generate_coefficients(cond.n, cond.p, cond.alpha, child_seed(rep_seed, kCoefficients));
  beta = scale_to_snr(beta, d->matrix(), cond.snr);
  MatrixXd x = generate_design(cond.n, cond.p, cond.rho, child_seed(rep_seed, kDesign));
  VectorXd y = x * beta + generate_noise(cond.n, cond.noise, child_seed(rep_seed, kNoise));
  PopulationModel model(std::move(beta), std::move(d), 1.0, cond.noise);
  return SimDraw{std::move(model), Dataset(std::move(y), std::move(x))};
}

double simulation_a_n(const SimCondition& cond, const RunOptions& opts) {
  if (opts.a_n) {
    if (!(*opts.a_n > 0.0)) throw InputError("a_n must be positive");
    return *opts.a_n;
  }
  // Never let T shrink below [0, ||Y||^2 / n].
  return std::min(static_cast<double>(cond.n),
                  default_a_n(cond.n, cond.p, opts.q, fold_b_n(cond.n, opts.k),
                              default_m_n(cond.n)));
}

double simulation_t_n(const SimCondition& cond, const RunOptions& opts) {
  return rate_t_n(cond.p, opts.q, fold_b_n(cond.n, opts.k), default_m_n(cond.n));
}

namespace {

std::vector<ReplicationRecord> run_replication(const SimCondition& cond, const RunOptions& opts,
                                               const std::shared_ptr<const Covariance>& d,
                                               int rep) {
  std::vector<ReplicationRecord> out;
  out.reserve(opts.selectors.size());
  for (Selector s : opts.selectors) {
    ReplicationRecord r;
    r.condition = cond;
    r.rep = rep;
    r.selector = s;
    out.push_back(std::move(r));
  }
  auto fail_all = [&](const std::string& msg) {
    for (auto& r : out) {
      r.t_hat = r.risk_ratio = r.excess_risk = r.wall_time_ms = kNaN;
      r.error = msg;
    }
  };

  try {
    const std::uint64_t seed = replication_seed(cond, rep);
    const SimDraw draw = draw_replication(cond, d, seed);
    const double t_n = simulation_t_n(cond, opts);
    const VectorXd oracle = oracle_coefficients(draw.model, t_n, opts.solver);
    const double oracle_risk = population_risk(oracle, draw.model);
    const SearchGrid grid =
        build_grid(compute_t_max(draw.data, simulation_a_n(cond, opts)), opts.grid_size);
    const PenaltyFamily family;

    std::vector<FitResult> path;
    double path_ms = 0.0;
    const bool need_path = std::any_of(opts.selectors.begin(), opts.selectors.end(),
                                       [](Selector s) { return s != Selector::SSR; });
    if (need_path) {
      const auto t0 = std::chrono::steady_clock::now();
      path = fit_path(draw.data, family, grid.points, opts.solver);
      path_ms = elapsed_ms(t0);
    }

    for (auto& r : out) {
      try {
        const auto t0 = std::chrono::steady_clock::now();
        SelectionResult sel;
        double extra_ms = path_ms;
        switch (r.selector) {
          case Selector::CV: {
            const FoldScheme folds = FoldScheme::random(cond.n, opts.k, child_seed(seed, kFolds));
            sel = select_cv(draw.data, family, folds, grid, opts.solver, &path);
            break;
          }
          case Selector::AIC:
            sel = select_aic(draw.data, family, grid, 1.0, opts.solver, opts.gic_unnormalized, &path);
            break;
          case Selector::BIC:
            sel = select_bic(draw.data, family, grid, 1.0, opts.solver, opts.gic_unnormalized, &path);
            break;
          case Selector::GCV:
            sel = select_gcv(draw.data, family, grid, opts.solver, &path);
            break;
          case Selector::SSR:
            sel = select_ssr(draw.data, opts.solver);
            extra_ms = 0.0;
            break;
        }
        const double risk = population_risk(sel.beta_hat, draw.model);
        r.t_hat = sel.t_hat;
        r.risk_ratio = risk / draw.model.sigma2();
        r.excess_risk = risk - oracle_risk;
        r.wall_time_ms = elapsed_ms(t0) + extra_ms;
      } catch (const std::exception& e) {
        r.t_hat = r.risk_ratio = r.excess_risk = r.wall_time_ms = kNaN;
        r.error = e.what();
      }
    }
  } catch (const std::exception& e) {
    fail_all(e.what());
  }
  return out;
}

}  // namespace

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& task) {
  const std::size_t w = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
  if (w <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
          next.store(count);
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

int workers_from_env(int fallback) {
  const char* v = std::getenv("LASSOCV_WORKERS");
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const long w = std::strtol(v, &end, 10);
  if (*end != '\0' || w < 1 || w > 1024) return fallback;
  return static_cast<int>(w);
}

std::vector<ReplicationRecord> run_conditions(const std::vector<SimCondition>& conds,
                                              const RunOptions& opts) {
  if (opts.selectors.empty()) throw InputError("no selectors requested");
  if (opts.grid_size < 2) throw InputError("grid size must be >= 2");
  opts.solver.validate();
  struct Task {
    std::size_t cond;
    int rep;
  };
  std::vector<Task> tasks;
  std::vector<std::shared_ptr<const Covariance>> covs;
  for (std::size_t c = 0; c < conds.size(); ++c) {
    conds[c].validate();
    fold_b_n(conds[c].n, opts.k);
    if (conds[c].p < 2) throw InputError("simulation conditions need p >= 2");
    covs.push_back(std::make_shared<const Covariance>(
        Covariance::equicorrelation(conds[c].p, conds[c].rho)));
    for (int r = 0; r < conds[c].replications; ++r) tasks.push_back({c, r});
  }
  std::vector<std::vector<ReplicationRecord>> results(tasks.size());
  parallel_for(tasks.size(), opts.workers, [&](std::size_t i) {
    const Task& t = tasks[i];
    results[i] = run_replication(conds[t.cond], opts, covs[t.cond], t.rep);
  });
  std::vector<ReplicationRecord> out;
  out.reserve(tasks.size() * opts.selectors.size());
  for (auto& r : results) {
    for (auto& rec : r) out.push_back(std::move(rec));
  }
  return out;
}

std::vector<ReplicationRecord> run_condition(const SimCondition& cond, const RunOptions& opts) {
  return run_conditions({cond}, opts);
}

Index ConsistencyOptions::p_of(Index n) const {
  if (p_constant) return *p_constant;
  return static_cast<Index>(std::llround(p_multiplier * static_cast<double>(n)));
}

void ConsistencyOptions::validate() const {
  if (n_list.empty()) throw InputError("n_list is empty");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) throw InputError("n_list must be strictly increasing");
  }
  if (p_constant && *p_constant < 2) throw InputError("p must be >= 2");
  if (!p_constant && !(p_multiplier > 0.0)) throw InputError("p multiplier must be positive");
  if (!(q >= 1.0)) throw InputError("q must be >= 1 (or infinite)");
  if (m_n && !(*m_n > 0.0)) throw InputError("m_n must be positive");
  if (reps < 1) throw InputError("reps must be >= 1");
  if (!(delta > 0.0)) throw InputError("delta must be positive");
  if (grid_size < 2) throw InputError("grid size must be >= 2");
  solver.validate();
  for (Index n : n_list) {
    fold_b_n(n, k);
    SimCondition c;
    c.n = n;
    c.p = p_of(n);
    c.rho = rho;
    c.alpha = alpha;
    c.snr = snr;
    c.noise = noise;
    c.replications = reps;
    c.seed = seed;
    c.validate();
    if (c.p < 2) throw InputError("p(n) must be >= 2");
  }
}

std::vector<ConsistencyRow> consistency_experiment(const ConsistencyOptions& opts) {
  opts.validate();
  const std::size_t m = opts.n_list.size();
  std::vector<ConsistencyRow> rows(m);
  std::vector<SimCondition> conds(m);
  std::vector<std::shared_ptr<const Covariance>> covs(m);
  for (std::size_t i = 0; i < m; ++i) {
    SimCondition& c = conds[i];
    c.n = opts.n_list[i];
    c.p = opts.p_of(c.n);
    c.rho = opts.rho;
    c.alpha = opts.alpha;
    c.snr = opts.snr;
    c.noise = opts.noise;
    c.replications = opts.reps;
    c.seed = opts.seed;
    ConsistencyRow& row = rows[i];
    row.n = c.n;
    row.p = c.p;
    row.b_n = fold_b_n(c.n, opts.k);
    const double m_n = opts.m_n ? *opts.m_n : default_m_n(c.n);
    row.a_n = default_a_n(c.n, c.p, opts.q, row.b_n, m_n);
    row.t_n = rate_t_n(c.p, opts.q, row.b_n, m_n);
    row.excess.assign(static_cast<std::size_t>(opts.reps), kNaN);
    covs[i] = std::make_shared<const Covariance>(Covariance::equicorrelation(c.p, c.rho));
  }

  const std::size_t reps = static_cast<std::size_t>(opts.reps);
  parallel_for(m * reps, opts.workers, [&](std::size_t task) {
    const std::size_t i = task / reps;
    const int rep = static_cast<int>(task % reps);
    ConsistencyRow& row = rows[i];
    try {
      const std::uint64_t seed = replication_seed(conds[i], rep);
      const SimDraw draw = draw_replication(conds[i], covs[i], seed);
      const VectorXd oracle = oracle_coefficients(draw.model, row.t_n, opts.solver);
      const SearchGrid grid = build_grid(compute_t_max(draw.data, row.a_n), opts.grid_size);
      const FoldScheme folds = FoldScheme::random(row.n, opts.k, child_seed(seed, kFolds));
      const SelectionResult sel = select_cv(draw.data, PenaltyFamily{}, folds, grid, opts.solver);
      row.excess[static_cast<std::size_t>(rep)] =
          excess_risk_against(sel.beta_hat, oracle, draw.model).excess_risk;
    } catch (const std::exception&) {
      // Left as NaN and counted below.
    }
  });

  for (auto& row : rows) {
    int exceed = 0, ok = 0;
    for (double e : row.excess) {
      if (std::isnan(e)) {
        ++row.failures;
        continue;
      }
      ++ok;
      if (e > opts.delta) ++exceed;
    }
    row.median_excess = median_of(row.excess);
    row.exceed_fraction = ok > 0 ? static_cast<double>(exceed) / ok : kNaN;
  }
  return rows;
}

}  // namespace lassocv
