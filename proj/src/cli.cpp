#include "lassocv/cli.hpp"

#include "lassocv/diagnostics.hpp"
#include "lassocv/error.hpp"
#include "lassocv/report.hpp"
#include "lassocv/selection.hpp"
#include "lassocv/simulate.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace lassocv {

namespace fs = std::filesystem;

namespace {

double parse_q(const std::string& s) {
  if (s == "inf" || s == "infinity" || s == "Inf") return kInfinity;
  char* end = nullptr;
  const double q = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || !(q >= 1.0)) {
    throw InputError("--q must be a number >= 1 or 'inf', got '" + s + "'");
  }
  return q;
}

// "2n", "1.5n", "n" -> multiplier; "300" -> constant.
void parse_p_rule(const std::string& rule, ConsistencyOptions& o) {
  if (rule.empty()) throw InputError("--p-rule is empty");
  char* end = nullptr;
  if (rule.back() == 'n') {
    const std::string head = rule.substr(0, rule.size() - 1);
    const double c = head.empty() ? 1.0 : std::strtod(head.c_str(), &end);
    if ((!head.empty() && *end != '\0') || !(c > 0.0)) {
      throw InputError("--p-rule must look like '2n' or a constant, got '" + rule + "'");
    }
    o.p_multiplier = c;
    o.p_constant.reset();
    return;
  }
  const long long v = std::strtoll(rule.c_str(), &end, 10);
  if (*end != '\0' || v < 2) throw InputError("--p-rule constant must be an integer >= 2");
  o.p_constant = static_cast<Index>(v);
}

std::optional<double> parse_m_rule(const std::string& rule) {
  if (rule == "loglog") return std::nullopt;
  char* end = nullptr;
  const double m = std::strtod(rule.c_str(), &end);
  if (rule.empty() || *end != '\0' || !(m > 0.0)) {
    throw InputError("--m-rule must be 'loglog' or a positive number");
  }
  return m;
}

int resolve_workers(int flag) {
  if (flag > 0) return flag;
  return workers_from_env(1);
}

// Response in the first column, header row with column names.
Dataset read_dataset_csv(const fs::path& path, std::vector<std::string>& names) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read data file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  auto split = [](const std::string& l) {
    std::vector<std::string> out;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      out.push_back(cell);
    }
    return out;
  };
  names = split(line);
  if (names.size() < 2) throw InputError(path.string() + ": need a response and at least one predictor");
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != names.size()) {
      throw InputError(path.string() + ": line " + std::to_string(lineno) + " has " +
                       std::to_string(cells.size()) + " fields, expected " +
                       std::to_string(names.size()));
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || *end != '\0') {
        throw InputError(path.string() + ": line " + std::to_string(lineno) + ": bad number '" + c + "'");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path.string() + ": no data rows");
  const Index n = static_cast<Index>(rows.size());
  const Index p = static_cast<Index>(names.size()) - 1;
  VectorXd y(n);
  MatrixXd x(n, p);
  for (Index i = 0; i < n; ++i) {
    y(i) = rows[static_cast<std::size_t>(i)][0];
    for (Index j = 0; j < p; ++j) x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j + 1)];
  }
  return Dataset(std::move(y), std::move(x));
}

PopulationModel demo_model(Index p, double rho, double alpha, double snr, NoiseKind noise,
                           std::uint64_t seed) {
  auto cov = std::make_shared<const Covariance>(Covariance::equicorrelation(p, rho));
  VectorXd beta = generate_coefficients(100, p, alpha, child_seed(seed, 1));
  beta = scale_to_snr(beta, cov->matrix(), snr);
  return PopulationModel(std::move(beta), std::move(cov), 1.0, noise);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lasso tuning-parameter selection experiments", "lassocv"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run a grid of simulation conditions");
  std::string sim_config, sim_out;
  int sim_workers = 0;
  std::optional<std::uint64_t> sim_seed;
  bool sim_gic_unnorm = false;
  sim->add_option("--config", sim_config, "Config file (JSON or key=value)")->required();
  sim->add_option("--out", sim_out, "Output directory")->required();
  sim->add_option("--workers", sim_workers, "Worker threads (default: LASSOCV_WORKERS or 1)")
      ->check(CLI::NonNegativeNumber);
  sim->add_option("--seed", sim_seed, "Override the config's master seed");
  sim->add_flag("--gic-unnormalized", sim_gic_unnorm, "Use c_n sigma^2 df without the 1/n");

  // consistency
  auto* con = app.add_subcommand("consistency", "Excess-risk consistency experiment");
  ConsistencyOptions co;
  std::string con_q = "2", con_p_rule = "2n", con_m_rule = "loglog", con_noise = "gaussian",
              con_out;
  std::vector<Index> con_n_list;
  int con_workers = 0;
  con->add_option("--k", co.k, "Number of folds")->capture_default_str();
  con->add_option("--q", con_q, "q (number >= 1 or inf)")->capture_default_str();
  con->add_option("--n-list", con_n_list, "Increasing sample sizes")->delimiter(',');
  con->add_option("--p-rule", con_p_rule, "p as a multiple of n ('2n') or a constant")
      ->capture_default_str();
  con->add_option("--m-rule", con_m_rule, "'loglog' or a constant m_n")->capture_default_str();
  con->add_option("--reps", co.reps, "Replications per n")->capture_default_str();
  con->add_option("--rho", co.rho, "Design equicorrelation")->capture_default_str();
  con->add_option("--alpha", co.alpha, "Sparsity exponent")->capture_default_str();
  con->add_option("--snr", co.snr, "Signal-to-noise ratio")->capture_default_str();
  con->add_option("--noise", con_noise, "gaussian or t3")->capture_default_str();
  con->add_option("--delta", co.delta, "Exceedance threshold")->capture_default_str();
  con->add_option("--grid-size", co.grid_size, "Grid points on [0, t_max]")->capture_default_str();
  con->add_option("--out", con_out, "Directory for consistency.csv");
  con->add_option("--seed", co.seed, "Master seed")->capture_default_str();
  con->add_option("--workers", con_workers, "Worker threads")->check(CLI::NonNegativeNumber);

  // select
  auto* sel = app.add_subcommand("select", "Select t on a CSV dataset");
  std::string sel_data, sel_name = "CV", sel_q = "2";
  Index sel_k = 10, sel_grid = 100;
  std::uint64_t sel_seed = 1;
  std::optional<double> sel_a_n, sel_sigma2;
  bool sel_gic_unnorm = false;
  sel->add_option("--data", sel_data, "CSV with header; first column is the response")->required();
  sel->add_option("--selector", sel_name, "CV, AIC, BIC, GCV or SSR")->capture_default_str();
  sel->add_option("--k", sel_k, "Number of folds")->capture_default_str();
  sel->add_option("--grid-size", sel_grid, "Grid points on [0, t_max]")->capture_default_str();
  sel->add_option("--q", sel_q, "q for the default a_n")->capture_default_str();
  sel->add_option("--a-n", sel_a_n, "a_n in t_max = ||Y||^2/a_n (default min(n, rate))");
  sel->add_option("--sigma2", sel_sigma2, "Noise variance for AIC/BIC (default: SSR estimate)");
  sel->add_option("--seed", sel_seed, "Fold seed")->capture_default_str();
  sel->add_flag("--gic-unnormalized", sel_gic_unnorm, "Use c_n sigma^2 df without the 1/n");

  // diagnose
  auto* dia = app.add_subcommand("diagnose", "Monte Carlo checks of the concentration and tail events");
  std::string dia_check, dia_noise = "gaussian", dia_q = "2";
  Index dia_p = 20, dia_n = 100, dia_k = 10;
  double dia_rho = 0.2, dia_alpha = 0.1, dia_snr = 5.0, dia_kappa = 1.0, dia_kappa1 = 1.0;
  std::optional<double> dia_f;
  int dia_reps = 0, dia_workers = 0;
  std::uint64_t dia_seed = 1;
  std::vector<Index> dia_sizes{25, 50, 100, 200, 400};
  std::vector<Index> dia_n_list{200, 400, 800};
  dia->add_option("--check", dia_check, "concentration, tails, noise or bound")
      ->required()
      ->check(CLI::IsMember({"concentration", "tails", "noise", "bound"}));
  dia->add_option("--p", dia_p, "Dimension")->capture_default_str();
  dia->add_option("--n", dia_n, "Sample size (noise check)")->capture_default_str();
  dia->add_option("--k", dia_k, "Folds behind b_n (tails, bound)")->capture_default_str();
  dia->add_option("--q", dia_q, "q (number >= 1 or inf)")->capture_default_str();
  dia->add_option("--rho", dia_rho, "Design equicorrelation")->capture_default_str();
  dia->add_option("--alpha", dia_alpha, "Sparsity exponent")->capture_default_str();
  dia->add_option("--snr", dia_snr, "Signal-to-noise ratio")->capture_default_str();
  dia->add_option("--noise", dia_noise, "gaussian or t3")->capture_default_str();
  dia->add_option("--kappa", dia_kappa, "Noise psi_2 bound")->capture_default_str();
  dia->add_option("--kappa1", dia_kappa1, "E[eps^2] (noise check)")->capture_default_str();
  dia->add_option("--f", dia_f, "F (default 9 beta*^T D beta*)");
  dia->add_option("--sizes", dia_sizes, "Sample sizes (concentration)")->delimiter(',');
  dia->add_option("--n-list", dia_n_list, "Sample sizes (tails, bound)")->delimiter(',');
  dia->add_option("--reps", dia_reps, "Replications (default depends on the check)");
  dia->add_option("--seed", dia_seed, "Master seed")->capture_default_str();
  dia->add_option("--workers", dia_workers, "Worker threads")->check(CLI::NonNegativeNumber);

  // bound
  auto* bnd = app.add_subcommand("bound", "Evaluate Omega_1 and Omega_2");
  BoundInputs bi;
  std::string bnd_q = "2";
  std::uint64_t bnd_seed = 0;
  bnd->add_option("--n", bi.n, "n")->required();
  bnd->add_option("--p", bi.p, "p (ignored when --log-p is given)");
  bnd->add_option("--log-p", bi.log_p, "Use this value for log p");
  bnd->add_option("--q", bnd_q, "q (number >= 1 or inf)")->capture_default_str();
  bnd->add_option("--cn", bi.c_n, "Validation-set size c_n")->required();
  bnd->add_option("--an", bi.a_n, "a_n")->required();
  bnd->add_option("--tn", bi.t_n, "t_n")->required();
  bnd->add_option("--f", bi.f_const, "F")->capture_default_str();
  bnd->add_option("--kappa", bi.kappa, "kappa")->capture_default_str();
  bnd->add_option("--seed", bnd_seed, "Accepted for uniformity; unused");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (sim->parsed()) {
      ExperimentPlan plan = load_config(sim_config);
      if (sim_seed) set_plan_seed(plan, *sim_seed);
      plan.options.gic_unnormalized = sim_gic_unnorm;
      plan.options.workers = resolve_workers(sim_workers);
      const std::string started = utc_timestamp();
      const auto records = run_conditions(plan.conditions, plan.options);
      write_outputs(records, plan, sim_out, started);
      std::size_t failed = 0;
      for (const auto& r : records) failed += !r.ok();
      out << "conditions=" << plan.conditions.size() << " records=" << records.size()
          << " failed=" << failed << " digest=" << plan.digest() << " out=" << sim_out << '\n';
      return 0;
    }

    if (con->parsed()) {
      co.q = parse_q(con_q);
      parse_p_rule(con_p_rule, co);
      co.m_n = parse_m_rule(con_m_rule);
      co.noise = parse_noise_kind(con_noise);
      if (!con_n_list.empty()) co.n_list = con_n_list;
      co.workers = resolve_workers(con_workers);
      const auto rows = consistency_experiment(co);
      std::ostringstream csv;
      csv << "n,p,b_n,a_n,t_n,median_excess,exceed_fraction,failures\n";
      for (const auto& r : rows) {
        csv << r.n << ',' << r.p << ',' << r.b_n << ',' << format_real17(r.a_n) << ','
            << format_real17(r.t_n) << ',' << format_real17(r.median_excess) << ','
            << format_real17(r.exceed_fraction) << ',' << r.failures << '\n';
      }
      out << csv.str();
      if (!con_out.empty()) {
        std::error_code ec;
        fs::create_directories(con_out, ec);
        if (ec) throw IoError("cannot create " + con_out + ": " + ec.message());
        const fs::path path = fs::path(con_out) / "consistency.csv";
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + path.string() + " for writing");
        f << csv.str();
        if (!f) throw IoError("failed writing " + path.string());
      }
      return 0;
    }

    if (sel->parsed()) {
      std::vector<std::string> names;
      const Dataset data = read_dataset_csv(sel_data, names);
      const Selector which = parse_selector(sel_name);
      SelectionResult r;
      if (which == Selector::SSR) {
        r = select_ssr(data);
      } else {
        const Index n = data.n();
        double a_n = 0.0;
        if (sel_a_n) {
          a_n = *sel_a_n;
        } else {
          if (sel_k < 2 || sel_k > n) throw InputError("--k must lie in [2, n]");
          const Index c = n / sel_k;
          a_n = std::min(static_cast<double>(n),
                         default_a_n(n, std::max<Index>(data.p(), 2), parse_q(sel_q),
                                     std::min(c, n - c), default_m_n(n)));
        }
        const SearchGrid grid = build_grid(compute_t_max(data, a_n), sel_grid);
        const PenaltyFamily fam;
        if (which == Selector::CV) {
          r = select_cv(data, fam, FoldScheme::random(n, sel_k, sel_seed), grid);
        } else if (which == Selector::GCV) {
          r = select_gcv(data, fam, grid);
        } else {
          const double s2 = sel_sigma2 ? *sel_sigma2 : [&] {
            const auto ssr = select_ssr(data);
            const double s = ssr.criterion.back();
            return s * s;
          }();
          r = which == Selector::AIC ? select_aic(data, fam, grid, s2, {}, sel_gic_unnorm)
                                     : select_bic(data, fam, grid, s2, {}, sel_gic_unnorm);
        }
      }
      out << "selector=" << to_string(r.selector) << '\n'
          << "t_hat=" << format_real(r.t_hat) << '\n'
          << "converged=" << (r.converged ? "true" : "false") << '\n';
      for (Index j = 0; j < r.beta_hat.size(); ++j) {
        if (r.beta_hat(j) != 0.0) {
          out << "beta[" << names[static_cast<std::size_t>(j + 1)] << "]="
              << format_real(r.beta_hat(j)) << '\n';
        }
      }
      return 0;
    }

    if (dia->parsed()) {
      const int workers = resolve_workers(dia_workers);
      const double q = parse_q(dia_q);
      if (dia_check == "noise") {
        const auto rep = noise_tail_check(parse_noise_kind(dia_noise), dia_n,
                                          dia_reps > 0 ? dia_reps : 10000, dia_seed, dia_kappa,
                                          dia_kappa1, workers);
        out << "x,threshold,frequency,bound,allowance\n";
        for (const auto& r : rep.rows) {
          out << format_real(r.x) << ',' << format_real(r.threshold) << ','
              << format_real(r.frequency) << ',' << format_real(r.bound) << ','
              << format_real(r.allowance) << '\n';
        }
        out << "passed=" << (rep.passed ? "true" : "false") << '\n';
        return 0;
      }
      if (dia_check == "bound") {
        out << "n,p,c_n,a_n,t_n,m_n,omega1,omega1_times_m_n_squared,omega2\n";
        for (Index n : dia_n_list) {
          if (dia_k < 2 || dia_k > n) throw InputError("--k must lie in [2, n]");
          const Index p = std::max<Index>(2, 2 * n);
          const Index c = n / dia_k;
          const double m = default_m_n(n);
          BoundInputs in;
          in.n = n;
          in.p = p;
          in.q = q;
          in.c_n = c;
          in.a_n = default_a_n(n, p, q, std::min(c, n - c), m);
          in.t_n = rate_t_n(p, q, std::min(c, n - c), m);
          in.f_const = dia_f ? *dia_f : 1.0;
          in.kappa = dia_kappa;
          const BoundTerms t = theorem1_terms(in);
          out << n << ',' << p << ',' << c << ',' << format_real(in.a_n) << ','
              << format_real(in.t_n) << ',' << format_real(m) << ',' << format_real(t.omega1)
              << ',' << format_real(t.omega1 * m * m) << ',' << format_real(t.omega2) << '\n';
        }
        return 0;
      }
      const PopulationModel model =
          demo_model(dia_p, dia_rho, dia_alpha, dia_snr, parse_noise_kind(dia_noise), dia_seed);
      if (dia_check == "concentration") {
        const auto fit = concentration_rate(model, dia_sizes, dia_reps > 0 ? dia_reps : 500,
                                            dia_seed, workers);
        out << "size,mean_error\n";
        for (std::size_t i = 0; i < fit.sizes.size(); ++i) {
          out << fit.sizes[i] << ',' << format_real(fit.mean_error[i]) << '\n';
        }
        out << "slope=" << format_real(fit.slope) << '\n';
        return 0;
      }
      TailOptions to;
      const Index p = dia_p, k = dia_k;
      to.a_n_rule = [p, q, k](Index n) {
        const Index c = n / k;
        return default_a_n(n, p, q, std::min(c, n - c), default_m_n(n));
      };
      to.t_n_rule = [p, q, k](Index n) {
        const Index c = n / k;
        return rate_t_n(p, q, std::min(c, n - c), default_m_n(n));
      };
      for (Index n : dia_n_list) {
        if (k < 2 || k > n) throw InputError("--k must lie in [2, n]");
      }
      to.n_list = dia_n_list;
      to.reps = dia_reps > 0 ? dia_reps : 1000;
      to.seed = dia_seed;
      to.f_const = dia_f ? *dia_f : f_proxy(model);
      to.kappa = dia_kappa;
      to.workers = workers;
      const auto rows = tail_events(model, to);
      out << "n,a_n,t_n,p_d_complement,p_e_complement,bound,allowance,within\n";
      for (const auto& r : rows) {
        out << r.n << ',' << format_real(r.a_n) << ',' << format_real(r.t_n) << ','
            << format_real(r.p_d_complement) << ',' << format_real(r.p_e_complement) << ','
            << format_real(r.bound) << ',' << format_real(r.allowance) << ','
            << (r.within() ? "true" : "false") << '\n';
      }
      return 0;
    }

    if (bnd->parsed()) {
      bi.q = parse_q(bnd_q);
      const BoundTerms t = theorem1_terms(bi);
      out << "omega1=" << format_real(t.omega1) << '\n' << "omega2=" << format_real(t.omega2) << '\n';
      return 0;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const SelectionError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  }
  err << app.help();
  return 1;
}

}  // namespace lassocv
