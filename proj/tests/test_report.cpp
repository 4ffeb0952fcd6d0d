#include "doctest.h"

#include "lassocv/error.hpp"
#include "lassocv/report.hpp"
#include "lassocv/svg.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <sstream>

using namespace lassocv;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lassocv_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<ReplicationRecord> fake_records() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(1.0, 3.0);
  std::vector<ReplicationRecord> out;
  for (double alpha : {0.1, 0.5}) {
    SimCondition c;
    c.alpha = alpha;
    for (int rep = 0; rep < 7; ++rep) {
      for (Selector s : {Selector::CV, Selector::GCV}) {
        ReplicationRecord r;
        r.condition = c;
        r.rep = rep;
        r.selector = s;
        r.t_hat = u(rng) / 3.0;
        r.risk_ratio = u(rng) + (s == Selector::GCV ? 0.1 : 0.0);
        r.excess_risk = u(rng) - 2.0;
        r.wall_time_ms = 0.1 * rep;
        out.push_back(r);
      }
    }
  }
  out[3].error = "solver exploded";
  out[3].t_hat = out[3].risk_ratio = out[3].excess_risk = std::nan("");
  return out;
}

std::vector<double> polyline_points(const std::string& svg) {
  const std::regex re("id=\"mean-line\"[^>]*points=\"([^\"]*)\"");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, re));
  std::vector<double> v;
  std::string s = m[1];
  for (char& c : s) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(s);
  double x;
  while (in >> x) v.push_back(x);
  return v;
}

}  // namespace

TEST_CASE("records header is frozen") {
  CHECK(kRecordsHeader ==
        "condition_id,n,p,rho,alpha,snr,noise,rep,selector,t_hat,risk_ratio,excess_risk,"
        "wall_time_ms");
}

TEST_CASE("config cross-product and defaults") {
  const ExperimentPlan plan = parse_config(
      "# grid\n"
      "p = [75, 350, 1000]\n"
      "alpha = 0.1, 0.33, 0.5\n"
      "rho = 0.2\n"
      "replications = 10\n");
  CHECK(plan.conditions.size() == 9);
  CHECK(plan.conditions[0].p == 75);
  CHECK(plan.conditions[1].alpha == 0.33);
  CHECK(plan.conditions[3].p == 350);
  for (const auto& c : plan.conditions) {
    CHECK(c.n == 100);
    CHECK(c.replications == 10);
    CHECK(c.snr == 5.0);
    CHECK(c.noise == NoiseKind::Gaussian);
  }
  CHECK(plan.options.k == 10);
  CHECK(plan.options.grid_size == 100);
  CHECK(plan.options.selectors.size() == 5);
  CHECK(!plan.options.a_n);
  CHECK(plan.resolved_json.find("\"n\":100") != std::string::npos);
  CHECK(plan.resolved_json.find("\"k\":10") != std::string::npos);

  const ExperimentPlan empty = parse_config("");
  CHECK(empty.conditions.size() == 1);
  CHECK(empty.conditions[0].p == 75);
}

TEST_CASE("config formats agree and digests ignore key order") {
  const ExperimentPlan kv = parse_config("p = 350\nseed = 9\nselectors = CV, SSR\nnoise = t3\n");
  const ExperimentPlan js =
      parse_config(R"({"selectors": ["CV", "SSR"], "noise": "t3", "seed": 9, "p": 350})");
  const ExperimentPlan js2 =
      parse_config(R"({"p": 350, "seed": 9, "noise": "t3", "selectors": ["CV", "SSR"]})");
  CHECK(kv.digest() == js.digest());
  CHECK(js.digest() == js2.digest());
  CHECK(kv.digest().size() == 16);
  CHECK(kv.seed == 9);
  CHECK(kv.conditions[0].seed == 9);
  CHECK(kv.conditions[0].noise == NoiseKind::ScaledT3);
  CHECK(kv.options.selectors == std::vector<Selector>{Selector::CV, Selector::SSR});
  CHECK(parse_config("p = 351").digest() != kv.digest());

  ExperimentPlan reseeded = kv;
  set_plan_seed(reseeded, 10);
  CHECK(reseeded.seed == 10);
  CHECK(reseeded.conditions[0].seed == 10);
  CHECK(reseeded.digest() != kv.digest());
  CHECK(reseeded.digest() == parse_config("p = 350\nseed = 10\nselectors = CV, SSR\nnoise = t3\n").digest());

  const ExperimentPlan extra = parse_config("q = inf\na_n = 42\n");
  CHECK(std::isinf(extra.options.q));
  CHECK(*extra.options.a_n == 42.0);
}

TEST_CASE("config errors name the key") {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("rho = 1.2").find("rho") != std::string::npos);
  CHECK(message("colour = red").find("colour") != std::string::npos);
  CHECK(message("k = 1").find("'k'") != std::string::npos);
  CHECK(message("n = abc").find("'n'") != std::string::npos);
  CHECK(message("p = 1").find("'p'") != std::string::npos);
  CHECK(message("selectors = CV, CV").find("selectors") != std::string::npos);
  CHECK(message("just some words").find("line 1") != std::string::npos);
  CHECK(message("{\"n\": ").find("JSON") != std::string::npos);
  CHECK(message("alpha = 1\np = 50").find("sparsity") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/config.txt"), InputError);
}

TEST_CASE("number formatting") {
  CHECK(format_real(0.9) == "0.9");
  CHECK(format_real(std::nan("")) == "nan");
  CHECK(format_real17(0.1) == "0.10000000000000001");
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) / 7.0;
    CHECK(std::stod(format_real17(x)) == x);
    CHECK(std::stod(format_real(x)) == x);
  }
}

TEST_CASE("records round-trip") {
  const fs::path dir = scratch_dir("records");
  write_records({}, dir / "empty.csv");
  CHECK(slurp(dir / "empty.csv") == std::string(kRecordsHeader) + "\n");
  CHECK(read_records(dir / "empty.csv").empty());

  const auto recs = fake_records();
  write_records(recs, dir / "r.csv");
  const auto back = read_records(dir / "r.csv");
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back[i].condition_id == recs[i].condition.id());
    CHECK(back[i].selector == std::string(to_string(recs[i].selector)));
    CHECK(back[i].rep == recs[i].rep);
    CHECK(back[i].alpha == recs[i].condition.alpha);
    if (recs[i].ok()) {
      CHECK(back[i].risk_ratio == recs[i].risk_ratio);
      CHECK(back[i].t_hat == recs[i].t_hat);
      CHECK(back[i].excess_risk == recs[i].excess_risk);
    } else {
      CHECK(std::isnan(back[i].risk_ratio));
    }
    CHECK(back[i].wall_time_ms == recs[i].wall_time_ms);
  }
  std::ofstream(dir / "bad.csv") << "a,b\n";
  CHECK_THROWS_AS(read_records(dir / "bad.csv"), InputError);
  CHECK_THROWS_AS(write_records(recs, dir / "missing" / "x.csv"), IoError);
}

TEST_CASE("summary recomputed from the csv") {
  const auto recs = fake_records();
  const auto rows = summarize(recs);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::make_pair(rows[i - 1].condition_id, rows[i - 1].selector) <
          std::make_pair(rows[i].condition_id, rows[i].selector));
  }
  const fs::path dir = scratch_dir("summary");
  write_records(recs, dir / "r.csv");
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const auto& r : read_records(dir / "r.csv")) {
    if (!std::isnan(r.risk_ratio)) groups[{r.condition_id, r.selector}].push_back(r.risk_ratio);
  }
  int failures = 0;
  for (const auto& row : rows) {
    const auto& v = groups[{row.condition_id, row.selector}];
    double s = 0.0;
    for (double x : v) s += x;
    CHECK(std::abs(row.mean - s / v.size()) < 1e-12);
    CHECK(row.count == static_cast<int>(v.size()));
    CHECK(row.min <= row.q25);
    CHECK(row.q25 <= row.median);
    CHECK(row.median <= row.q75);
    CHECK(row.q75 <= row.max);
    failures += row.failures;
  }
  CHECK(failures == 1);
  // type-7 quantiles of 1..5
  std::vector<ReplicationRecord> simple;
  for (int i = 1; i <= 5; ++i) {
    ReplicationRecord r;
    r.risk_ratio = i;
    r.rep = i;
    simple.push_back(r);
  }
  const SummaryRow q = summarize(simple).front();
  CHECK(q.median == 3.0);
  CHECK(q.q25 == 2.0);
  CHECK(q.q75 == 4.0);
  CHECK(q.mean == 3.0);
  CHECK_THROWS_AS(summarize({}), InputError);
}

TEST_CASE("violin figures") {
  CHECK(silverman_bandwidth({2.0, 2.0, 2.0}) == 0.0);
  CHECK(silverman_bandwidth({1.0, 2.0, 3.0, 4.0}) > 0.0);
  const auto dens = gaussian_kde({0.0}, 1.0, {0.0});
  CHECK(dens[0] == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)));

  const std::string tick = violin_svg("flat", {{"CV", {2.0, 2.0, 2.0, 2.0}}});
  CHECK(tick.find("<line class=\"violin\"") != std::string::npos);
  CHECK(tick.find("<path class=\"violin\"") == std::string::npos);
  const auto pts = polyline_points(tick);
  REQUIRE(pts.size() == 2);
  // y of the mean equals y of the tick centre
  const std::regex tick_re("<line class=\"violin\" x1=\"[^\"]*\" y1=\"([^\"]*)\" x2=\"[^\"]*\" y2=\"([^\"]*)\"");
  std::smatch m;
  REQUIRE(std::regex_search(tick, m, tick_re));
  CHECK((std::stod(m[1]) + std::stod(m[2])) / 2.0 == doctest::Approx(pts[1]).epsilon(1e-6));

  const std::string two = violin_svg("two", {{"CV", {1.0, 1.1, 1.2, 1.3}}, {"GCV", {3.0, 3.2, 3.4}}});
  const auto p2 = polyline_points(two);
  REQUIRE(p2.size() == 4);
  CHECK(p2[2] > p2[0]);
  CHECK(p2[3] < p2[1] - 50.0);  // higher mean sits higher on the page
  CHECK(two == violin_svg("two", {{"CV", {1.0, 1.1, 1.2, 1.3}}, {"GCV", {3.0, 3.2, 3.4}}}));
  CHECK(std::count(two.begin(), two.end(), '\n') > 5);
  CHECK(violin_svg("a<b", {{"x&y", {1.0, 2.0}}}).find("a&lt;b") != std::string::npos);
  CHECK_THROWS_AS(violin_svg("none", {}), InputError);
}

TEST_CASE("output directory layout") {
  const auto recs = fake_records();
  ExperimentPlan plan = parse_config("alpha = 0.1, 0.5\nselectors = CV, GCV\nreplications = 7\n");
  const fs::path dir = scratch_dir("outputs");
  write_outputs(recs, plan, dir, "2026-01-01T00:00:00Z");
  CHECK(fs::exists(dir / "records.csv"));
  CHECK(fs::exists(dir / "summary.csv"));
  for (const auto& c : plan.conditions) CHECK(fs::exists(dir / "figures" / (c.id() + ".svg")));
  const RunManifest m = read_manifest(dir / "manifest.txt");
  CHECK(m.tool_version == std::string(kToolVersion));
  CHECK(m.config_digest == plan.digest());
  CHECK(m.master_seed == 1);
  CHECK(m.started_at == "2026-01-01T00:00:00Z");
  CHECK(m.condition_count == 2);
  CHECK(m.record_count == recs.size());
  CHECK(slurp(dir / "manifest.txt").find("config_digest=" + plan.digest()) != std::string::npos);
  CHECK(utc_timestamp().size() == 20);
}
