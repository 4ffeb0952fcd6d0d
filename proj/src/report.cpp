#include "lassocv/report.hpp"

#include "lassocv/error.hpp"
#include "lassocv/selection.hpp"
#include "lassocv/svg.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace lassocv {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{"n",         "p",     "rho",  "alpha", "snr",
                                          "noise",     "replications", "selectors", "k",
                                          "grid_size", "seed",  "q",    "a_n"};
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

json scalar_token(const std::string& tok) {
  std::string t = tok;
  if (t.size() >= 2 && (t.front() == '"' || t.front() == '\'') && t.back() == t.front()) {
    return t.substr(1, t.size() - 2);
  }
  {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec == std::errc() && ptr == t.data() + t.size()) return v;
  }
  {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec == std::errc() && ptr == t.data() + t.size()) return v;
  }
  {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec == std::errc() && ptr == t.data() + t.size()) return v;
  }
  return t;
}

json parse_key_value(std::string_view text) {
  json obj = json::object();
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw InputError("config line " + std::to_string(lineno) + ": empty key");
    if (obj.contains(key)) throw InputError("config key '" + key + "' given twice");
    bool bracketed = false;
    if (!value.empty() && value.front() == '[') {
      if (value.back() != ']') {
        throw InputError("config key '" + key + "': unterminated list");
      }
      value = trim(std::string_view(value).substr(1, value.size() - 2));
      bracketed = true;
    }
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
      const auto comma = value.find(',', start);
      parts.push_back(trim(std::string_view(value).substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!bracketed && parts.size() == 1) {
      if (parts[0].empty()) throw InputError("config key '" + key + "' has an empty value");
      obj[key] = scalar_token(parts[0]);
      continue;
    }
    json arr = json::array();
    for (const auto& p : parts) {
      if (p.empty()) throw InputError("config key '" + key + "' has an empty list element");
      arr.push_back(scalar_token(p));
    }
    obj[key] = std::move(arr);
  }
  return obj;
}

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw InputError("config key '" + key + "' must be a number");
  return v.get<double>();
}

std::int64_t as_integer(const json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15) {
      return static_cast<std::int64_t>(d);
    }
  }
  throw InputError("config key '" + key + "' must be an integer");
}

std::vector<json> as_list(const json& v, const std::string& key) {
  if (v.is_array()) {
    if (v.empty()) throw InputError("config key '" + key + "' must not be an empty list");
    return std::vector<json>(v.begin(), v.end());
  }
  return {v};
}

std::vector<double> number_list(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return {fallback};
  std::vector<double> out;
  for (const auto& e : as_list(obj.at(key), key)) out.push_back(as_number(e, key));
  return out;
}

std::string hex16(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentPlan resolve(const json& obj) {
  if (!obj.is_object()) throw InputError("config must be an object of key/value pairs");
  for (const auto& [key, _] : obj.items()) {
    if (!known_keys().count(key)) throw InputError("unknown config key '" + key + "'");
  }
  json r = json::object();

  const std::int64_t n = obj.contains("n") ? as_integer(obj.at("n"), "n") : 100;
  if (n < 2) throw InputError("config key 'n' must be >= 2");
  r["n"] = n;

  std::vector<std::int64_t> ps;
  if (obj.contains("p")) {
    for (const auto& e : as_list(obj.at("p"), "p")) ps.push_back(as_integer(e, "p"));
  } else {
    ps.push_back(75);
  }
  for (auto p : ps) {
    if (p < 2) throw InputError("config key 'p' must be >= 2");
  }
  r["p"] = ps;
  const std::vector<double> rhos = number_list(obj, "rho", 0.2);
  const std::vector<double> alphas = number_list(obj, "alpha", 0.1);
  const std::vector<double> snrs = number_list(obj, "snr", 5.0);
  r["rho"] = rhos;
  r["alpha"] = alphas;
  r["snr"] = snrs;

  NoiseKind noise = NoiseKind::Gaussian;
  if (obj.contains("noise")) {
    if (!obj.at("noise").is_string()) throw InputError("config key 'noise' must be a string");
    noise = parse_noise_kind(obj.at("noise").get<std::string>());
  }
  r["noise"] = std::string(to_string(noise));

  const std::int64_t reps =
      obj.contains("replications") ? as_integer(obj.at("replications"), "replications") : 100;
  if (reps < 1 || reps > 1000000) {
    throw InputError("config key 'replications' must lie in [1, 1000000]");
  }
  r["replications"] = reps;

  RunOptions opts;
  if (obj.contains("selectors")) {
    opts.selectors.clear();
    for (const auto& e : as_list(obj.at("selectors"), "selectors")) {
      if (!e.is_string()) throw InputError("config key 'selectors' must hold names");
      const Selector s = parse_selector(e.get<std::string>());
      if (std::find(opts.selectors.begin(), opts.selectors.end(), s) != opts.selectors.end()) {
        throw InputError("config key 'selectors' lists " + std::string(to_string(s)) + " twice");
      }
      opts.selectors.push_back(s);
    }
  }
  json sel = json::array();
  for (Selector s : opts.selectors) sel.push_back(std::string(to_string(s)));
  r["selectors"] = sel;

  const std::int64_t k = obj.contains("k") ? as_integer(obj.at("k"), "k") : 10;
  if (k < 2 || k > n) throw InputError("config key 'k' must lie in [2, n]");
  opts.k = k;
  r["k"] = k;

  const std::int64_t grid = obj.contains("grid_size") ? as_integer(obj.at("grid_size"), "grid_size") : 100;
  if (grid < 2) throw InputError("config key 'grid_size' must be >= 2");
  opts.grid_size = grid;
  r["grid_size"] = grid;

  std::uint64_t seed = 1;
  if (obj.contains("seed")) {
    const json& s = obj.at("seed");
    if (s.is_number_unsigned()) {
      seed = s.get<std::uint64_t>();
    } else {
      const std::int64_t v = as_integer(s, "seed");
      if (v < 0) throw InputError("config key 'seed' must be >= 0");
      seed = static_cast<std::uint64_t>(v);
    }
  }
  r["seed"] = seed;

  if (obj.contains("q")) {
    const json& q = obj.at("q");
    if (q.is_string() && (q.get<std::string>() == "inf" || q.get<std::string>() == "infinity")) {
      opts.q = kInfinity;
    } else {
      opts.q = as_number(q, "q");
      if (!(opts.q >= 1.0)) throw InputError("config key 'q' must be >= 1 or \"inf\"");
    }
  }
  if (std::isinf(opts.q)) {
    r["q"] = "inf";
  } else {
    r["q"] = opts.q;
  }

  if (obj.contains("a_n")) {
    const json& a = obj.at("a_n");
    if (a.is_string() && a.get<std::string>() == "auto") {
      opts.a_n.reset();
    } else {
      opts.a_n = as_number(a, "a_n");
      if (!(*opts.a_n > 0.0) || !std::isfinite(*opts.a_n)) {
        throw InputError("config key 'a_n' must be a positive number or \"auto\"");
      }
    }
  }
  if (opts.a_n) {
    r["a_n"] = *opts.a_n;
  } else {
    r["a_n"] = "auto";
  }

  ExperimentPlan plan;
  plan.options = std::move(opts);
  plan.seed = seed;
  for (auto p : ps) {
    for (double rho : rhos) {
      for (double alpha : alphas) {
        for (double snr : snrs) {
          SimCondition c;
          c.n = n;
          c.p = p;
          c.rho = rho;
          c.alpha = alpha;
          c.snr = snr;
          c.noise = noise;
          c.replications = static_cast<int>(reps);
          c.seed = seed;
          try {
            c.validate();
          } catch (const InputError& e) {
            throw InputError(std::string("config: ") + e.what());
          }
          plan.conditions.push_back(c);
        }
      }
    }
  }
  plan.resolved_json = r.dump();
  return plan;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double parse_double(const std::string& s, const fs::path& path) {
  if (s == "nan" || s == "-nan" || s == "NaN") return std::nan("");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw InputError(path.string() + ": bad number '" + s + "'");
  return v;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

double quantile7(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace

std::string ExperimentPlan::digest() const { return hex16(fnv1a64(resolved_json)); }

ExperimentPlan parse_config(std::string_view text) {
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '{') {
    json obj;
    try {
      obj = json::parse(t);
    } catch (const json::parse_error& e) {
      throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
    return resolve(obj);
  }
  return resolve(parse_key_value(t));
}

ExperimentPlan load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void set_plan_seed(ExperimentPlan& plan, std::uint64_t seed) {
  plan.seed = seed;
  for (auto& c : plan.conditions) c.seed = seed;
  json r = json::parse(plan.resolved_json);
  r["seed"] = seed;
  plan.resolved_json = r.dump();
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) return format_real17(x);
  return std::string(buf, ptr);
}

std::string format_real17(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_records(const std::vector<ReplicationRecord>& records, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << kRecordsHeader << '\n';
  for (const auto& r : records) {
    const SimCondition& c = r.condition;
    out << csv_field(c.id()) << ',' << c.n << ',' << c.p << ',' << format_real17(c.rho) << ','
        << format_real17(c.alpha) << ',' << format_real17(c.snr) << ',' << to_string(c.noise)
        << ',' << r.rep << ',' << to_string(r.selector) << ',' << format_real17(r.t_hat) << ','
        << format_real17(r.risk_ratio) << ',' << format_real17(r.excess_risk) << ','
        << format_real17(r.wall_time_ms) << '\n';
  }
  close_out(out, path);
}

std::vector<CsvRecord> read_records(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kRecordsHeader) {
    throw InputError(path.string() + ": unexpected records header");
  }
  std::vector<CsvRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 13) throw InputError(path.string() + ": expected 13 fields per row");
    CsvRecord r;
    r.condition_id = f[0];
    r.n = static_cast<Index>(parse_double(f[1], path));
    r.p = static_cast<Index>(parse_double(f[2], path));
    r.rho = parse_double(f[3], path);
    r.alpha = parse_double(f[4], path);
    r.snr = parse_double(f[5], path);
    r.noise = f[6];
    r.rep = static_cast<int>(parse_double(f[7], path));
    r.selector = f[8];
    r.t_hat = parse_double(f[9], path);
    r.risk_ratio = parse_double(f[10], path);
    r.excess_risk = parse_double(f[11], path);
    r.wall_time_ms = parse_double(f[12], path);
    out.push_back(std::move(r));
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const RunManifest& m, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << "tool_version=" << m.tool_version << '\n'
      << "config_digest=" << m.config_digest << '\n'
      << "master_seed=" << m.master_seed << '\n'
      << "started_at=" << m.started_at << '\n'
      << "finished_at=" << m.finished_at << '\n'
      << "condition_count=" << m.condition_count << '\n'
      << "record_count=" << m.record_count << '\n';
  close_out(out, path);
}

RunManifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  RunManifest m;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    if (key == "tool_version") m.tool_version = val;
    else if (key == "config_digest") m.config_digest = val;
    else if (key == "master_seed") m.master_seed = std::stoull(val);
    else if (key == "started_at") m.started_at = val;
    else if (key == "finished_at") m.finished_at = val;
    else if (key == "condition_count") m.condition_count = std::stoull(val);
    else if (key == "record_count") m.record_count = std::stoull(val);
  }
  return m;
}

std::vector<SummaryRow> summarize(const std::vector<ReplicationRecord>& records) {
  if (records.empty()) throw InputError("cannot summarize an empty record set");
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, int>> groups;
  for (const auto& r : records) {
    auto& g = groups[{r.condition.id(), std::string(to_string(r.selector))}];
    if (r.ok() && std::isfinite(r.risk_ratio)) {
      g.first.push_back(r.risk_ratio);
    } else {
      ++g.second;
    }
  }
  std::vector<SummaryRow> rows;
  for (auto& [key, g] : groups) {
    SummaryRow row;
    row.condition_id = key.first;
    row.selector = key.second;
    row.failures = g.second;
    std::vector<double>& v = g.first;
    row.count = static_cast<int>(v.size());
    if (v.empty()) {
      row.mean = row.median = row.q25 = row.q75 = row.min = row.max = std::nan("");
    } else {
      double sum = 0.0;
      for (double x : v) sum += x;
      row.mean = sum / static_cast<double>(v.size());
      std::sort(v.begin(), v.end());
      row.median = quantile7(v, 0.5);
      row.q25 = quantile7(v, 0.25);
      row.q75 = quantile7(v, 0.75);
      row.min = v.front();
      row.max = v.back();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_summary(const std::vector<SummaryRow>& rows, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << "condition_id,selector,count,failures,mean,median,q25,q75,min,max\n";
  for (const auto& r : rows) {
    out << csv_field(r.condition_id) << ',' << r.selector << ',' << r.count << ',' << r.failures
        << ',' << format_real17(r.mean) << ',' << format_real17(r.median) << ','
        << format_real17(r.q25) << ',' << format_real17(r.q75) << ',' << format_real17(r.min)
        << ',' << format_real17(r.max) << '\n';
  }
  close_out(out, path);
}

std::string condition_svg(const std::vector<ReplicationRecord>& records,
                          const std::string& condition_id) {
  std::vector<ViolinSeries> series;
  for (const auto& r : records) {
    if (r.condition.id() != condition_id) continue;
    const std::string label(to_string(r.selector));
    auto it = std::find_if(series.begin(), series.end(),
                           [&](const ViolinSeries& s) { return s.label == label; });
    if (it == series.end()) {
      series.push_back({label, {}});
      it = series.end() - 1;
    }
    if (r.ok()) it->values.push_back(r.risk_ratio);
  }
  if (series.empty()) throw InputError("no records for condition " + condition_id);
  return violin_svg(condition_id, series);
}

void write_outputs(const std::vector<ReplicationRecord>& records, const ExperimentPlan& plan,
                   const fs::path& dir, const std::string& started_at) {
  std::error_code ec;
  fs::create_directories(dir / "figures", ec);
  if (ec) throw IoError("cannot create " + (dir / "figures").string() + ": " + ec.message());
  write_records(records, dir / "records.csv");
  if (!records.empty()) {
    write_summary(summarize(records), dir / "summary.csv");
    std::set<std::string> done;
    for (const auto& c : plan.conditions) {
      const std::string id = c.id();
      if (!done.insert(id).second) continue;
      const bool any = std::any_of(records.begin(), records.end(), [&](const ReplicationRecord& r) {
        return r.condition.id() == id && r.ok();
      });
      if (!any) continue;
      const fs::path svg = dir / "figures" / (id + ".svg");
      std::ofstream out = open_out(svg);
      out << condition_svg(records, id);
      close_out(out, svg);
    }
  }
  RunManifest m;
  m.config_digest = plan.digest();
  m.master_seed = plan.seed;
  m.started_at = started_at;
  m.finished_at = utc_timestamp();
  m.condition_count = plan.conditions.size();
  m.record_count = records.size();
  write_manifest(m, dir / "manifest.txt");
}

}  // namespace lassocv
