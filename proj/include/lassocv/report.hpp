#pragma once

#include "lassocv/simulate.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lassocv {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kRecordsHeader =
    "condition_id,n,p,rho,alpha,snr,noise,rep,selector,t_hat,risk_ratio,excess_risk,wall_time_ms";

// Resolved simulation plan with every default filled in.
struct ExperimentPlan {
  std::vector<SimCondition> conditions;  // cross-product, p outermost then rho, alpha, snr
  RunOptions options;
  std::uint64_t seed = 1;
  // Canonical JSON (sorted keys) of the resolved configuration.
  std::string resolved_json;

  // FNV-1a of resolved_json as 16 hex digits; independent of key order in the file.
  std::string digest() const;
};

// Recognized keys: n, p, rho, alpha, snr, noise, replications, selectors, k, grid_size, seed,
// q, a_n. Lists are allowed for p, rho, alpha, snr. The text is JSON when it starts with
// '{', otherwise lines of key = value ('#' starts a comment; lists as a,b,c or [a,b,c]).
ExperimentPlan parse_config(std::string_view text);
ExperimentPlan load_config(const std::filesystem::path& path);

// Overrides the master seed in the plan (and its conditions and digest).
void set_plan_seed(ExperimentPlan& plan, std::uint64_t seed);

// Shortest decimal that reads back to the same double.
std::string format_real(double x);
// %.17g
std::string format_real17(double x);

void write_records(const std::vector<ReplicationRecord>& records,
                   const std::filesystem::path& path);

struct CsvRecord {
  std::string condition_id;
  Index n = 0;
  Index p = 0;
  double rho = 0.0;
  double alpha = 0.0;
  double snr = 0.0;
  std::string noise;
  int rep = 0;
  std::string selector;
  double t_hat = 0.0;
  double risk_ratio = 0.0;
  double excess_risk = 0.0;
  double wall_time_ms = 0.0;
};
std::vector<CsvRecord> read_records(const std::filesystem::path& path);

struct RunManifest {
  std::string tool_version{kToolVersion};
  std::string config_digest;
  std::uint64_t master_seed = 0;
  std::string started_at;
  std::string finished_at;
  std::size_t condition_count = 0;
  std::size_t record_count = 0;
};
void write_manifest(const RunManifest& m, const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);
// UTC ISO-8601 timestamp of now.
std::string utc_timestamp();

struct SummaryRow {
  std::string condition_id;
  std::string selector;
  int count = 0;     // successful replications
  int failures = 0;
  double mean = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Per (condition, selector) statistics of risk_ratio, sorted by (condition_id, selector).
std::vector<SummaryRow> summarize(const std::vector<ReplicationRecord>& records);
void write_summary(const std::vector<SummaryRow>& rows, const std::filesystem::path& path);

// Violin figure for one condition; selectors in first-appearance order.
std::string condition_svg(const std::vector<ReplicationRecord>& records,
                          const std::string& condition_id);

// records.csv, summary.csv, figures/<id>.svg and manifest.txt under `dir`.
void write_outputs(const std::vector<ReplicationRecord>& records, const ExperimentPlan& plan,
                   const std::filesystem::path& dir, const std::string& started_at);

}  // namespace lassocv
