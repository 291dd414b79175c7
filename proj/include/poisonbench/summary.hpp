#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace poisonbench {

/// One data row of a metrics CSV.
struct MetricsRow {
  std::string run_id;
  std::uint64_t seed = 0;
  std::int64_t checkpoint_step = 0;
  std::int64_t episodes = 0;
  std::int64_t loss = 0;
  std::int64_t cost = 0;
  std::int64_t nonopt = 0;
  double cum_return = 0.0;
  std::optional<double> proxy_regret;
};

/// Throws std::runtime_error with "<source>:<line>: ..." on malformed input.
std::vector<MetricsRow> read_metrics_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<MetricsRow> read_metrics_csv_file(const std::string& path);

/**
 * value(T) / value(T / 10) on a series of (x, value) points sorted by x,
 * where T is the last x. The value at T / 10 is linearly interpolated when
 * no point sits exactly there. Returns nullopt when T / 10 is below the
 * first x or the denominator is zero.
 */
std::optional<double> growth_ratio(const std::vector<double>& x, const std::vector<double>& value);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation; 0 for a single value
};
MeanStd mean_std(const std::vector<double>& values);
double median(std::vector<double> values);

/// Aggregate over the seeds that share a run_id.
struct SummaryGroup {
  std::string run_id;
  std::size_t seeds = 0;
  std::int64_t episodes = 0;  ///< final episode count of the first seed
  MeanStd loss;
  MeanStd cost;
  MeanStd nonopt;
  MeanStd cum_return;
  std::optional<MeanStd> proxy_regret;
  std::optional<double> loss_growth;  ///< medians over seeds
  std::optional<double> cost_growth;
  std::optional<double> nonopt_growth;
  std::optional<double> regret_growth;
};

/// Groups rows by run_id (order of first appearance), then by seed.
std::vector<SummaryGroup> summarize(const std::vector<MetricsRow>& rows);

/// Tab-free, comma-separated table with a header row.
void write_summary(const std::vector<SummaryGroup>& groups, std::ostream& out);

}  // namespace poisonbench
