#include "poisonbench/summary.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string_view>

#include "poisonbench/harness.hpp"

namespace poisonbench {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_field(std::string_view text, const std::string& where, const char* column) {
  T value{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw std::runtime_error(where + ": bad " + column + " value '" + std::string(text) + "'");
  }
  return value;
}

constexpr std::string_view kHeader = "run_id,seed,checkpoint_step,episodes,loss,cost,nonopt_pulls,cum_return";

std::optional<MeanStd> optional_mean_std(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  return mean_std(values);
}

std::optional<double> optional_median(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  return median(values);
}

}  // namespace

std::vector<MetricsRow> read_metrics_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool with_regret = false;
  if (line == std::string(kHeader) + ",proxy_regret") {
    with_regret = true;
  } else if (line != kHeader) {
    throw std::runtime_error(source + ":1: unexpected header '" + line + "'");
  }
  const std::size_t columns = with_regret ? 9 : 8;

  std::vector<MetricsRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto f = split_fields(line);
    if (f.size() != columns) {
      throw std::runtime_error(where + ": expected " + std::to_string(columns) + " fields, got " +
                               std::to_string(f.size()));
    }
    MetricsRow row;
    row.run_id = std::string(f[0]);
    row.seed = parse_field<std::uint64_t>(f[1], where, "seed");
    row.checkpoint_step = parse_field<std::int64_t>(f[2], where, "checkpoint_step");
    row.episodes = parse_field<std::int64_t>(f[3], where, "episodes");
    row.loss = parse_field<std::int64_t>(f[4], where, "loss");
    row.cost = parse_field<std::int64_t>(f[5], where, "cost");
    row.nonopt = parse_field<std::int64_t>(f[6], where, "nonopt_pulls");
    row.cum_return = parse_field<double>(f[7], where, "cum_return");
    if (with_regret) row.proxy_regret = parse_field<double>(f[8], where, "proxy_regret");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<MetricsRow> read_metrics_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  return read_metrics_csv(in, path);
}

std::optional<double> growth_ratio(const std::vector<double>& x, const std::vector<double>& value) {
  if (x.empty() || x.size() != value.size()) return std::nullopt;
  const double top = x.back();
  const double tenth = top / 10.0;
  if (tenth < x.front()) return std::nullopt;
  const auto upper = std::lower_bound(x.begin(), x.end(), tenth);
  const auto i = static_cast<std::size_t>(upper - x.begin());
  double at_tenth;
  if (*upper == tenth || i == 0) {
    at_tenth = value[i];
  } else {
    const double w = (tenth - x[i - 1]) / (x[i] - x[i - 1]);
    at_tenth = value[i - 1] + w * (value[i] - value[i - 1]);
  }
  if (at_tenth == 0.0) return std::nullopt;
  return value.back() / at_tenth;
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<SummaryGroup> summarize(const std::vector<MetricsRow>& rows) {
  std::vector<std::string> order;
  std::map<std::string, std::map<std::uint64_t, std::vector<const MetricsRow*>>> grouped;
  for (const auto& row : rows) {
    auto [it, inserted] = grouped.try_emplace(row.run_id);
    if (inserted) order.push_back(row.run_id);
    it->second[row.seed].push_back(&row);
  }

  std::vector<SummaryGroup> out;
  for (const auto& id : order) {
    SummaryGroup g;
    g.run_id = id;
    std::vector<double> loss, cost, nonopt, ret, regret;
    std::vector<double> loss_g, cost_g, nonopt_g, regret_g;
    for (auto& [seed, series] : grouped.at(id)) {
      std::stable_sort(series.begin(), series.end(),
                       [](const MetricsRow* a, const MetricsRow* b) { return a->episodes < b->episodes; });
      const MetricsRow& last = *series.back();
      if (g.seeds == 0) g.episodes = last.episodes;
      ++g.seeds;
      loss.push_back(static_cast<double>(last.loss));
      cost.push_back(static_cast<double>(last.cost));
      nonopt.push_back(static_cast<double>(last.nonopt));
      ret.push_back(last.cum_return);
      if (last.proxy_regret) regret.push_back(*last.proxy_regret);

      std::vector<double> x, yl, yc, yn, yr;
      bool all_regret = true;
      for (const MetricsRow* r : series) {
        x.push_back(static_cast<double>(r->episodes));
        yl.push_back(static_cast<double>(r->loss));
        yc.push_back(static_cast<double>(r->cost));
        yn.push_back(static_cast<double>(r->nonopt));
        if (r->proxy_regret) yr.push_back(*r->proxy_regret);
        else all_regret = false;
      }
      if (auto v = growth_ratio(x, yl)) loss_g.push_back(*v);
      if (auto v = growth_ratio(x, yc)) cost_g.push_back(*v);
      if (auto v = growth_ratio(x, yn)) nonopt_g.push_back(*v);
      if (all_regret) {
        if (auto v = growth_ratio(x, yr)) regret_g.push_back(*v);
      }
    }
    g.loss = mean_std(loss);
    g.cost = mean_std(cost);
    g.nonopt = mean_std(nonopt);
    g.cum_return = mean_std(ret);
    g.proxy_regret = optional_mean_std(regret);
    g.loss_growth = optional_median(loss_g);
    g.cost_growth = optional_median(cost_g);
    g.nonopt_growth = optional_median(nonopt_g);
    g.regret_growth = optional_median(regret_g);
    out.push_back(std::move(g));
  }
  return out;
}

void write_summary(const std::vector<SummaryGroup>& groups, std::ostream& out) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  out << "run_id,seeds,episodes,loss_mean,loss_std,cost_mean,cost_std,nonopt_mean,nonopt_std,"
         "return_mean,return_std,regret_mean,regret_std,loss_growth,cost_growth,nonopt_growth,regret_growth\n";
  for (const auto& g : groups) {
    out << g.run_id << ',' << g.seeds << ',' << g.episodes << ',' << format_double(g.loss.mean) << ','
        << format_double(g.loss.std) << ',' << format_double(g.cost.mean) << ',' << format_double(g.cost.std) << ','
        << format_double(g.nonopt.mean) << ',' << format_double(g.nonopt.std) << ','
        << format_double(g.cum_return.mean) << ',' << format_double(g.cum_return.std) << ','
        << (g.proxy_regret ? format_double(g.proxy_regret->mean) : "") << ','
        << (g.proxy_regret ? format_double(g.proxy_regret->std) : "") << ',' << opt(g.loss_growth) << ','
        << opt(g.cost_growth) << ',' << opt(g.nonopt_growth) << ',' << opt(g.regret_growth) << '\n';
  }
}

}  // namespace poisonbench
