#include "compsim/attribution.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <ostream>
#include <set>
#include <thread>

#include "compsim/csv.hpp"
#include "compsim/error.hpp"

namespace compsim {

const MonthReturns& MonthlyReturnPanel::at(YearMonth m) const {
  auto it = values.find(m);
  if (it == values.end()) throw ArgumentError("panel has no month " + format_year_month(m));
  return it->second;
}

double compound_return(std::span<const double> daily) {
  double growth = 1.0;
  for (double r : daily) growth *= 1.0 + r;
  return growth - 1.0;
}

MonthlyReturnPanel monthly_cumulative_returns(const ReturnsMap& returns, const DateRange& span,
                                              std::size_t min_days) {
  if (span.last < span.first) throw ArgumentError("monthly returns: empty date span");
  MonthlyReturnPanel panel;
  bool any = false;
  for (const auto& [id, series] : returns) {
    std::map<YearMonth, std::vector<double>> by_month;
    for (const auto& obs : series.observations()) {
      if (span.contains(obs.date)) by_month[year_month_of(obs.date)].push_back(obs.value);
    }
    for (const auto& [month, daily] : by_month) {
      any = true;
      if (daily.size() < min_days) continue;
      const double R = compound_return(daily);
      if (!std::isfinite(R) || R <= -1.0) throw DataError("monthly return for " + id + " is not > -1");
      panel.values[month][id] = R;
    }
  }
  if (!any) throw DataError("monthly returns: no observations inside the span");
  for (const auto& [month, _] : panel.values) panel.months.push_back(month);
  return panel;
}

namespace {

void winsorize(std::vector<double>& y, double q) {
  if (q <= 0.0) return;
  if (q >= 0.5) throw ArgumentError("winsorize quantile must be below 0.5");
  auto sorted = y;
  std::sort(sorted.begin(), sorted.end());
  const auto last = static_cast<double>(sorted.size() - 1);
  auto quantile = [&](double p) {
    const double pos = p * last;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  const double lo = quantile(q);
  const double hi = quantile(1.0 - q);
  for (double& v : y) v = std::clamp(v, lo, hi);
}

} // namespace

AttributionFit cross_sectional_fit(const MonthReturns& month_returns, const ClusterAssignment& assignment,
                                   YearMonth month, const AttributionOptions& options) {
  AttributionFit fit;
  fit.month = month;
  std::vector<double> y;
  std::vector<int> cluster;
  const auto cluster_of = assignment.as_map();
  for (const auto& [id, R] : month_returns) {
    auto it = cluster_of.find(id);
    if (it == cluster_of.end()) continue;
    fit.ids.push_back(id);
    y.push_back(R);
    cluster.push_back(it->second);
  }
  const std::size_t n = y.size();
  if (n < assignment.n_clusters + 2) {
    throw ComputeError("only " + std::to_string(n) + " companies for " + std::to_string(assignment.n_clusters) +
                       " clusters");
  }
  winsorize(y, options.winsorize);

  const std::set<int> present(cluster.begin(), cluster.end());
  fit.n_obs = n;
  fit.n_clusters_present = present.size();
  fit.reference_cluster = *present.begin();
  std::map<int, Eigen::Index> column;
  for (int c : present) {
    if (c != fit.reference_cluster) column.emplace(c, static_cast<Eigen::Index>(column.size() + 1));
  }
  const auto p = static_cast<Eigen::Index>(present.size());
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), p);
  Eigen::VectorXd Y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    X(row, 0) = 1.0;
    if (auto it = column.find(cluster[i]); it != column.end()) X(row, it->second) = 1.0;
    Y[row] = y[i];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < p) {
    throw ComputeError("design matrix rank " + std::to_string(qr.rank()) + " < " + std::to_string(p));
  }
  const Eigen::VectorXd beta = qr.solve(Y);
  fit.intercept = beta[0];
  for (int c : present) fit.cluster_returns[c] = c == fit.reference_cluster ? 0.0 : beta[column.at(c)];
  fit.residuals = Y - X * beta;

  const double mean = Y.mean();
  const double ss_tot = (Y.array() - mean).square().sum();
  const double ss_res = fit.residuals.squaredNorm();
  if (ss_tot == 0.0) {
    fit.zero_variance = true;
    fit.r2 = 0.0;
  } else if (p == 1) {
    fit.r2 = 0.0;
  } else {
    fit.r2 = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
  }
  const double dof = static_cast<double>(n) - static_cast<double>(p);
  fit.adj_r2 = 1.0 - (1.0 - fit.r2) * (static_cast<double>(n) - 1.0) / dof;
  return fit;
}

AttributionReport attribution_metric(const MonthlyReturnPanel& panel, const ClusterAssignment& assignment,
                                     const AttributionOptions& options) {
  const auto& months = panel.months;
  std::vector<std::optional<AttributionFit>> fits(months.size());
  std::vector<std::string> errors(months.size());
  std::vector<std::exception_ptr> failures(months.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < months.size(); i = next++) {
      try {
        fits[i] = cross_sectional_fit(panel.at(months[i]), assignment, months[i], options);
      } catch (const ComputeError& e) {
        errors[i] = e.what();
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const auto n_threads = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
  if (n_threads <= 1 || months.size() < 2) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(n_threads, months.size()); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  AttributionReport report;
  report.n_clusters = assignment.n_clusters;
  double sum = 0.0, sum_adj = 0.0;
  for (std::size_t i = 0; i < months.size(); ++i) {
    if (fits[i]) {
      sum += fits[i]->r2;
      sum_adj += fits[i]->adj_r2;
      report.per_month.push_back(std::move(*fits[i]));
    } else {
      report.skipped.push_back({months[i], errors[i]});
    }
  }
  if (report.per_month.empty()) throw ComputeError("attribution: no month could be fitted");
  const auto count = static_cast<double>(report.per_month.size());
  report.avg_r2 = sum / count;
  report.avg_adj_r2 = sum_adj / count;
  report.first = report.per_month.front().month;
  report.last = report.per_month.back().month;
  return report;
}

void write_attribution_report(std::ostream& out, const AttributionReport& report) {
  csv::write_row(out, {"month", "r2", "adj_r2", "n_obs", "n_clusters_present"});
  std::size_t obs = 0;
  for (const auto& f : report.per_month) {
    obs += f.n_obs;
    csv::write_row(out, {format_year_month(f.month), csv::format_double(f.r2), csv::format_double(f.adj_r2),
                         std::to_string(f.n_obs), std::to_string(f.n_clusters_present)});
  }
  csv::write_row(out, {"mean", csv::format_double(report.avg_r2), csv::format_double(report.avg_adj_r2),
                       std::to_string(obs), std::to_string(report.n_clusters)});
  for (const auto& s : report.skipped) out << "# skipped " << format_year_month(s.month) << ": " << s.reason << '\n';
}

} // namespace compsim
