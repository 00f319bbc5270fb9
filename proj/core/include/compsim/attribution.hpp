#pragma once

// Monthly cross-sectional regression of returns on cluster indicators.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "compsim/cluster.hpp"
#include "compsim/dates.hpp"
#include "compsim/returns.hpp"

namespace compsim {

using MonthReturns = std::map<std::string, double>;

struct MonthlyReturnPanel {
  std::vector<YearMonth> months;               // ascending
  std::map<YearMonth, MonthReturns> values;    // month -> id -> R

  const MonthReturns& at(YearMonth m) const;
  bool operator==(const MonthlyReturnPanel&) const = default;
};

/// prod(1 + r) - 1
double compound_return(std::span<const double> daily);

/// Companies with fewer than `min_days` observations in a month are left
/// out of that month. Throws ArgumentError on an empty span and DataError
/// when no series has data inside it.
MonthlyReturnPanel monthly_cumulative_returns(const ReturnsMap& returns, const DateRange& span,
                                              std::size_t min_days = 15);

struct AttributionOptions {
  double winsorize = 0.0;  // clip each month at this quantile and its complement; 0 = off
};

struct AttributionFit {
  YearMonth month{};
  double intercept = 0.0;
  std::map<int, double> cluster_returns;  // every present cluster; the reference one is 0
  int reference_cluster = 0;
  std::vector<std::string> ids;
  Eigen::VectorXd residuals;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  std::size_t n_obs = 0;
  std::size_t n_clusters_present = 0;
  bool zero_variance = false;  // all returns equal; r2 set to 0
};

/// OLS of R on an intercept plus one dummy per present cluster except the
/// smallest present index, which is the reference. Companies missing from
/// either side are ignored. Throws ComputeError when fewer than N + 2
/// companies remain or the design is rank deficient.
AttributionFit cross_sectional_fit(const MonthReturns& month_returns, const ClusterAssignment& assignment,
                                   YearMonth month = {}, const AttributionOptions& options = {});

struct SkippedMonth {
  YearMonth month;
  std::string reason;
};

struct AttributionReport {
  double avg_r2 = 0.0;
  double avg_adj_r2 = 0.0;
  std::vector<AttributionFit> per_month;
  std::vector<SkippedMonth> skipped;
  std::size_t n_clusters = 0;
  YearMonth first{}, last{};
};

/// Mean monthly r2. Months are fitted in parallel and reduced in month order.
AttributionReport attribution_metric(const MonthlyReturnPanel& panel, const ClusterAssignment& assignment,
                                     const AttributionOptions& options = {});

/// CSV month,r2,adj_r2,n_obs,n_clusters_present, then a "mean" row.
/// Skipped months follow as '#' comment lines.
void write_attribution_report(std::ostream& out, const AttributionReport& report);

} // namespace compsim
