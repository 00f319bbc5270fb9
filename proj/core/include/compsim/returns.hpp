#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "compsim/dates.hpp"

namespace compsim {

struct ReturnObservation {
  Date date;
  double value;  // daily simple return as a fraction
  bool operator==(const ReturnObservation&) const = default;
};

/// Dated daily simple returns for one company; dates strictly increasing,
/// values finite and > -1.
class ReturnSeries {
public:
  ReturnSeries() = default;
  ReturnSeries(std::string company_id, std::vector<ReturnObservation> observations);

  const std::string& company_id() const { return company_id_; }
  const std::vector<ReturnObservation>& observations() const { return observations_; }
  std::size_t size() const { return observations_.size(); }
  bool empty() const { return observations_.empty(); }

  ReturnSeries restrict(const DateRange& window) const;
  bool operator==(const ReturnSeries&) const = default;

private:
  std::string company_id_;
  std::vector<ReturnObservation> observations_;
};

using ReturnsMap = std::map<std::string, ReturnSeries>;

/// CSV with header company_id,date,return. Rows may be in any order.
ReturnsMap load_returns(const std::string& path);
void save_returns(const ReturnsMap& returns, const std::string& path);

} // namespace compsim
