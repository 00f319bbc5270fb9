#include "compsim/returns.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "compsim/csv.hpp"
#include "compsim/error.hpp"

namespace compsim {

ReturnSeries::ReturnSeries(std::string company_id, std::vector<ReturnObservation> observations)
    : company_id_(std::move(company_id)), observations_(std::move(observations)) {
  for (std::size_t i = 0; i < observations_.size(); ++i) {
    const auto& o = observations_[i];
    if (!std::isfinite(o.value) || !(o.value > -1.0)) {
      throw DataError("return of '" + company_id_ + "' on " + format_date(o.date) +
                      " must be finite and > -1");
    }
    if (i > 0 && !(observations_[i - 1].date < o.date)) {
      throw DataError("dates of '" + company_id_ + "' are not strictly increasing at " +
                      format_date(o.date));
    }
  }
}

ReturnSeries ReturnSeries::restrict(const DateRange& window) const {
  std::vector<ReturnObservation> kept;
  auto lo = std::lower_bound(observations_.begin(), observations_.end(), window.first,
                             [](const ReturnObservation& o, Date d) { return o.date < d; });
  for (auto it = lo; it != observations_.end() && it->date <= window.last; ++it) kept.push_back(*it);
  return ReturnSeries(company_id_, std::move(kept));
}

ReturnsMap load_returns(const std::string& path) {
  const auto table = csv::read_file(path, {"company_id", "date", "return"});
  std::map<std::string, std::vector<ReturnObservation>> raw;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const auto where = path + ":" + std::to_string(table.line_numbers[i]) + ": ";
    try {
      if (row[0].empty()) throw DataError("empty company_id");
      const auto date = parse_date(row[1]);
      double value = 0.0;
      const auto& s = row[2];
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
      if (ec != std::errc{} || ptr != s.data() + s.size()) throw DataError("invalid return '" + s + "'");
      raw[row[0]].push_back({date, value});
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
  }
  ReturnsMap out;
  for (auto& [id, obs] : raw) {
    std::stable_sort(obs.begin(), obs.end(), [](const auto& a, const auto& b) { return a.date < b.date; });
    try {
      out.emplace(id, ReturnSeries(id, std::move(obs)));
    } catch (const DataError& e) {
      throw DataError(path + ": " + e.what());
    }
  }
  return out;
}

void save_returns(const ReturnsMap& returns, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  csv::write_row(out, {"company_id", "date", "return"});
  for (const auto& [id, series] : returns) {
    for (const auto& o : series.observations()) {
      out << csv::escape(id) << ',' << format_date(o.date) << ',' << csv::format_double(o.value) << '\n';
    }
  }
}

} // namespace compsim
