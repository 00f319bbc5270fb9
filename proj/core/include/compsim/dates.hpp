#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace compsim {

using Date = std::chrono::sys_days;
using YearMonth = std::chrono::year_month;

/// Parses "YYYY-MM-DD"; throws DataError on anything else.
Date parse_date(std::string_view text);
std::string format_date(Date d);

/// "YYYY-MM"
std::string format_year_month(YearMonth ym);

inline YearMonth year_month_of(Date d) {
  const std::chrono::year_month_day ymd{d};
  return ymd.year() / ymd.month();
}

inline int year_of(Date d) {
  return static_cast<int>(std::chrono::year_month_day{d}.year());
}

/// Inclusive date range.
struct DateRange {
  Date first;
  Date last;
  bool contains(Date d) const { return first <= d && d <= last; }
};

/// January 1st to December 31st of `year`.
DateRange calendar_year(int year);

} // namespace compsim
