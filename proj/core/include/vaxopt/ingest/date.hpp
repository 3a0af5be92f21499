#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace vaxopt::ingest {

using Date = std::chrono::sys_days;

/// Parses YYYY-MM-DD; throws InputError on anything else or an invalid calendar date.
Date parse_date(std::string_view text);
std::string format_date(Date d);

inline Date add_days(Date d, long n) { return d + std::chrono::days{n}; }
inline long days_between(Date from, Date to) { return static_cast<long>((to - from).count()); }

} // namespace vaxopt::ingest
