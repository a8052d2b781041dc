#include "coordlens/date.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "coordlens/error.hpp"

namespace coordlens {
namespace {

std::optional<int> parse_fixed(std::string_view text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::chrono::year_month_day to_ymd(Date date) {
  return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{date.days}}};
}

}  // namespace

std::optional<Date> parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (text[i] < '0' || text[i] > '9') return std::nullopt;
  }
  auto y = parse_fixed(text.substr(0, 4));
  auto m = parse_fixed(text.substr(5, 2));
  auto d = parse_fixed(text.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                                  std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{static_cast<std::int32_t>(std::chrono::sys_days{ymd}.time_since_epoch().count())};
}

Date parse_iso_date_or_throw(std::string_view text) {
  auto date = parse_iso_date(text);
  if (!date) throw Error(ErrorCode::InvalidDate, "invalid ISO-8601 date '" + std::string(text) + "'");
  return *date;
}

std::string format_iso_date(Date date) {
  return bucket_key(date, TimeGranularity::Day);
}

std::string bucket_key(Date date, TimeGranularity granularity) {
  auto ymd = to_ymd(date);
  char buf[16];
  int y = static_cast<int>(ymd.year());
  unsigned m = static_cast<unsigned>(ymd.month());
  unsigned d = static_cast<unsigned>(ymd.day());
  switch (granularity) {
    case TimeGranularity::Year: std::snprintf(buf, sizeof buf, "%04d", y); break;
    case TimeGranularity::Month: std::snprintf(buf, sizeof buf, "%04d-%02u", y, m); break;
    case TimeGranularity::Day: std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d); break;
  }
  return buf;
}

std::optional<TimeGranularity> parse_granularity(std::string_view name) {
  if (name == "year") return TimeGranularity::Year;
  if (name == "month") return TimeGranularity::Month;
  if (name == "day") return TimeGranularity::Day;
  return std::nullopt;
}

std::string_view to_string(TimeGranularity granularity) {
  switch (granularity) {
    case TimeGranularity::Year: return "year";
    case TimeGranularity::Month: return "month";
    case TimeGranularity::Day: return "day";
  }
  return "day";
}

}  // namespace coordlens
