#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace coordlens {

/// Calendar date stored as days since 1970-01-01.
struct Date {
  std::int32_t days = 0;

  friend auto operator<=>(const Date&, const Date&) = default;
};

enum class TimeGranularity { Year, Month, Day };

/// Parses "YYYY-MM-DD" (ISO-8601 calendar date). Returns nullopt for anything
/// else, including impossible dates like 2021-02-30.
std::optional<Date> parse_iso_date(std::string_view text);

/// Throws Error(InvalidDate) where parse_iso_date would return nullopt.
Date parse_iso_date_or_throw(std::string_view text);

std::string format_iso_date(Date date);

/// Canonical bucket key: "YYYY", "YYYY-MM" or "YYYY-MM-DD".
std::string bucket_key(Date date, TimeGranularity granularity);

std::optional<TimeGranularity> parse_granularity(std::string_view name);
std::string_view to_string(TimeGranularity granularity);

}  // namespace coordlens
