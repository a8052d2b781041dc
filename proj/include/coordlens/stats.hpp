#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coordlens/date.hpp"

namespace coordlens {

/// Linear-interpolation quantile at rank (n - 1) * p of an ascending sample:
/// v[i] + (v[i+1] - v[i]) * frac. Throws Error(EmptyInput) on an empty span.
double quantile_sorted(std::span<const double> sorted, double p);

struct HistogramSpec {
  double origin = 0.0;
  double bin_width = 1.0;
  /// Half-open [lo, hi). Defaults to [min, max + bin_width) of the data.
  std::optional<std::pair<double, double>> domain;
};

struct HistogramBin {
  double lo = 0.0;
  std::size_t count = 0;
};

struct HistogramResult {
  std::vector<HistogramBin> bins;
  std::size_t dropped = 0;  ///< non-finite or out-of-domain inputs
};

/// Value v lands in bin floor((v - origin) / bin_width). Bins covering the
/// domain are all reported, empty ones with count 0. Throws
/// Error(InvalidRange) for a non-positive width or inverted domain.
HistogramResult histogram(std::span<const double> values, const HistogramSpec& spec);

struct BoxplotStats {
  double min_whisker = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max_whisker = 0.0;
  std::vector<double> outliers;  ///< ascending
};

/// Tukey boxplot: whiskers reach the most extreme values inside
/// [q1 - 1.5 IQR, q3 + 1.5 IQR]; values outside are outliers. When no data
/// lies between a fence and its quartile the whisker collapses onto the
/// quartile. Non-finite values are ignored; throws Error(EmptyInput) when
/// nothing remains.
BoxplotStats boxplot_stats(std::span<const double> values);

struct XY {
  double x = 0.0;
  double y = 0.0;
};

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

/// Ordinary least squares on centered sums. r^2 is reported as 1 when all y
/// are equal. Throws Error(TooFewPoints) for n < 2 and Error(DegenerateX)
/// when every x is identical.
RegressionFit linear_regression(std::span<const XY> points);

/// primary -> secondary -> count, both levels in lexicographic order.
using StackedCounts = std::map<std::string, std::map<std::string, std::size_t>>;

/// Throws Error(LengthMismatch) when the lists differ in length.
StackedCounts stacked_aggregate(std::span<const std::string> primary, std::span<const std::string> secondary);

std::vector<std::string> time_bucket(std::span<const Date> dates, TimeGranularity granularity);
/// ISO-8601 inputs; throws Error(InvalidDate).
std::vector<std::string> time_bucket(std::span<const std::string> dates, TimeGranularity granularity);

enum class SeriesReduction { Mean, Count };

std::optional<SeriesReduction> parse_series_reduction(std::string_view name);

struct SeriesSample {
  std::string bucket;
  std::string category;
  double value = 0.0;  ///< NaN for a missing value; skipped by Mean
};

/// One bucket-ordered series per category. Mean over a bucket whose values
/// are all missing is omitted from that series.
std::map<std::string, std::vector<std::pair<std::string, double>>> series_aggregate(
    std::span<const SeriesSample> samples, SeriesReduction reduction);

}  // namespace coordlens
