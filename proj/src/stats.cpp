#include "coordlens/stats.hpp"

#include <algorithm>
#include <cmath>

#include "coordlens/error.hpp"

namespace coordlens {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "quantile of an empty sample");
  const double rank = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + (sorted[lo + 1] - sorted[lo]) * frac;
}

HistogramResult histogram(std::span<const double> values, const HistogramSpec& spec) {
  if (!(spec.bin_width > 0.0) || !std::isfinite(spec.bin_width)) {
    throw Error(ErrorCode::InvalidRange, "bin width must be positive");
  }
  HistogramResult result;
  double lo = 0.0;
  double hi = 0.0;
  if (spec.domain) {
    std::tie(lo, hi) = *spec.domain;
    if (!(lo <= hi)) throw Error(ErrorCode::InvalidRange, "histogram domain is inverted");
  } else {
    bool any = false;
    for (double v : values) {
      if (!std::isfinite(v)) continue;
      lo = any ? std::min(lo, v) : v;
      hi = any ? std::max(hi, v) : v;
      any = true;
    }
    if (!any) {
      result.dropped = values.size();
      return result;
    }
    hi += spec.bin_width;
  }

  const double first = std::floor((lo - spec.origin) / spec.bin_width);
  const double last = std::ceil((hi - spec.origin) / spec.bin_width) - 1.0;
  const auto nbins = last >= first ? static_cast<std::size_t>(last - first + 1.0) : std::size_t{0};
  result.bins.resize(nbins);
  for (std::size_t i = 0; i < nbins; ++i) {
    result.bins[i].lo = spec.origin + (first + static_cast<double>(i)) * spec.bin_width;
  }
  for (double v : values) {
    if (!std::isfinite(v) || v < lo || v >= hi || nbins == 0) {
      ++result.dropped;
      continue;
    }
    const double idx = std::floor((v - spec.origin) / spec.bin_width) - first;
    const auto bin = static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(nbins - 1)));
    ++result.bins[bin].count;
  }
  return result;
}

BoxplotStats boxplot_stats(std::span<const double> values) {
  std::vector<double> sorted;
  sorted.reserve(values.size());
  for (double v : values) {
    if (std::isfinite(v)) sorted.push_back(v);
  }
  if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "boxplot of an empty sample");
  std::sort(sorted.begin(), sorted.end());

  BoxplotStats s;
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;

  auto first_in = std::lower_bound(sorted.begin(), sorted.end(), lo_fence);
  auto past_in = std::upper_bound(sorted.begin(), sorted.end(), hi_fence);
  s.outliers.assign(sorted.begin(), first_in);
  s.outliers.insert(s.outliers.end(), past_in, sorted.end());
  s.min_whisker = std::min(*first_in, s.q1);
  s.max_whisker = std::max(*(past_in - 1), s.q3);
  return s;
}

RegressionFit linear_regression(std::span<const XY> points) {
  if (points.size() < 2) throw Error(ErrorCode::TooFewPoints, "regression needs at least 2 points");
  double min_x = points[0].x;
  double max_x = points[0].x;
  double mx = 0.0;
  double my = 0.0;
  for (const XY& p : points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    mx += p.x;
    my += p.y;
  }
  if (min_x == max_x) throw Error(ErrorCode::DegenerateX, "x has zero variance");
  const double n = static_cast<double>(points.size());
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const XY& p : points) {
    const double dx = p.x - mx;
    const double dy = p.y - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  RegressionFit fit;
  fit.n = points.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0.0) {
    fit.r_squared = 1.0;
  } else {
    double ss_res = 0.0;
    for (const XY& p : points) {
      const double r = p.y - (fit.intercept + fit.slope * p.x);
      ss_res += r * r;
    }
    fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return fit;
}

StackedCounts stacked_aggregate(std::span<const std::string> primary, std::span<const std::string> secondary) {
  if (primary.size() != secondary.size()) {
    throw Error(ErrorCode::LengthMismatch, "primary and secondary lists differ in length");
  }
  StackedCounts counts;
  for (std::size_t i = 0; i < primary.size(); ++i) ++counts[primary[i]][secondary[i]];
  return counts;
}

std::vector<std::string> time_bucket(std::span<const Date> dates, TimeGranularity granularity) {
  std::vector<std::string> keys;
  keys.reserve(dates.size());
  for (Date d : dates) keys.push_back(bucket_key(d, granularity));
  return keys;
}

std::vector<std::string> time_bucket(std::span<const std::string> dates, TimeGranularity granularity) {
  std::vector<std::string> keys;
  keys.reserve(dates.size());
  for (const auto& d : dates) keys.push_back(bucket_key(parse_iso_date_or_throw(d), granularity));
  return keys;
}

std::optional<SeriesReduction> parse_series_reduction(std::string_view name) {
  if (name == "mean") return SeriesReduction::Mean;
  if (name == "count") return SeriesReduction::Count;
  return std::nullopt;
}

std::map<std::string, std::vector<std::pair<std::string, double>>> series_aggregate(
    std::span<const SeriesSample> samples, SeriesReduction reduction) {
  struct Acc {
    double sum = 0.0;
    std::size_t n = 0;
    std::size_t rows = 0;
  };
  std::map<std::string, std::map<std::string, Acc>> acc;
  for (const SeriesSample& s : samples) {
    Acc& a = acc[s.category][s.bucket];
    ++a.rows;
    if (!std::isnan(s.value)) {
      a.sum += s.value;
      ++a.n;
    }
  }
  std::map<std::string, std::vector<std::pair<std::string, double>>> out;
  for (const auto& [category, buckets] : acc) {
    auto& series = out[category];
    for (const auto& [bucket, a] : buckets) {
      if (reduction == SeriesReduction::Count) {
        series.emplace_back(bucket, static_cast<double>(a.rows));
      } else if (a.n > 0) {
        series.emplace_back(bucket, a.sum / static_cast<double>(a.n));
      }
    }
  }
  return out;
}

}  // namespace coordlens
