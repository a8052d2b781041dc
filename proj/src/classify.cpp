#include "coordlens/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "coordlens/error.hpp"
#include "coordlens/stats.hpp"

namespace coordlens {
namespace {

std::vector<double> jenks_breaks(const std::vector<double>& sorted, std::size_t k) {
  // Collapse to distinct values with multiplicities; classes only split
  // between distinct values.
  std::vector<double> vals;
  std::vector<double> counts;
  for (double v : sorted) {
    if (vals.empty() || vals.back() != v) {
      vals.push_back(v);
      counts.push_back(1.0);
    } else {
      counts.back() += 1.0;
    }
  }
  const std::size_t d = vals.size();

  // Prefix sums of centered values keep the SSD differences well conditioned.
  double mean = 0.0;
  for (double v : sorted) mean += v;
  mean /= static_cast<double>(sorted.size());
  std::vector<double> w(d + 1, 0.0), s1(d + 1, 0.0), s2(d + 1, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const double c = vals[i] - mean;
    w[i + 1] = w[i] + counts[i];
    s1[i + 1] = s1[i] + counts[i] * c;
    s2[i + 1] = s2[i] + counts[i] * c * c;
  }
  // SSD of distinct values [i, j).
  auto ssd = [&](std::size_t i, std::size_t j) {
    const double n = w[j] - w[i];
    const double a = s1[j] - s1[i];
    return std::max(0.0, (s2[j] - s2[i]) - a * a / n);
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // cost[c][j]: best SSD of the first j distinct values in c+1 classes.
  std::vector<std::vector<double>> cost(k, std::vector<double>(d + 1, kInf));
  std::vector<std::vector<std::size_t>> split(k, std::vector<std::size_t>(d + 1, 0));
  for (std::size_t j = 1; j <= d; ++j) cost[0][j] = ssd(0, j);
  for (std::size_t c = 1; c < k; ++c) {
    for (std::size_t j = c + 1; j <= d; ++j) {
      for (std::size_t i = c; i < j; ++i) {
        const double candidate = cost[c - 1][i] + ssd(i, j);
        if (candidate < cost[c][j]) {
          cost[c][j] = candidate;
          split[c][j] = i;
        }
      }
    }
  }

  std::vector<std::size_t> starts(k, 0);
  std::size_t end = d;
  for (std::size_t c = k - 1; c > 0; --c) {
    starts[c] = split[c][end];
    end = starts[c];
  }
  std::vector<double> breaks;
  breaks.reserve(k + 1);
  breaks.push_back(vals.front());
  for (std::size_t c = 1; c < k; ++c) breaks.push_back(vals[starts[c]]);
  breaks.push_back(vals.back());
  return breaks;
}

}  // namespace

std::string_view to_string(ClassMethod method) {
  switch (method) {
    case ClassMethod::EqualInterval: return "equal_interval";
    case ClassMethod::Quantile: return "quantile";
    case ClassMethod::Jenks: return "jenks";
  }
  return "quantile";
}

std::optional<ClassMethod> parse_class_method(std::string_view name) {
  if (name == "equal_interval") return ClassMethod::EqualInterval;
  if (name == "quantile") return ClassMethod::Quantile;
  if (name == "jenks") return ClassMethod::Jenks;
  return std::nullopt;
}

ClassBreaks classify(std::span<const double> values, ClassMethod method, std::size_t k) {
  if (k < 2) throw Error(ErrorCode::NotApplicable, "classification needs k >= 2");
  std::vector<double> sorted;
  sorted.reserve(values.size());
  for (double v : values) {
    if (std::isfinite(v)) sorted.push_back(v);
  }
  std::sort(sorted.begin(), sorted.end());
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i == 0 || sorted[i] != sorted[i - 1]) ++distinct;
  }
  const std::size_t needed = method == ClassMethod::EqualInterval ? 2 : k;
  if (distinct < needed) {
    throw Error(ErrorCode::NotEnoughDistinct, std::to_string(distinct) + " distinct values for " +
                                                  std::to_string(k) + " " + std::string(to_string(method)) +
                                                  " classes");
  }

  ClassBreaks out{method, k, {}};
  const double lo = sorted.front();
  const double hi = sorted.back();
  switch (method) {
    case ClassMethod::EqualInterval: {
      const double step = (hi - lo) / static_cast<double>(k);
      for (std::size_t i = 0; i < k; ++i) out.breaks.push_back(lo + step * static_cast<double>(i));
      out.breaks.push_back(hi);
      break;
    }
    case ClassMethod::Quantile: {
      out.breaks.push_back(lo);
      for (std::size_t i = 1; i < k; ++i) {
        out.breaks.push_back(quantile_sorted(sorted, static_cast<double>(i) / static_cast<double>(k)));
      }
      out.breaks.push_back(hi);
      break;
    }
    case ClassMethod::Jenks: out.breaks = jenks_breaks(sorted, k); break;
  }
  return out;
}

std::optional<std::size_t> assign_class(double value, std::span<const double> breaks) {
  if (breaks.size() < 2 || !(value >= breaks.front() && value <= breaks.back())) return std::nullopt;
  // Largest i < k with breaks[i] <= value.
  auto it = std::upper_bound(breaks.begin(), breaks.end() - 1, value);
  return static_cast<std::size_t>(it - breaks.begin()) - 1;
}

}  // namespace coordlens
