#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace coordlens {

enum class ClassMethod { EqualInterval, Quantile, Jenks };

std::string_view to_string(ClassMethod method);
std::optional<ClassMethod> parse_class_method(std::string_view name);

/// k + 1 ascending boundaries; breaks.front() is the data minimum and
/// breaks.back() the maximum. Class i covers [breaks[i], breaks[i+1]), the
/// last class also includes the maximum.
struct ClassBreaks {
  ClassMethod method = ClassMethod::Quantile;
  std::size_t k = 5;
  std::vector<double> breaks;
};

/// Non-finite inputs are ignored. Throws Error(NotApplicable) for k < 2 and
/// Error(NotEnoughDistinct) when the data has fewer than k distinct values
/// (fewer than 2 for equal_interval).
///
/// Jenks returns the partition of the sorted values into k contiguous
/// classes with minimal total within-class squared deviation (Fisher's
/// exact dynamic program, O(k d^2) over d distinct values). Each interior
/// break is the smallest value of the class it opens, so the half-open
/// assignment rule puts every value back into its optimal class.
ClassBreaks classify(std::span<const double> values, ClassMethod method, std::size_t k);

/// Class index for `value`, or nullopt when it lies outside
/// [breaks.front(), breaks.back()] (rendered as no-data).
std::optional<std::size_t> assign_class(double value, std::span<const double> breaks);

}  // namespace coordlens
