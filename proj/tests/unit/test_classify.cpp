#include <doctest.h>

#include <random>

#include "coordlens/classify.hpp"
#include "coordlens/error.hpp"
#include "oracles.hpp"

using namespace coordlens;

TEST_CASE("equal interval") {
  const std::vector<double> v = {0, 1, 2, 3, 4, 10};
  const auto b = classify(v, ClassMethod::EqualInterval, 5);
  CHECK(b.breaks == std::vector<double>{0, 2, 4, 6, 8, 10});
}

TEST_CASE("quantile breaks use interpolated ranks") {
  const std::vector<double> v = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto b = classify(v, ClassMethod::Quantile, 4);
  CHECK(b.breaks == std::vector<double>{1, 3, 5, 7, 9});
}

TEST_CASE("jenks separates obvious clusters") {
  const std::vector<double> v = {1, 2, 3, 20, 21, 22, 50, 51};
  const auto b = classify(v, ClassMethod::Jenks, 3);
  CHECK(b.breaks == std::vector<double>{1, 20, 50, 51});
  for (double x : v) CHECK(assign_class(x, b.breaks));
  CHECK(*assign_class(3, b.breaks) == 0);
  CHECK(*assign_class(20, b.breaks) == 1);
  CHECK(*assign_class(51, b.breaks) == 2);
  CHECK_FALSE(assign_class(52, b.breaks));
}

TEST_CASE("jenks agrees with enumeration on small random data") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 4 + t % 7;
    const std::size_t k = 2 + t % 3;
    std::vector<double> v(n);
    for (double& x : v) x = std::uniform_int_distribution<int>(0, 30)(rng);
    const auto want = oracle::exhaustive_jenks(v, k);
    if (!want) {
      CHECK_THROWS_AS(classify(v, ClassMethod::Jenks, k), Error);
      continue;
    }
    const auto got = classify(v, ClassMethod::Jenks, k);
    CHECK(oracle::partition_ssd(v, got.breaks) == doctest::Approx(static_cast<double>(want->ssd)).epsilon(1e-12));
    if (want->unique) CHECK(got.breaks == want->breaks);
  }
}

TEST_CASE("errors") {
  const std::vector<double> same = {2, 2, 2};
  CHECK_THROWS_AS(classify(same, ClassMethod::Jenks, 2), Error);
  CHECK_THROWS_AS(classify(same, ClassMethod::EqualInterval, 3), Error);
  const std::vector<double> v = {1, 2, 3};
  CHECK_THROWS_AS(classify(v, ClassMethod::Quantile, 1), Error);
  CHECK(parse_class_method("equal_interval") == ClassMethod::EqualInterval);
  CHECK(to_string(ClassMethod::Jenks) == "jenks");
}
