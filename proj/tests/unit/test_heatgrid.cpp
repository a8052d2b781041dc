#include <doctest.h>

#include <random>

#include "coordlens/error.hpp"
#include "coordlens/heatgrid.hpp"

using namespace coordlens;

TEST_CASE("mass is conserved") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> lon(-106.8, -106.4), lat(35.0, 35.2), w(0.5, 3.0);
  std::vector<WeightedPoint> pts;
  double total = 0;
  for (int i = 0; i < 300; ++i) {
    pts.push_back({{lon(rng), lat(rng)}, w(rng)});
    total += pts.back().weight;
  }
  const auto g = heat_grid(pts, 250, 750, HeatMode::Global);
  CHECK(g.total() == doctest::Approx(total).epsilon(1e-9));
  CHECK(g.intensities.size() == g.width * g.height);
  CHECK(g.mode == HeatMode::Global);
}

TEST_CASE("single point peaks at its cell") {
  const std::vector<WeightedPoint> pts = {{{0, 0}, 1.0}};
  const auto g = heat_grid(pts, 100, 300, HeatMode::Local);
  double best = 0;
  for (double v : g.intensities) best = std::max(best, v);
  CHECK(best > 0);
  CHECK(g.total() == doctest::Approx(1.0));
}

TEST_CASE("empty input and errors") {
  const auto g = heat_grid({}, 100, 300, HeatMode::Global);
  CHECK(g.width == 0);
  CHECK(g.height == 0);
  const std::vector<WeightedPoint> pts = {{{0, 0}, 1.0}};
  CHECK_THROWS_AS(heat_grid(pts, 0, 300, HeatMode::Global), Error);
  CHECK_THROWS_AS(heat_grid(pts, 100, 40, HeatMode::Global), Error);
  CHECK_THROWS_AS(heat_grid(std::vector<WeightedPoint>{{{0, 0}, -1.0}}, 100, 300, HeatMode::Global), Error);
  CHECK(parse_heat_mode("local") == HeatMode::Local);
}
