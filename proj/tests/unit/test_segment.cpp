#include "doctest.h"

#include <random>
#include <stdexcept>
#include <vector>

#include "pdswitch/segment.hpp"

using namespace pdswitch;

namespace {
Vector v1(double a) { return Vector::Constant(1, a); }
Vector v2(double a, double b) {
  Vector x(2);
  x << a, b;
  return x;
}
}  // namespace

TEST_CASE("constant segment fills every sample") {
  const Segment s = Segment::constant(v1(2.0), 1.0, 0.5);
  REQUIRE(s.size() == 3);
  for (std::size_t k = 0; k < s.size(); ++k) CHECK(s.sample(k)[0] == 2.0);
  CHECK(s.value_at(-0.3)[0] == doctest::Approx(2.0));
  CHECK(s.sup_norm() == 2.0);
}

TEST_CASE("grid must divide the delay") {
  CHECK_THROWS_AS(Segment::constant(v1(0.0), 1.0, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(Segment::constant(v1(0.0), 0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(Segment::constant(v1(0.0), 1.0, -0.1), std::invalid_argument);
  CHECK_NOTHROW(Segment::constant(v1(0.0), 1.0, 0.1));  // 10 within rounding
  CHECK(grid_intervals(1.0, 1e-3) == 1000);
}

TEST_CASE("push drops the oldest sample") {
  Segment s = Segment::from_samples({v1(1), v1(2), v1(3)}, 2.0, 1.0);
  s.push(v1(4));
  CHECK(s.sample(0)[0] == 2);
  CHECK(s.sample(1)[0] == 3);
  CHECK(s.sample(2)[0] == 4);

  Segment t = Segment::from_samples({v1(1), v1(2), v1(3)}, 2.0, 1.0);
  t.push(v1(9));
  CHECK(t.sup_norm() == 9);

  Segment u = Segment::from_samples({v1(5), v1(-7), v1(3)}, 2.0, 1.0);
  for (std::size_t k = 0; k < u.size(); ++k) u.push(v1(0));
  CHECK(u.sup_norm() == 0.0);

  CHECK_THROWS_AS(u.push(v2(1, 2)), std::invalid_argument);
}

TEST_CASE("value_at interpolates linearly and is exact at the ends") {
  const Segment s = Segment::from_samples({v1(0), v1(2)}, 1.0, 1.0);
  CHECK(s.value_at(-0.5)[0] == doctest::Approx(1.0));
  CHECK(s.value_at(0.0)[0] == 2.0);
  CHECK(s.value_at(-1.0)[0] == 0.0);
  CHECK_THROWS_AS(s.value_at(0.1), std::out_of_range);
  CHECK_THROWS_AS(s.value_at(-1.1), std::out_of_range);
}

TEST_CASE("sup norm is Euclidean over samples") {
  const Segment s = Segment::from_samples({v2(3, 4), v2(0, 0)}, 1.0, 1.0);
  CHECK(s.sup_norm() == doctest::Approx(5.0));
  CHECK(Segment::constant(v2(0, 0), 1.0, 0.25).sup_norm() == 0.0);
}

TEST_CASE("integrate_against a discrete measure") {
  const Segment s = Segment::from_samples({v1(0), v1(4)}, 1.0, 1.0);
  const std::vector<WeightPoint> point{{-1.0, 1.0}};
  CHECK(s.integrate_against(point)[0] == 0.0);
  const std::vector<WeightPoint> two{{-1.0, 0.5}, {0.0, 0.5}};
  CHECK(s.integrate_against(two)[0] == doctest::Approx(2.0));
  CHECK(s.integrate_against({}).isZero());
  const std::vector<WeightPoint> bad{{-2.0, 1.0}};
  CHECK_THROWS_AS(s.integrate_against(bad), std::out_of_range);
}

TEST_CASE("properties on random segments") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double dt = 0.25;
    std::vector<Vector> samples;
    for (int k = 0; k < 9; ++k) samples.push_back(v2(normal(gen), normal(gen)));
    Segment s = Segment::from_samples(samples, 2.0, dt);
    // Hull property and sup bound.
    const double t = -2.0 * unif(gen);
    const Vector v = s.value_at(t);
    const auto lo = static_cast<std::size_t>(std::floor((t + 2.0) / dt));
    const std::size_t hi = std::min<std::size_t>(lo + 1, 8);
    for (int c = 0; c < 2; ++c) {
      CHECK(v[c] >= std::min(samples[lo][c], samples[hi][c]) - 1e-12);
      CHECK(v[c] <= std::max(samples[lo][c], samples[hi][c]) + 1e-12);
    }
    CHECK(s.sup_norm() >= v.norm() - 1e-12);
    // Exact at grid points; newest last.
    CHECK(s.value_at(0.0) == samples.back());
    CHECK(s.value_at(-2.0) == samples.front());
    // Linearity in the weights.
    const std::vector<WeightPoint> a{{t, 1.5}}, b{{-0.5, -0.25}}, ab{{t, 1.5}, {-0.5, -0.25}};
    CHECK((s.integrate_against(ab) - s.integrate_against(a) - s.integrate_against(b)).norm() < 1e-12);
    // Pushing a dominating sample raises the sup to it.
    const Vector big = v2(10.0 + unif(gen), 0.0);
    s.push(big);
    CHECK(s.sup_norm() == doctest::Approx(big.norm()));
  }
}
