#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "pdswitch/registry.hpp"
#include "pdswitch/verify.hpp"

using namespace pdswitch;

namespace {
Vector v1(double a) { return Vector::Constant(1, a); }

EnsembleConfig ens(double dt, double T, std::size_t n, std::uint64_t seed = 1) {
  EnsembleConfig c;
  c.sim.dt = dt;
  c.sim.horizon = T;
  c.sim.seed = seed;
  c.n_paths = n;
  return c;
}

ProductFunctional square() {
  ProductFunctional V;
  V.f1 = [](const Vector& x, Mode) { return x.squaredNorm(); };
  V.grad_f1 = [](const Vector& x, Mode) { return Vector(2.0 * x); };
  V.hess_f1 = [](const Vector& x, Mode) { return Matrix(2.0 * Matrix::Identity(x.size(), x.size())); };
  return V;
}
}  // namespace

TEST_CASE("hitting time of a deterministic decay") {
  const auto m = oracle::scalar_model(-1.0, 0.0, 0.0, {}, 0.01);
  const double dt = 0.01;
  // Oracle: first k with 2 (1 - dt)^k <= 1.
  int k = 0;
  for (double x = 2.0; x > 1.0; x *= 1.0 - dt) ++k;
  const auto est = estimate_hitting_time(m, Segment::constant(v1(2.0), 0.01, dt), 1, 1.0, 1,
                                         ens(dt, 5.0, 3), HitNorm::kPoint);
  CHECK(est.usable);
  CHECK(est.censored_fraction == 0.0);
  CHECK(est.mean == doctest::Approx(k * dt).epsilon(1e-12));
  CHECK(est.std_error == 0.0);

  // The segment norm waits until the whole window (two samples here) is inside.
  const auto seg = estimate_hitting_time(m, Segment::constant(v1(2.0), 0.01, dt), 1, 1.0, 1,
                                         ens(dt, 5.0, 1), HitNorm::kSegment);
  CHECK(seg.mean == doctest::Approx((k + 1) * dt).epsilon(1e-12));

  const auto inside = estimate_hitting_time(m, Segment::constant(v1(0.5), 0.01, dt), 1, 1.0, 1,
                                            ens(dt, 5.0, 2));
  CHECK(inside.mean == 0.0);

  const auto never = estimate_hitting_time(m, Segment::constant(v1(2.0), 0.01, dt), 3, 1.0, 1,
                                           ens(dt, 1.0, 2));
  CHECK_FALSE(never.usable);
  CHECK(never.censored_fraction == 1.0);
  CHECK_THROWS_AS(estimate_hitting_time(m, Segment::constant(v1(2.0), 0.01, dt), 1, 0.0, 1, ens(dt, 1.0, 1)),
                  std::invalid_argument);
}

TEST_CASE("mode descent") {
  const auto frozen = oracle::scalar_model(0.0, 0.0, 0.0, {}, 1.0);
  const auto phi = Segment::constant(v1(0.0), 1.0, 0.01);
  CHECK(estimate_mode_descent(frozen, phi, 2, 3, ens(0.01, 1.0, 5)).mean == 0.0);
  const auto censored = estimate_mode_descent(frozen, phi, 3, 1, ens(0.01, 1.0, 5));
  CHECK_FALSE(censored.usable);
  CHECK(censored.censored_fraction == 1.0);

  // Single downward rate: descent time ~ Exp(lambda).
  const double lambda = 1.5;
  const auto m = oracle::scalar_model(0.0, 0.0, 0.0, {{2, 1, lambda}}, 1.0);
  const auto est = estimate_mode_descent(m, phi, 2, 1, ens(0.01, 40.0, 4000, 7));
  CHECK(est.censored_fraction == 0.0);
  CHECK(std::abs(est.mean - 1.0 / lambda) < 4.0 * est.std_error);
}

TEST_CASE("generator on simple functionals") {
  const auto bm = oracle::scalar_model(0.0, 1.0, 0.0, {}, 1.0);
  const auto seg = Segment::constant(v1(0.7), 1.0, 0.1);
  CHECK(apply_generator(square(), bm, seg, 1) == doctest::Approx(1.0));

  const auto decay = oracle::scalar_model(-1.0, 0.0, 0.0, {}, 1.0);
  CHECK(apply_generator(square(), decay, seg, 1) == doctest::Approx(-2.0 * 0.49));

  // Switching only: V = i x^2, one jump 1 -> 2 at rate a.
  const double a = 0.8;
  const auto sw = oracle::scalar_model(0.0, 0.0, 0.0, {{1, 2, a}}, 1.0);
  ProductFunctional V;
  V.f1 = [](const Vector& x, Mode i) { return i * x.squaredNorm(); };
  V.grad_f1 = [](const Vector& x, Mode i) { return Vector(2.0 * i * x); };
  V.hess_f1 = [](const Vector& x, Mode i) { return Matrix(2.0 * i * Matrix::Identity(x.size(), x.size())); };
  CHECK(apply_generator(V, sw, seg, 1) == doctest::Approx(a * 0.49));

  // Memory part on phi(s) = s over [-1, 0] with g = 1: only the endpoint terms remain.
  std::vector<Vector> samples;
  for (int k = 0; k <= 10; ++k) samples.push_back(v1(-1.0 + 0.1 * k));
  const auto ramp = Segment::from_samples(samples, 1.0, 0.1);
  ProductFunctional mem;
  mem.f2 = [](const Vector& x, Mode) { return x.squaredNorm(); };
  mem.g = [](double, Mode) { return 1.0; };
  mem.dg_dt = [](double, Mode) { return 0.0; };
  const auto frozen = oracle::scalar_model(0.0, 0.0, 0.0, {}, 1.0);
  CHECK(apply_generator(mem, frozen, ramp, 1) == doctest::Approx(-1.0));
  // Constant segment with g = e^s: the horizontal derivative vanishes up to quadrature error.
  mem.g = [](double s, Mode) { return std::exp(s); };
  mem.dg_dt = [](double s, Mode) { return std::exp(s); };
  CHECK(std::abs(apply_generator(mem, frozen, Segment::constant(v1(2.0), 1.0, 0.01), 1)) < 1e-4);

  ProductFunctional broken;
  broken.f1 = [](const Vector&, Mode) { return 0.0; };
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
}

TEST_CASE("Dynkin residuals") {
  const auto bm = oracle::scalar_model(0.0, 1.0, 0.0, {}, 1.0);
  const auto phi = Segment::constant(v1(0.5), 1.0, 0.01);
  const auto r = dynkin_residual(square(), bm, phi, 1, 1.0, ens(0.01, 1.0, 2000, 3));
  CHECK(std::abs(r.mean) < 4.0 * r.std_error);

  // Deterministic decay: the residual is the exact left-point quadrature bias.
  const auto decay = oracle::scalar_model(-1.0, 0.0, 0.0, {}, 1.0);
  const double dt = 0.01, x0 = 0.5;
  double x = x0, integral = 0.0;
  for (int k = 0; k < 100; ++k) {
    integral += -2.0 * x * x * dt;
    x += dt * (-x);
  }
  const double bias = x * x - x0 * x0 - integral;
  const auto d = dynkin_residual(square(), decay, phi, 1, 1.0, ens(dt, 1.0, 2));
  CHECK(d.mean == doctest::Approx(bias).epsilon(1e-10));

  ProductFunctional one;
  one.f1 = [](const Vector&, Mode) { return 1.0; };
  one.grad_f1 = [](const Vector& x, Mode) { return Vector(Vector::Zero(x.size())); };
  one.hess_f1 = [](const Vector& x, Mode) { return Matrix(Matrix::Zero(x.size(), x.size())); };
  const auto ou = make_switched_ou({});
  const auto c = dynkin_residual(one, ou.model, phi, 1, 1.0, ens(0.01, 1.0, 50));
  CHECK(c.mean == 0.0);
  CHECK_THROWS_AS(dynkin_residual(one, ou.model, phi, 1, 0.005, ens(0.01, 1.0, 1)), std::invalid_argument);
}

TEST_CASE("coupling, occupation and persistence") {
  const auto l2 = make_linear_2d({});
  const std::vector<double> radii{1.0, 5.0};
  const auto rows = coupling_decay(l2.model, l2.lin, radii, 0.5, 1, ens(0.01, 5.0, 20));
  for (const auto& row : rows) CHECK(row.probability.mean == 0.0);
  const auto none = coupling_decay(make_switched_ou({}).model, make_switched_ou({}).lin, radii, 0.5, 1,
                                   ens(0.01, 0.0, 20));
  for (const auto& row : none) CHECK(row.probability.mean == 0.0);

  const auto ou = make_switched_ou({});
  const std::vector<OccupationStart> same{{v1(1.0), 1}, {v1(1.0), 1}};
  const auto rep = occupation_stability(ou.model, same, 1.0, ens(0.01, 5.0, 10));
  CHECK(rep.distances[0][1] == 0.0);
  double mass = 0.0;
  for (double v : rep.histograms[0]) mass += v;
  CHECK(mass == doctest::Approx(1.0));
  const std::vector<OccupationStart> lonely{{v1(1.0), 1}};
  CHECK_THROWS_AS(occupation_stability(ou.model, lonely, 1.0, ens(0.01, 5.0, 10)), std::invalid_argument);

  const auto frozen = oracle::scalar_model(0.0, 0.0, 0.0, {}, 1.0);
  const std::vector<double> starts{0.5, 5.0};
  const auto p = persistence_probability(frozen, starts, 1.0, 1, ens(0.01, 2.0, 10));
  CHECK(p[0].probability.mean == 0.0);
  CHECK(p[1].probability.mean == 1.0);
}

TEST_CASE("sup moment ladder on a frozen state") {
  const auto frozen = oracle::scalar_model(0.0, 0.0, 0.0, {}, 1.0);
  const std::vector<double> horizons{0.0, 1.0, 2.0};
  const auto ladder = sup_moment_ladder(frozen, Segment::constant(v1(3.0), 1.0, 0.1), 1, horizons,
                                        ens(0.1, 2.0, 4));
  for (const auto& e : ladder) CHECK(e.mean == doctest::Approx(9.0));
  const std::vector<double> unsorted{2.0, 1.0};
  CHECK_THROWS_AS(sup_moment_ladder(frozen, Segment::constant(v1(3.0), 1.0, 0.1), 1, unsorted, ens(0.1, 2.0, 4)),
                  std::invalid_argument);
}

TEST_CASE("running stats") {
  RunningStats s;
  for (double v : {1.0, 2.0, 3.0, 4.0}) s.add(v);
  CHECK(s.mean() == doctest::Approx(2.5));
  CHECK(s.variance() == doctest::Approx(5.0 / 3.0));
  CHECK(s.std_error() == doctest::Approx(std::sqrt(5.0 / 12.0)));
}
