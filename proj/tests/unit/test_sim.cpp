#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "pdswitch/registry.hpp"
#include "pdswitch/sim.hpp"
#include "pdswitch/verify.hpp"

using namespace pdswitch;

namespace {
Vector v1(double a) { return Vector::Constant(1, a); }

SimConfig cfg(double dt, double T, std::uint64_t seed = 1, JumpScheme s = JumpScheme::kThinning) {
  SimConfig c;
  c.dt = dt;
  c.horizon = T;
  c.seed = seed;
  c.scheme = s;
  return c;
}

bool same(const TrajectoryRecord& a, const TrajectoryRecord& b) {
  if (a.times != b.times || a.modes != b.modes || a.jumps.size() != b.jumps.size()) return false;
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    if (a.states[k] != b.states[k]) return false;
  }
  for (std::size_t k = 0; k < a.jumps.size(); ++k) {
    if (a.jumps[k].t != b.jumps[k].t || a.jumps[k].to != b.jumps[k].to) return false;
  }
  return true;
}
}  // namespace

TEST_CASE("frozen system stays put") {
  const auto m = oracle::scalar_model(0.0, 0.0, 0.0, {}, 1.0);
  const auto rec = simulate(m, Segment::constant(v1(3.5), 1.0, 0.1), 2, cfg(0.1, 5.0));
  for (const auto& x : rec.states) CHECK(x[0] == 3.5);
  for (Mode i : rec.modes) CHECK(i == 2);
  CHECK(rec.jumps.empty());
}

TEST_CASE("Euler ODE solution") {
  const auto m = oracle::scalar_model(-1.0, 0.0, 0.0, {}, 1.0);
  for (double dt : {1e-2, 1e-3}) {
    const auto rec = simulate(m, Segment::constant(v1(std::exp(1.0)), 1.0, dt), 1, cfg(dt, 1.0));
    const double explicit_euler = std::exp(1.0) * std::pow(1.0 - dt, std::llround(1.0 / dt));
    CHECK(rec.states.back()[0] == doctest::Approx(explicit_euler).epsilon(1e-12));
    CHECK(std::abs(rec.states.back()[0] - 1.0) < 2.0 * dt);
  }
}

TEST_CASE("two-state occupation matches b / (a + b)") {
  const double a = 1.0, b = 3.0;
  const auto m = oracle::scalar_model(0.0, 0.0, 0.0, {{1, 2, a}, {2, 1, b}}, 1.0);
  for (JumpScheme s : {JumpScheme::kThinning, JumpScheme::kBernoulli}) {
    const auto rec = simulate(m, Segment::constant(v1(0.0), 1.0, 0.01), 1, cfg(0.01, 4000.0, 9, s));
    std::size_t in1 = 0;
    for (Mode i : rec.modes) in1 += i == 1;
    const double frac = static_cast<double>(in1) / static_cast<double>(rec.modes.size());
    CHECK(frac == doctest::Approx(b / (a + b)).epsilon(0.03));
  }
}

TEST_CASE("determinism and stream contract") {
  const auto ou = make_switched_ou({});
  const auto phi = Segment::constant(v1(2.0), 1.0, 0.01);
  const auto c = cfg(0.01, 5.0, 42);
  const auto one = simulate(ou.model, phi, 1, c, 0);
  const auto again = simulate(ou.model, phi, 1, c, 0);
  CHECK(same(one, again));
  const auto ens = simulate_ensemble(ou.model, phi, 1, c, 1);
  CHECK(same(one, ens[0]));

  const auto full = simulate_ensemble(ou.model, phi, 1, c, 6, 1);
  const auto lo = simulate_ensemble(ou.model, phi, 1, c, 3, 2, 0);
  const auto hi = simulate_ensemble(ou.model, phi, 1, c, 3, 3, 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(same(full[k], lo[k]));
    CHECK(same(full[k + 3], hi[k]));
  }
  const auto threaded = simulate_ensemble(ou.model, phi, 1, c, 6, 4);
  for (int k = 0; k < 6; ++k) CHECK(same(full[k], threaded[k]));
  CHECK_FALSE(same(full[0], full[1]));
}

TEST_CASE("jumps only along positive rates") {
  const auto ou = make_switched_ou({});
  const auto rec = simulate(ou.model, Segment::constant(v1(1.0), 1.0, 0.01), 1, cfg(0.01, 50.0, 3));
  CHECK_FALSE(rec.jumps.empty());
  for (const auto& j : rec.jumps) {
    const bool allowed = j.from <= 2 ? (j.to <= 3 && j.to != j.from) : (j.to == 1 || j.to == 2 || j.to == j.from + 1);
    CHECK(allowed);
  }
}

TEST_CASE("invalid configurations") {
  const auto ou = make_switched_ou({});
  CHECK_THROWS_AS(simulate(ou.model, Segment::constant(v1(0.0), 1.0, 0.01), 1, cfg(0.02, 1.0)),
                  std::invalid_argument);  // segment grid differs from dt
  CHECK_THROWS_AS(simulate(ou.model, Segment::constant(v1(0.0), 1.0, 0.01), 0, cfg(0.01, 1.0)),
                  std::invalid_argument);
  // M = 6, dt = 0.1: dt M >= 0.5 under bernoulli.
  CHECK_THROWS_AS(simulate(ou.model, Segment::constant(v1(0.0), 1.0, 0.1), 1,
                           cfg(0.1, 1.0, 1, JumpScheme::kBernoulli)),
                  std::invalid_argument);
  CHECK_NOTHROW(simulate(ou.model, Segment::constant(v1(0.0), 1.0, 0.05), 1,
                         cfg(0.05, 1.0, 1, JumpScheme::kBernoulli)));
  CHECK_THROWS_AS(scheme_from_string("euler"), std::invalid_argument);

  ModelSpec liar = ou.model;
  liar.rate_bound = 1.0;
  CHECK_THROWS_AS(simulate(liar, Segment::constant(v1(0.0), 1.0, 0.01), 1, cfg(0.01, 5.0)), std::domain_error);
}

TEST_CASE("blow-up is flagged, not thrown") {
  const auto m = oracle::scalar_model(2000.0, 0.0, 0.0, {}, 1.0);
  const auto rec = simulate(m, Segment::constant(v1(1.0), 1.0, 0.5), 1, cfg(0.5, 100.0));
  CHECK(rec.blown_up);
  for (const auto& x : rec.states) CHECK(std::isfinite(x[0]));
}

TEST_CASE("default step") {
  CHECK(default_dt(1.0, 10.0) == doctest::Approx(0.01));
  CHECK(default_dt(1.0, 1000.0) == doctest::Approx(1.0 / 64.0));
  CHECK(grid_intervals(0.5, default_dt(0.5, 3.0)) > 0);
}

TEST_CASE("coupling") {
  // Q(phi) equal to its limit never decouples.
  Linear2dParams lp;
  const auto l2 = make_linear_2d(lp);
  Vector x0(2);
  x0 << 1.0, 1.0;
  const auto rec = simulate_coupled(l2.model, l2.lin, Segment::constant(x0, 1.0, 0.01), 1, cfg(0.01, 20.0));
  CHECK(std::isinf(rec.decouple_time));
  CHECK(rec.modes == rec.hat_modes);

  // Zero rates against a limit with total rate lambda: decoupling ~ Exp(lambda).
  const double lambda = 2.0;
  const auto frozen = oracle::scalar_model(0.0, 0.0, 0.0, {}, 1.0);
  Linearization lin{.drift_matrix = [](Mode) { return Matrix::Zero(1, 1).eval(); },
                    .noise_matrices = [](Mode) { return std::vector<Matrix>{Matrix::Zero(1, 1)}; },
                    .qhat = SparseGenerator::birth_death(lambda, lambda),
                    .coeff_bound = 0.0};
  ModelSpec m = frozen;
  m.rate_bound = 2.0 * lambda;
  RunningStats st;
  for (std::uint64_t p = 0; p < 4000; ++p) {
    const auto r = simulate_coupled(m, lin, Segment::constant(v1(0.0), 1.0, 0.01), 1, cfg(0.01, 20.0, 5), p);
    st.add(std::isinf(r.decouple_time) ? 20.0 : r.decouple_time);
  }
  // Mode 1 of the birth-death chain only moves up, at rate lambda.
  CHECK(std::abs(st.mean() - 1.0 / lambda) < 4.0 * st.std_error());
}

TEST_CASE("sup moments grow at most exponentially") {
  const auto ou = make_switched_ou({});
  const std::vector<double> horizons{1.0, 2.0, 4.0};
  EnsembleConfig ec{.sim = cfg(0.01, 4.0, 8), .n_paths = 200, .threads = 1};
  const auto ladder = sup_moment_ladder(ou.model, Segment::constant(v1(3.0), 1.0, 0.01), 1, horizons, ec);
  REQUIRE(ladder.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::isfinite(ladder[k].mean));
  CHECK(ladder[0].mean <= ladder[1].mean);
  CHECK(ladder[1].mean <= ladder[2].mean);
  // K (1 + |phi(0)|^2) e^{K T} with a generous K = 2.
  for (std::size_t k = 0; k < 3; ++k) CHECK(ladder[k].mean <= 2.0 * 10.0 * std::exp(2.0 * horizons[k]));
}
