#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pdswitch/certify.hpp"
#include "pdswitch/registry.hpp"

using namespace pdswitch;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

// Scalar linearization b(i) = drift(i), sigma_1(i) = noise(i) on a given limit generator.
Linearization scalar_lin(std::function<double(Mode)> drift, std::function<double(Mode)> noise,
                         SparseGenerator qhat) {
  return {.drift_matrix = [drift](Mode i) { return scalar(drift(i)); },
          .noise_matrices = [noise](Mode i) { return std::vector<Matrix>{scalar(noise(i))}; },
          .qhat = std::move(qhat),
          .coeff_bound = 10.0};
}

GainPlan ex53_plan(double L1) {
  return {.controllable = {1},
          .input_matrix = [](Mode) { return scalar(1.0); },
          .gains = {{1, scalar(L1)}}};
}

Linearization ex53_lin() {
  return scalar_lin([](Mode) { return 1.0; }, [](Mode) { return 0.0; },
                    SparseGenerator::controlled_scalar_limit());
}

}  // namespace

TEST_CASE("per-mode cost examples") {
  const auto ou = scalar_lin([](Mode) { return -0.7; }, [](Mode) { return 0.0; },
                             SparseGenerator::switched_ou_limit());
  CHECK(per_mode_cost(ou, 1) == doctest::Approx(-0.7));
  const auto mult = scalar_lin([](Mode) { return 0.4; }, [](Mode) { return 1.5; },
                               SparseGenerator::switched_ou_limit());
  // A + s^2/2 - s^2
  CHECK(per_mode_cost(mult, 1) == doctest::Approx(0.4 - 1.125));
  // Alternate form: 2A + (s^2 - s^2)
  CHECK(per_mode_cost(mult, 1, CriterionForm::kStabilization) == doctest::Approx(0.8));
  const auto zero = scalar_lin([](Mode) { return 0.0; }, [](Mode) { return 0.0; },
                               SparseGenerator::switched_ou_limit());
  CHECK(per_mode_cost(zero, 3) == 0.0);
}

TEST_CASE("two-dimensional cost with diagonal noise") {
  Matrix b(2, 2);
  b << -2.0, 1.0, 0.0, -1.0;
  Matrix s1 = Matrix::Zero(2, 2), s2 = Matrix::Zero(2, 2);
  s1(0, 0) = 0.5;
  s2(1, 1) = 0.8;
  Linearization lin{.drift_matrix = [b](Mode) { return b; },
                    .noise_matrices = [s1, s2](Mode) { return std::vector<Matrix>{s1, s2}; },
                    .qhat = SparseGenerator::switched_ou_limit(),
                    .coeff_bound = 5.0};
  // Symmetric part [[-2, .5], [.5, -1]]: largest eigenvalue (-3 + sqrt(2)) / 2.
  // a = diag(.25, .64); each rho of a rank-one diagonal is 0.
  const double expect = (-3.0 + std::sqrt(2.0)) / 2.0 + 0.64 / 2.0;
  CHECK(per_mode_cost(lin, 1) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("recurrence certificates") {
  SwitchedOuParams p;
  const auto ou = make_switched_ou(p);
  const auto cert = certify_recurrence(ou.lin, 30);
  CHECK(std::abs(cert.partial_sum + 1.0) < 1e-9);
  CHECK(cert.verdict == Verdict::kPositiveRecurrentCertified);
  CHECK(cert.tail_source == "extrapolated");
  CHECK(cert.tail_bound >= 0.0);
  CHECK(cert.per_mode_c.size() == 30);

  const auto unstable = scalar_lin([](Mode) { return 1.0; }, [](Mode) { return 0.0; },
                                   SparseGenerator::switched_ou_limit());
  const auto bad = certify_recurrence(unstable, 30);
  CHECK(bad.partial_sum == doctest::Approx(1.0));
  CHECK(bad.verdict == Verdict::kInconclusive);

  // Diagonal noise whose rho vanishes, drift strong enough to dominate.
  Matrix s1 = Matrix::Zero(2, 2), s2 = Matrix::Zero(2, 2);
  s1(0, 0) = 1.0;
  s2(1, 1) = 0.5;
  Linearization ex52{.drift_matrix = [](Mode) { return Matrix(-2.0 * Matrix::Identity(2, 2)); },
                     .noise_matrices = [s1, s2](Mode) { return std::vector<Matrix>{s1, s2}; },
                     .qhat = SparseGenerator::controlled_scalar_limit(),
                     .coeff_bound = 2.0};
  const auto c52 = certify_recurrence(ex52, 30);
  CHECK(c52.partial_sum == doctest::Approx(-2.0 + 0.5).epsilon(1e-9));
  CHECK(c52.verdict == Verdict::kPositiveRecurrentCertified);
}

TEST_CASE("failed assumption flag blocks the verdict") {
  const auto ou = make_switched_ou({});
  CertifyOptions opts;
  opts.flags.push_back({"elliptic", false, "not asserted"});
  CHECK(certify_recurrence(ou.lin, 30, opts).verdict == Verdict::kInconclusive);
  opts.flags.back().passed = true;
  CHECK(certify_recurrence(ou.lin, 30, opts).verdict == Verdict::kPositiveRecurrentCertified);
}

TEST_CASE("decision rule and margin") {
  CHECK(decide(-1.0, 0.0, 0.1, {}) == Verdict::kPositiveRecurrentCertified);
  CHECK(decide(-1.0, 0.95, 0.1, {}) == Verdict::kInconclusive);  // -0.05 < 10% of 1
  CHECK(decide(-1.0, 0.85, 0.1, {}) == Verdict::kPositiveRecurrentCertified);
  CHECK(decide(0.0, 0.0, 0.1, {}) == Verdict::kInconclusive);
  CHECK(to_string(Verdict::kPositiveRecurrentCertified) == "POSITIVE_RECURRENT_CERTIFIED");
  CHECK(form_from_string("thm41") == CriterionForm::kStabilization);
  CHECK_THROWS_AS(form_from_string("thm99"), std::invalid_argument);
  CHECK_THROWS_AS(certify_recurrence(make_switched_ou({}).lin, 30, {.tail_mass_bound = 1.5}),
                  std::invalid_argument);
}

TEST_CASE("stabilization hand sums") {
  const auto lin = ex53_lin();
  const auto good = certify_stabilization(lin, ex53_plan(3.0), 30);
  CHECK(std::abs(good.partial_sum + 0.5) < 1e-9);
  CHECK(good.verdict == Verdict::kPositiveRecurrentCertified);
  const auto weak = certify_stabilization(lin, ex53_plan(1.0), 30);
  CHECK(std::abs(weak.partial_sum - 0.5) < 1e-9);
  CHECK(weak.verdict == Verdict::kInconclusive);

  // Zero gains reduce to the recurrence certificate.
  const auto ou = make_switched_ou({});
  GainPlan none{.controllable = {1}, .input_matrix = [](Mode) { return scalar(1.0); },
                .gains = {{1, scalar(0.0)}}};
  const auto a = certify_stabilization(ou.lin, none, 30);
  const auto b = certify_recurrence(ou.lin, 30);
  CHECK(a.partial_sum == b.partial_sum);
  CHECK(a.tail_bound == b.tail_bound);
  CHECK(a.verdict == b.verdict);

  GainPlan wrong{.controllable = {1}, .input_matrix = [](Mode) { return scalar(1.0); },
                 .gains = {{2, scalar(1.0)}}};
  CHECK_THROWS_AS(certify_stabilization(lin, wrong, 30), std::invalid_argument);
}

TEST_CASE("partial sum is nonincreasing in the scalar gain") {
  const auto lin = ex53_lin();
  double prev = INFINITY;
  for (double g = 0.0; g <= 6.0; g += 0.25) {
    const double s = certify_stabilization(lin, ex53_plan(g), 30).partial_sum;
    CHECK(s <= prev + 1e-15);
    prev = s;
  }
}

TEST_CASE("gain search") {
  const auto lin = ex53_lin();
  const auto plan = search_gain(lin, [](Mode) { return scalar(1.0); }, {1}, 30);
  REQUIRE(plan.has_value());
  const double g = plan->gain(1)(0, 0);
  CHECK(g > 2.0);
  // The previous grid point did not certify.
  CHECK(certify_stabilization(lin, ex53_plan(g / 1.25), 30).verdict == Verdict::kInconclusive);

  const auto ou = make_switched_ou({});
  const auto zero = search_gain(ou.lin, [](Mode) { return scalar(1.0); }, {1}, 30);
  REQUIRE(zero.has_value());
  CHECK(zero->gain(1).isZero());

  CHECK_FALSE(search_gain(lin, [](Mode) { return scalar(0.0); }, {1}, 30).has_value());
  CHECK_THROWS_AS(search_gain(lin, [](Mode) { return scalar(1.0); }, {}, 30), std::invalid_argument);
}

TEST_CASE("verdict is invariant under relabelling modes") {
  // Swap modes 1 and 2 in the switched OU limit and in the costs.
  auto perm = [](Mode i) -> Mode { return i == 1 ? 2 : (i == 2 ? 1 : i); };
  const auto base = SparseGenerator::switched_ou_limit();
  SparseGenerator swapped(
      [base, perm](Mode i, RateRow& out) {
        base.row(perm(i), out);
        for (auto& e : out) e.to = perm(e.to);
      },
      base.rate_bound());
  auto cost = [](Mode i) { return i == 1 ? -3.0 : (i == 2 ? 0.5 : -0.2); };
  const auto a = certify_recurrence(scalar_lin(cost, [](Mode) { return 0.0; }, base), 30);
  const auto b = certify_recurrence(
      scalar_lin([cost, perm](Mode i) { return cost(perm(i)); }, [](Mode) { return 0.0; }, swapped), 30);
  CHECK(a.partial_sum == doctest::Approx(b.partial_sum).epsilon(1e-12));
  CHECK(a.verdict == b.verdict);
}

TEST_CASE("larger truncation does not break the certificate") {
  const auto ou = make_switched_ou({});
  for (Mode N : {20, 30, 40, 60}) {
    const auto c = certify_recurrence(ou.lin, N);
    CHECK(c.partial_sum + c.tail_bound < 0.0);
  }
}
