#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pdswitch/chain.hpp"
#include "pdswitch/model.hpp"

namespace pdswitch {

enum class Verdict { kPositiveRecurrentCertified, kInconclusive };
// kRecurrence: Lambda_b + Lambda_a / 2 - sum rho^2 with a = sum sigma_j^T sigma_j.
// kStabilization: 2 Lambda_b + sum_j (Lambda_{a_j} - rho_j^2) with a_j = sigma_j^T sigma_j.
enum class CriterionForm { kRecurrence, kStabilization };

std::string to_string(Verdict v);
std::string to_string(CriterionForm f);
CriterionForm form_from_string(const std::string& s);  // "thm37" | "thm41"

struct AssumptionFlag {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Certificate {
  std::vector<double> per_mode_c;  // c(i) for modes 1..N
  StationaryDist nu;
  double partial_sum = 0.0;
  double tail_mass = 0.0;
  std::string tail_source;  // "user", "extrapolated" or "exact"
  double tail_bound = 0.0;
  double margin = 0.1;
  Verdict verdict = Verdict::kInconclusive;
  CriterionForm form = CriterionForm::kRecurrence;
  std::vector<AssumptionFlag> assumption_flags;
};

struct CertifyOptions {
  std::optional<double> tail_mass_bound;  // in [0, 1); extrapolated from nu when absent
  double margin = 0.1;                    // required -(sum + tail) >= margin * |sum|
  std::vector<AssumptionFlag> flags;
};

/// u = -L(a) X on the controllable modes; L(i) = 0 elsewhere.
struct GainPlan {
  std::set<Mode> controllable;
  std::function<Matrix(Mode)> input_matrix;  // B(i)
  std::map<Mode, Matrix> gains;              // L(i) for i in controllable

  Matrix gain(Mode i) const;
  // Throws std::invalid_argument on a nonzero gain outside the controllable set.
  void validate() const;
};

double per_mode_cost(const Linearization& lin, Mode i,
                     CriterionForm form = CriterionForm::kRecurrence);

// sum_i nu_i c(i), accumulated in index order.
double criterion_sum(std::span<const double> nu, std::span<const double> c);

/// Decides the verdict from the weighted sum and the tail bound.
Verdict decide(double partial_sum, double tail_bound, double margin,
               std::span<const AssumptionFlag> flags);

Certificate certify_recurrence(const Linearization& lin, Mode N, const CertifyOptions& opts = {});

Certificate certify_stabilization(const Linearization& lin, const GainPlan& plan, Mode N,
                                  const CertifyOptions& opts = {},
                                  CriterionForm form = CriterionForm::kRecurrence);

// Linearization with b(i) replaced by b(i) - B(i) L(i) on the controllable modes.
Linearization close_loop(const Linearization& lin, const GainPlan& plan);

struct GainSearchOptions {
  double g_min = 1e-2;
  double growth = 1.25;
  double budget = 1e3;  // largest gain tried
  double margin = 0.1;
  std::optional<double> tail_mass_bound;
};

/// Line search over L(i) = g I on a geometric grid, the same g for every
/// controllable mode. Returns the zero-gain plan if that already certifies,
/// the first certifying plan otherwise, or nullopt when the budget runs out.
std::optional<GainPlan> search_gain(const Linearization& lin,
                                    std::function<Matrix(Mode)> input_matrix,
                                    const std::set<Mode>& controllable, Mode N,
                                    const GainSearchOptions& opts = {});

}  // namespace pdswitch
