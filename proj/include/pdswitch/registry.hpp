#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdswitch/model.hpp"

namespace pdswitch {

/// Per-mode parameter: value k applies to mode k + 1, and the last value
/// extends to every higher mode. A scalar is a one-element list.
class ModeValues {
 public:
  ModeValues() : values_{0.0} {}
  ModeValues(double v) : values_{v} {}  // NOLINT(google-explicit-constructor)
  explicit ModeValues(std::vector<double> v);

  double operator()(Mode i) const {
    const auto k = static_cast<std::size_t>(std::min<Mode>(i, static_cast<Mode>(values_.size())));
    return values_[k - 1];
  }
  double max_abs() const;
  double min() const;
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

// Feedback data for u = -L(a) X: input matrices B(i) and the controllable modes.
struct ControlSpec {
  std::function<Matrix(Mode)> input_matrix;  // B(i), n x m
  std::set<Mode> controllable;               // M1; modes outside are uncontrolled
  std::map<Mode, Matrix> gains;              // configured L(i), m x n
};

struct RegisteredModel {
  ModelSpec model;
  // Open-loop linearization: configured feedback gains are not folded in.
  Linearization lin;
  std::optional<ControlSpec> control;
};

struct SwitchedOuParams {
  ModeValues theta{1.0}, mu{0.0}, sigma{1.0}, c{1.0};
  double delay = 1.0;
};

struct ControlledScalarParams {
  ModeValues A{1.0}, B{1.0}, C{0.0}, sigma{0.0}, c{1.0}, L{0.0};
  std::set<Mode> controllable{1};
  double delay = 1.0;
};

struct Linear2dParams {
  std::vector<Matrix> B{-Matrix::Identity(2, 2)};  // 2 x 2 per mode, last extends
  std::vector<Vector> A{Vector::Ones(2)};          // 2-vectors per mode, last extends
  ModeValues c1{1.0}, c2{1.0};
  std::string generator = "controlled_scalar";  // family name
  std::vector<Triplet> triplets;                // used instead of the family when nonempty
  double delay = 1.0;
};

struct FluidQueueParams {
  ModeValues f{1.0};  // net fill rate per mode
  double up = 1.0;
  double down = 2.0;
  double congestion = 1.0;  // kappa: down rate is down * (1 + kappa * m / (1 + m)), m = window mean
  double delay = 1.0;
};

struct PredatorPreyParams {
  double beta = 1.0, delta = 0.5, c = 0.1, B = 0.2, D = 0.5, C = 0.1, rho = 1.0, sigma = 0.2;
  std::vector<WeightPoint> weights;  // discrete measure mu on [-r, 0]; default point mass at -r
  Mode max_prey = 50;                // births stop here so rates stay bounded
  double functional_cap = 100.0;     // clamp for the history functional
  double delay = 1.0;
};

RegisteredModel make_switched_ou(const SwitchedOuParams& p);
RegisteredModel make_controlled_scalar(const ControlledScalarParams& p);
RegisteredModel make_linear_2d(const Linear2dParams& p);
RegisteredModel make_fluid_queue(const FluidQueueParams& p);
RegisteredModel make_predator_prey(const PredatorPreyParams& p);

/// Builds a registered family from JSON parameters. Names: fluid_queue,
/// predator_prey, switched_ou, linear_2d, controlled_scalar. Throws
/// std::invalid_argument on unknown names or invalid parameters.
RegisteredModel registry_get(const std::string& name, const nlohmann::json& params);

std::vector<std::string> registry_names();

}  // namespace pdswitch
