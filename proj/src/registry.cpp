#include "pdswitch/registry.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace pdswitch {

using nlohmann::json;

ModeValues::ModeValues(std::vector<double> v) : values_(std::move(v)) {
  if (values_.empty()) throw std::invalid_argument("per-mode parameter list is empty");
  for (double x : values_) {
    if (!std::isfinite(x)) throw std::invalid_argument("per-mode parameter is not finite");
  }
}

double ModeValues::max_abs() const {
  double m = 0.0;
  for (double x : values_) m = std::max(m, std::abs(x));
  return m;
}

double ModeValues::min() const { return *std::min_element(values_.begin(), values_.end()); }

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// Q(phi) of the switched OU example: every listed target j gets
// 1 + c_i / (|phi| + 1).
void switched_ou_targets(Mode i, double rate, RateRow& out) {
  if (i == 1) {
    out.push_back({2, rate});
    out.push_back({3, rate});
  } else if (i == 2) {
    out.push_back({1, rate});
    out.push_back({3, rate});
  } else {
    out.push_back({1, rate});
    out.push_back({2, rate});
    out.push_back({i + 1, rate});
  }
}

std::vector<Matrix> zero_noise(int n, int d) { return std::vector<Matrix>(d, Matrix::Zero(n, n)); }

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

RegisteredModel make_switched_ou(const SwitchedOuParams& p) {
  require(p.c.min() > 0.0, "switched_ou: c_i must be positive");
  require(p.delay > 0.0, "switched_ou: delay must be positive");
  ModelSpec m;
  m.name = "switched_ou";
  m.dim = 1;
  m.brownian_dim = 1;
  m.delay = p.delay;
  m.rate_bound = 3.0 * (1.0 + p.c.max_abs());
  m.drift = [p](const Vector& x, Mode i, Vector& out) { out[0] = p.theta(i) * (p.mu(i) - x[0]); };
  m.diffusion = [p](const Vector&, Mode i, Matrix& out) { out(0, 0) = p.sigma(i); };
  m.rates = [p](const Segment& phi, Mode i, RateRow& out) {
    switched_ou_targets(i, 1.0 + p.c(i) / (phi.sup_norm() + 1.0), out);
  };
  m.validate();

  Linearization lin{
      .drift_matrix = [p](Mode i) { return scalar(-p.theta(i)); },
      .noise_matrices = [](Mode) { return zero_noise(1, 1); },
      .qhat = SparseGenerator::switched_ou_limit(),
      .coeff_bound = p.theta.max_abs(),
  };
  return {std::move(m), std::move(lin), std::nullopt};
}

RegisteredModel make_controlled_scalar(const ControlledScalarParams& p) {
  require(p.c.min() > 0.0, "controlled_scalar: c_i must be positive");
  require(p.delay > 0.0, "controlled_scalar: delay must be positive");
  // Gains only act on controllable modes; an explicit nonzero entry elsewhere is an error.
  for (std::size_t k = 0; k < p.L.values().size(); ++k) {
    const auto i = static_cast<Mode>(k + 1);
    require(p.L.values()[k] == 0.0 || p.controllable.count(i) > 0,
            "controlled_scalar: nonzero gain L(" + std::to_string(i) + ") on an uncontrolled mode");
  }
  const auto gain = [p](Mode i) { return p.controllable.count(i) ? p.L(i) : 0.0; };

  ModelSpec m;
  m.name = "controlled_scalar";
  m.dim = 1;
  m.brownian_dim = 2;
  m.delay = p.delay;
  m.rate_bound = 2.0;
  m.drift = [p, gain](const Vector& x, Mode i, Vector& out) {
    out[0] = p.C(i) + (p.A(i) - p.B(i) * gain(i)) * x[0];
  };
  m.diffusion = [p](const Vector& x, Mode i, Matrix& out) {
    out(0, 0) = p.sigma(i) * x[0];
    out(0, 1) = 1.0;
  };
  // Q(phi) = Q~(|phi(-r)|).
  m.rates = [p](const Segment& phi, Mode i, RateRow& out) {
    const double x = phi.oldest().norm();
    const double q = x / (p.c(i) + x);
    if (i == 1) {
      out.push_back({2, q});
    } else {
      out.push_back({1, q});
      out.push_back({i + 1, q});
    }
  };
  m.validate();

  Linearization lin{
      .drift_matrix = [p](Mode i) { return scalar(p.A(i)); },
      .noise_matrices = [p](Mode i) { return std::vector<Matrix>{scalar(p.sigma(i)), scalar(0.0)}; },
      .qhat = SparseGenerator::controlled_scalar_limit(),
      .coeff_bound = std::max(p.A.max_abs(), p.sigma.max_abs()),
  };

  ControlSpec ctl;
  ctl.input_matrix = [p](Mode i) { return scalar(p.B(i)); };
  ctl.controllable = p.controllable;
  for (Mode i : p.controllable) ctl.gains[i] = scalar(p.L(i));
  return {std::move(m), std::move(lin), std::move(ctl)};
}

RegisteredModel make_linear_2d(const Linear2dParams& p) {
  require(!p.B.empty() && !p.A.empty(), "linear_2d: B and A must be nonempty");
  for (const auto& b : p.B) require(b.rows() == 2 && b.cols() == 2, "linear_2d: B(i) must be 2x2");
  for (const auto& a : p.A) require(a.size() == 2, "linear_2d: A(i) must have 2 entries");
  require(p.delay > 0.0, "linear_2d: delay must be positive");
  SparseGenerator qhat = p.triplets.empty() ? SparseGenerator::family(p.generator)
                                            : SparseGenerator::from_triplets(p.triplets);
  auto pick = [](const auto& v, Mode i) {
    return v[static_cast<std::size_t>(std::min<Mode>(i, static_cast<Mode>(v.size())) - 1)];
  };

  ModelSpec m;
  m.name = "linear_2d";
  m.dim = 2;
  m.brownian_dim = 2;
  m.delay = p.delay;
  m.rate_bound = std::max(qhat.rate_bound(), 1e-12);
  m.drift = [p, pick](const Vector& x, Mode i, Vector& out) {
    out.noalias() = pick(p.B, i) * x;
    out += pick(p.A, i) / (1.0 + x.norm());
  };
  m.diffusion = [p](const Vector& x, Mode i, Matrix& out) {
    const double l1 = std::abs(x[0]) + std::abs(x[1]);
    const double s = l1 / (2.0 + l1);
    out.setZero();
    out(0, 0) = s * p.c1(i) * x[0];
    out(1, 1) = s * p.c2(i) * x[1];
  };
  m.rates = [qhat](const Segment&, Mode i, RateRow& out) { qhat.row(i, out); };
  m.validate();

  double bound = std::max(p.c1.max_abs(), p.c2.max_abs());
  for (const auto& b : p.B) bound = std::max(bound, Eigen::JacobiSVD<Matrix>(b).singularValues()(0));
  Linearization lin{
      .drift_matrix = [p, pick](Mode i) { return Matrix(pick(p.B, i)); },
      .noise_matrices =
          [p](Mode i) {
            Matrix s1 = Matrix::Zero(2, 2), s2 = Matrix::Zero(2, 2);
            s1(0, 0) = p.c1(i);
            s2(1, 1) = p.c2(i);
            return std::vector<Matrix>{s1, s2};
          },
      .qhat = qhat,
      .coeff_bound = bound,
  };
  return {std::move(m), std::move(lin), std::nullopt};
}

RegisteredModel make_fluid_queue(const FluidQueueParams& p) {
  require(p.up > 0.0 && p.down > 0.0, "fluid_queue: up and down rates must be positive");
  require(p.congestion >= 0.0, "fluid_queue: congestion must be nonnegative");
  require(p.delay > 0.0, "fluid_queue: delay must be positive");
  ModelSpec m;
  m.name = "fluid_queue";
  m.dim = 1;
  m.brownian_dim = 1;
  m.delay = p.delay;
  m.rate_bound = p.up + p.down * (1.0 + p.congestion);
  m.drift = [p](const Vector& x, Mode i, Vector& out) {
    const double f = p.f(i);
    out[0] = x[0] > 0.0 ? f : std::max(f, 0.0);
  };
  m.diffusion = [](const Vector&, Mode, Matrix& out) { out.setZero(); };
  m.rates = [p](const Segment& phi, Mode i, RateRow& out) {
    double mean = 0.0;
    for (std::size_t k = 0; k < phi.size(); ++k) mean += phi.sample(k)[0];
    mean = std::max(mean / static_cast<double>(phi.size()), 0.0);
    if (i > 1) out.push_back({i - 1, p.down * (1.0 + p.congestion * mean / (1.0 + mean))});
    out.push_back({i + 1, p.up});
  };
  m.project = [](Vector& x) { x[0] = std::max(x[0], 0.0); };
  m.validate();

  Linearization lin{
      .drift_matrix = [](Mode) { return scalar(0.0); },
      .noise_matrices = [](Mode) { return zero_noise(1, 1); },
      .qhat = SparseGenerator::birth_death(p.up, p.down * (1.0 + p.congestion)),
      .coeff_bound = 0.0,
  };
  return {std::move(m), std::move(lin), std::nullopt};
}

RegisteredModel make_predator_prey(const PredatorPreyParams& p) {
  require(p.beta > 0.0 && p.delta >= 0.0 && p.c >= 0.0 && p.B >= 0.0,
          "predator_prey: birth/death/competition/predation rates must be nonnegative (beta > 0)");
  require(p.max_prey >= 2, "predator_prey: max_prey must be at least 2");
  require(p.functional_cap > 0.0, "predator_prey: functional_cap must be positive");
  require(p.delay > 0.0, "predator_prey: delay must be positive");
  std::vector<WeightPoint> weights = p.weights;
  if (weights.empty()) weights.push_back({-p.delay, 1.0});
  for (const auto& w : weights) {
    require(w.s >= -p.delay && w.s <= 0.0, "predator_prey: weight location outside [-r, 0]");
  }

  ModelSpec m;
  m.name = "predator_prey";
  m.dim = 1;
  m.brownian_dim = 1;
  m.delay = p.delay;
  const auto n = static_cast<double>(p.max_prey);
  m.rate_bound = p.beta * n + n * (p.delta + p.c * n + p.B * p.functional_cap);
  m.drift = [p](const Vector& x, Mode i, Vector& out) {
    out[0] = x[0] * (p.rho * p.B * static_cast<double>(i) - p.D - p.C * x[0]);
  };
  m.diffusion = [p](const Vector& x, Mode, Matrix& out) { out(0, 0) = p.sigma * x[0]; };
  m.rates = [p, weights](const Segment& phi, Mode i, RateRow& out) {
    const double f = std::clamp(phi.integrate_against(weights)[0], 0.0, p.functional_cap);
    const auto k = static_cast<double>(i);
    if (i > 1) out.push_back({i - 1, k * (p.delta + p.c * k + p.B * f)});
    if (i < p.max_prey) out.push_back({i + 1, p.beta * k});
  };
  m.validate();

  Linearization lin{
      .drift_matrix =
          [p](Mode i) {
            const auto k = static_cast<double>(std::min(i, p.max_prey));
            return scalar(p.rho * p.B * k - p.D);
          },
      .noise_matrices = [p](Mode) { return std::vector<Matrix>{scalar(p.sigma)}; },
      .qhat = SparseGenerator(
          [p](Mode i, RateRow& out) {
            const auto k = static_cast<double>(i);
            if (i > 1) out.push_back({i - 1, k * (p.delta + p.c * k + p.B * p.functional_cap)});
            if (i < p.max_prey) out.push_back({i + 1, p.beta * k});
          },
          p.beta * n + n * (p.delta + p.c * n + p.B * p.functional_cap), p.max_prey, "predator_prey"),
      .coeff_bound = std::max(std::abs(p.rho * p.B * n - p.D), std::abs(p.D)) + std::abs(p.sigma),
  };
  return {std::move(m), std::move(lin), std::nullopt};
}

namespace {

ModeValues mode_values(const json& params, const char* key, ModeValues fallback) {
  if (!params.contains(key)) return fallback;
  const auto& v = params.at(key);
  if (v.is_number()) return ModeValues(v.get<double>());
  if (v.is_array()) return ModeValues(v.get<std::vector<double>>());
  throw std::invalid_argument(std::string("parameter '") + key + "' must be a number or list");
}

template <class T>
T value(const json& params, const char* key, T fallback) {
  if (!params.contains(key)) return fallback;
  try {
    return params.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("parameter '") + key + "' has the wrong type");
  }
}

Matrix matrix_from(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  require(!rows.empty(), "matrix parameter is empty");
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require(rows[r].size() == rows[0].size(), "matrix parameter is ragged");
    for (std::size_t c = 0; c < rows[r].size(); ++c) out(r, c) = rows[r][c];
  }
  return out;
}

std::vector<Triplet> triplets_from(const json& arr) {
  std::vector<Triplet> out;
  for (const auto& t : arr) {
    out.push_back({t.at("i").get<Mode>(), t.at("j").get<Mode>(), t.at("rate").get<double>()});
  }
  return out;
}

}  // namespace

RegisteredModel registry_get(const std::string& name, const json& params) {
  if (!params.is_object() && !params.is_null()) {
    throw std::invalid_argument("model params must be a JSON object");
  }
  const json ps = params.is_null() ? json::object() : params;
  try {
    if (name == "switched_ou") {
      SwitchedOuParams p;
      p.theta = mode_values(ps, "theta", p.theta);
      p.mu = mode_values(ps, "mu", p.mu);
      p.sigma = mode_values(ps, "sigma", p.sigma);
      p.c = mode_values(ps, "c", p.c);
      p.delay = value(ps, "delay", p.delay);
      return make_switched_ou(p);
    }
    if (name == "controlled_scalar") {
      ControlledScalarParams p;
      p.A = mode_values(ps, "A", p.A);
      p.B = mode_values(ps, "B", p.B);
      p.C = mode_values(ps, "C", p.C);
      p.sigma = mode_values(ps, "sigma", p.sigma);
      p.c = mode_values(ps, "c", p.c);
      p.L = mode_values(ps, "L", p.L);
      if (ps.contains("controllable")) {
        const auto v = ps.at("controllable").get<std::vector<Mode>>();
        p.controllable = std::set<Mode>(v.begin(), v.end());
      }
      p.delay = value(ps, "delay", p.delay);
      return make_controlled_scalar(p);
    }
    if (name == "linear_2d") {
      Linear2dParams p;
      if (ps.contains("B")) {
        p.B.clear();
        for (const auto& b : ps.at("B")) p.B.push_back(matrix_from(b));
      }
      if (ps.contains("A")) {
        p.A.clear();
        for (const auto& a : ps.at("A")) {
          const auto v = a.get<std::vector<double>>();
          p.A.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
        }
      }
      p.c1 = mode_values(ps, "c1", p.c1);
      p.c2 = mode_values(ps, "c2", p.c2);
      if (ps.contains("generator")) {
        const auto& g = ps.at("generator");
        if (g.is_string()) {
          p.generator = g.get<std::string>();
        } else {
          p.triplets = triplets_from(g.at("triplets"));
        }
      }
      p.delay = value(ps, "delay", p.delay);
      return make_linear_2d(p);
    }
    if (name == "fluid_queue") {
      FluidQueueParams p;
      p.f = mode_values(ps, "f", p.f);
      p.up = value(ps, "up", p.up);
      p.down = value(ps, "down", p.down);
      p.congestion = value(ps, "congestion", p.congestion);
      p.delay = value(ps, "delay", p.delay);
      return make_fluid_queue(p);
    }
    if (name == "predator_prey") {
      PredatorPreyParams p;
      p.beta = value(ps, "beta", p.beta);
      p.delta = value(ps, "delta", p.delta);
      p.c = value(ps, "c", p.c);
      p.B = value(ps, "B", p.B);
      p.D = value(ps, "D", p.D);
      p.C = value(ps, "C", p.C);
      p.rho = value(ps, "rho", p.rho);
      p.sigma = value(ps, "sigma", p.sigma);
      p.max_prey = value(ps, "max_prey", p.max_prey);
      p.functional_cap = value(ps, "functional_cap", p.functional_cap);
      p.delay = value(ps, "delay", p.delay);
      if (ps.contains("weights")) {
        for (const auto& w : ps.at("weights")) {
          p.weights.push_back({w.at(0).get<double>(), w.at(1).get<double>()});
        }
      }
      return make_predator_prey(p);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(name + ": malformed parameters: " + e.what());
  }
  throw std::invalid_argument("unknown model '" + name + "'");
}

std::vector<std::string> registry_names() {
  return {"fluid_queue", "predator_prey", "switched_ou", "linear_2d", "controlled_scalar"};
}

}  // namespace pdswitch
