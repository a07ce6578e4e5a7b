#include "pdswitch/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace pdswitch {

Vector ModelSpec::eval_drift(const Vector& x, Mode i) const {
  if (x.size() != dim) throw std::invalid_argument(name + ": state has wrong dimension");
  Vector out = Vector::Zero(dim);
  drift(x, i, out);
  if (out.size() != dim) throw std::logic_error(name + ": drift returned wrong shape");
  return out;
}

Matrix ModelSpec::eval_diffusion(const Vector& x, Mode i) const {
  if (x.size() != dim) throw std::invalid_argument(name + ": state has wrong dimension");
  Matrix out = Matrix::Zero(dim, brownian_dim);
  diffusion(x, i, out);
  if (out.rows() != dim || out.cols() != brownian_dim) {
    throw std::logic_error(name + ": diffusion returned wrong shape");
  }
  return out;
}

RateRow ModelSpec::eval_rates(const Segment& phi, Mode i) const {
  if (i < 1) throw std::out_of_range(name + ": modes start at 1");
  RateRow out;
  rates(phi, i, out);
  return out;
}

void ModelSpec::validate() const {
  if (dim < 1 || brownian_dim < 1) throw std::invalid_argument(name + ": dimensions must be positive");
  if (!(delay > 0.0)) throw std::invalid_argument(name + ": delay must be positive");
  if (!(rate_bound > 0.0) || !std::isfinite(rate_bound)) {
    throw std::invalid_argument(name + ": rate bound must be positive and finite");
  }
  if (!drift || !diffusion || !rates) throw std::invalid_argument(name + ": missing coefficient");
}

Vector residual_drift(const ModelSpec& m, const Linearization& lin, const Vector& x, Mode i) {
  const Matrix b = lin.drift_matrix(i);
  if (b.rows() != m.dim || b.cols() != m.dim) {
    throw std::invalid_argument("residual_drift: linear drift matrix has wrong shape");
  }
  return m.eval_drift(x, i) - b * x;
}

Matrix residual_diffusion(const ModelSpec& m, const Linearization& lin, const Vector& x,
                          Mode i) {
  Matrix s = m.eval_diffusion(x, i);
  const auto sig = lin.noise_matrices(i);
  if (static_cast<int>(sig.size()) != m.brownian_dim) {
    throw std::invalid_argument("residual_diffusion: need one noise matrix per Brownian component");
  }
  for (int k = 0; k < m.brownian_dim; ++k) {
    if (sig[k].rows() != m.dim || sig[k].cols() != m.dim) {
      throw std::invalid_argument("residual_diffusion: noise matrix has wrong shape");
    }
    s.col(k) -= sig[k] * x;
  }
  return s;
}

namespace {

bool nonincreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[k - 1] * (1.0 + 1e-12) + 1e-300) return false;
  }
  return true;
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(6);
  for (std::size_t k = 0; k < v.size(); ++k) os << (k ? ", " : "") << v[k];
  return os.str();
}

}  // namespace

CheckReport check_sublinear_residuals(const ModelSpec& m, const Linearization& lin,
                                      std::span<const Vector> ray_dirs,
                                      std::span<const double> radii,
                                      std::span<const Mode> modes, double tol) {
  CheckReport rep{.name = "sublinear_residuals"};
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0) || (k > 0 && !(radii[k] > radii[k - 1]))) {
      throw std::invalid_argument("check_sublinear_residuals: radii must be positive and increasing");
    }
  }
  for (double R : radii) {
    double worst = 0.0;
    for (const auto& dir : ray_dirs) {
      const Vector x = R * dir.normalized();
      for (Mode i : modes) {
        const double b = residual_drift(m, lin, x, i).norm();
        const double s = residual_diffusion(m, lin, x, i).norm();
        worst = std::max(worst, std::max(b, s) / x.norm());
      }
    }
    rep.probes.push_back(R);
    rep.values.push_back(worst);
  }
  rep.passed = !rep.values.empty() && nonincreasing(rep.values) && rep.values.back() < tol;
  rep.detail = "ratios [" + join(rep.values) + "], tol " + std::to_string(tol);
  return rep;
}

CheckReport check_rate_convergence(const ModelSpec& m, const Linearization& lin, double radius,
                                   std::span<const Mode> modes, int n_probe) {
  if (!(radius > 0.0)) throw std::invalid_argument("check_rate_convergence: radius must be positive");
  CheckReport rep{.name = "rate_convergence"};
  RateRow q, qh;
  // Grid step does not matter for constant segments; one interval suffices.
  const double dt = m.delay;
  for (int k = 0; k < std::max(1, n_probe); ++k) {
    const double R = radius * std::pow(10.0, k);
    double worst = 0.0;
    for (int axis = 0; axis < m.dim; ++axis) {
      for (double sign : {1.0, -1.0}) {
        Vector x = Vector::Zero(m.dim);
        x[axis] = sign * R;
        if (m.project) {
          // Points outside a constrained state space are never visited.
          Vector y = x;
          m.project(y);
          if (y != x) continue;
        }
        const Segment phi = Segment::constant(x, m.delay, dt);
        for (Mode i : modes) {
          q.clear();
          m.rates(phi, i, q);
          lin.qhat.row(i, qh);
          // Merge the two sparse rows.
          double dev = 0.0;
          for (const auto& e : q) {
            double hat = 0.0;
            for (const auto& h : qh) {
              if (h.to == e.to) hat += h.rate;
            }
            dev += std::abs(e.rate - hat);
          }
          for (const auto& h : qh) {
            const bool seen = std::any_of(q.begin(), q.end(), [&](const RateEntry& e) { return e.to == h.to; });
            if (!seen) dev += h.rate;
          }
          worst = std::max(worst, dev);
        }
      }
    }
    rep.probes.push_back(R);
    rep.values.push_back(worst);
  }
  const bool decreasing = nonincreasing(rep.values) &&
                          (rep.values.back() < rep.values.front() || rep.values.front() == 0.0);
  rep.passed = decreasing;
  rep.detail = "row deviations [" + join(rep.values) + "]";
  return rep;
}

bool check_drift_condition(const std::function<void(const Segment&, Mode, RateRow&)>& rows,
                           const DriftWeights& w, std::span<const Mode> probe_modes,
                           std::span<const Segment> probe_segments) {
  if (!w.eta) throw std::invalid_argument("check_drift_condition: missing eta");
  auto eta = [&](Mode j) {
    if (j <= w.k0) return 0.0;
    const double v = w.eta(j);
    if (!std::isfinite(v) || v < 0.0 || v > w.bound) {
      throw std::domain_error("check_drift_condition: eta unbounded or negative at mode " +
                              std::to_string(j));
    }
    return v;
  };
  RateRow row;
  for (const auto& phi : probe_segments) {
    for (Mode i : probe_modes) {
      if (i <= w.k0) continue;
      row.clear();
      rows(phi, i, row);
      double s = -total_rate(row) * eta(i);
      for (const auto& e : row) s += e.rate * eta(e.to);
      if (s > -1.0 + 1e-12) return false;
    }
  }
  return true;
}

bool check_drift_condition(const SparseGenerator& qhat, const DriftWeights& w,
                           std::span<const Mode> probe_modes) {
  const Segment dummy = Segment::constant(Vector::Zero(1), 1.0, 1.0);
  return check_drift_condition([&](const Segment&, Mode i, RateRow& out) { qhat.row(i, out); },
                               w, probe_modes, std::span<const Segment>(&dummy, 1));
}

CheckReport check_rate_bound(const ModelSpec& m, std::span<const Segment> probe_segments,
                             std::span<const Mode> modes) {
  CheckReport rep{.name = "rate_bound", .passed = true};
  RateRow row;
  double worst = 0.0;
  for (const auto& phi : probe_segments) {
    for (Mode i : modes) {
      row.clear();
      m.rates(phi, i, row);
      for (const auto& e : row) {
        if (!(e.rate >= 0.0) || e.to < 1 || e.to == i) {
          rep.passed = false;
          rep.detail = "invalid off-diagonal entry in row " + std::to_string(i);
        }
      }
      worst = std::max(worst, total_rate(row));
    }
  }
  rep.probes.push_back(m.rate_bound);
  rep.values.push_back(worst);
  if (worst > m.rate_bound * (1.0 + 1e-12)) rep.passed = false;
  if (rep.detail.empty()) {
    rep.detail = "max total rate " + std::to_string(worst) + " vs bound " + std::to_string(m.rate_bound);
  }
  return rep;
}

CheckReport check_local_lipschitz(const ModelSpec& m, double H, std::span<const Mode> modes,
                                  int n_probe, std::uint64_t seed, double limit) {
  CheckReport rep{.name = "local_lipschitz"};
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto draw = [&] {
    Vector v(m.dim);
    for (int k = 0; k < m.dim; ++k) v[k] = normal(gen);
    const double rad = H * std::pow(unif(gen), 1.0 / m.dim);
    return Vector(v.normalized() * rad);
  };
  double worst = 0.0;
  for (Mode i : modes) {
    for (int p = 0; p < n_probe; ++p) {
      const Vector x = draw();
      Vector dir(m.dim);
      for (int k = 0; k < m.dim; ++k) dir[k] = normal(gen);
      const double h = 1e-6 * std::max(1.0, H);
      Vector y = x + h * dir.normalized();
      if (y.norm() > H) y = x - h * dir.normalized();
      const double dx = (x - y).norm();
      const double db = (m.eval_drift(x, i) - m.eval_drift(y, i)).norm();
      const double ds = (m.eval_diffusion(x, i) - m.eval_diffusion(y, i)).norm();
      worst = std::max(worst, (db + ds) / dx);
    }
  }
  rep.probes.push_back(H);
  rep.values.push_back(worst);
  rep.passed = std::isfinite(worst) && worst <= limit;
  rep.detail = "max difference quotient " + std::to_string(worst);
  return rep;
}

CheckReport check_coefficient_bound(const Linearization& lin, std::span<const Mode> modes) {
  CheckReport rep{.name = "coefficient_bound"};
  double worst = 0.0;
  auto spectral = [](const Matrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
  };
  for (Mode i : modes) {
    worst = std::max(worst, spectral(lin.drift_matrix(i)));
    for (const auto& s : lin.noise_matrices(i)) worst = std::max(worst, spectral(s));
  }
  rep.probes.push_back(lin.coeff_bound);
  rep.values.push_back(worst);
  rep.passed = worst <= lin.coeff_bound * (1.0 + 1e-12) + 1e-15;
  rep.detail = "max matrix norm " + std::to_string(worst);
  return rep;
}

ModelSpec make_linear_plus_residual(std::string name, const Linearization& lin, int brownian_dim,
                                    ModelSpec::DriftFn residual_drift_fn,
                                    ModelSpec::DiffusionFn residual_diffusion_fn,
                                    ModelSpec::RatesFn rates, double rate_bound, double delay) {
  ModelSpec m;
  m.name = std::move(name);
  m.dim = static_cast<int>(lin.drift_matrix(1).rows());
  m.brownian_dim = brownian_dim;
  m.delay = delay;
  m.rate_bound = rate_bound;
  m.rates = std::move(rates);
  m.drift = [lin, res = std::move(residual_drift_fn)](const Vector& x, Mode i, Vector& out) {
    out.noalias() = lin.drift_matrix(i) * x;
    if (res) {
      Vector extra = Vector::Zero(x.size());
      res(x, i, extra);
      out += extra;
    }
  };
  m.diffusion = [lin, res = std::move(residual_diffusion_fn), brownian_dim](
                    const Vector& x, Mode i, Matrix& out) {
    const auto sig = lin.noise_matrices(i);
    for (int k = 0; k < brownian_dim; ++k) out.col(k).noalias() = sig[k] * x;
    if (res) {
      Matrix extra = Matrix::Zero(x.size(), brownian_dim);
      res(x, i, extra);
      out += extra;
    }
  };
  m.validate();
  return m;
}

}  // namespace pdswitch
