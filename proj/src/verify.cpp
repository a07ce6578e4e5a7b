#include "pdswitch/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "pdswitch/parallel.hpp"

namespace pdswitch {

void RunningStats::add(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

double RunningStats::std_error() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

namespace {

// Per-path outcome: a value, or censored/blown up.
struct PathValue {
  double value = 0.0;
  bool censored = false;
  bool blown_up = false;
};

MCEstimate fold(const std::vector<PathValue>& values) {
  RunningStats stats;
  MCEstimate est;
  est.n_paths = values.size();
  std::size_t censored = 0;
  for (const auto& v : values) {
    if (v.blown_up) {
      ++est.n_blown_up;
    } else if (v.censored) {
      ++censored;
    } else {
      stats.add(v.value);
    }
  }
  est.mean = stats.mean();
  est.std_error = stats.std_error();
  est.n_samples = stats.count();
  const std::size_t valid = est.n_paths - est.n_blown_up;
  est.censored_fraction = valid ? static_cast<double>(censored) / static_cast<double>(valid) : 0.0;
  est.usable = est.n_samples > 0;
  return est;
}

// Number of trailing samples of `seg` with norm <= H.
std::size_t trailing_inside(const Segment& seg, double H) {
  std::size_t run = 0;
  for (std::size_t k = seg.size(); k-- > 0;) {
    if (seg.sample(k).norm() > H) break;
    ++run;
  }
  return run;
}

Segment constant_at_radius(const ModelSpec& m, double R, double dt) {
  Vector x = Vector::Zero(m.dim);
  x[0] = R;
  return Segment::constant(x, m.delay, dt);
}

}  // namespace

MCEstimate estimate_hitting_time(const ModelSpec& m, const Segment& phi0, Mode i0, double H,
                                 Mode k0, const EnsembleConfig& cfg, HitNorm norm) {
  if (!(H > 0.0) || k0 < 1) throw std::invalid_argument("estimate_hitting_time: need H > 0 and k0 >= 1");
  const auto n = cfg.sim.steps();
  auto values = map_paths<PathValue>(0, cfg.n_paths, cfg.threads, [&](std::uint64_t path) {
    PathStepper stepper(m, phi0, i0, cfg.sim, path);
    std::size_t inside = trailing_inside(phi0, H);
    const std::size_t needed = norm == HitNorm::kSegment ? phi0.size() : 1;
    auto hit = [&] { return inside >= needed && stepper.mode() <= k0; };
    if (hit()) return PathValue{0.0};
    for (std::int64_t k = 1; k <= n; ++k) {
      if (!stepper.step()) return PathValue{.blown_up = true};
      inside = stepper.state().norm() <= H ? inside + 1 : 0;
      if (hit()) return PathValue{stepper.time()};
    }
    return PathValue{.censored = true};
  });
  return fold(values);
}

MCEstimate estimate_mode_descent(const ModelSpec& m, const Segment& phi0, Mode i0, Mode k0,
                                 const EnsembleConfig& cfg) {
  if (k0 < 1) throw std::invalid_argument("estimate_mode_descent: k0 must be >= 1");
  const auto n = cfg.sim.steps();
  auto values = map_paths<PathValue>(0, cfg.n_paths, cfg.threads, [&](std::uint64_t path) {
    if (i0 <= k0) return PathValue{0.0};
    PathStepper stepper(m, phi0, i0, cfg.sim, path);
    for (std::int64_t k = 1; k <= n; ++k) {
      if (!stepper.step()) return PathValue{.blown_up = true};
      for (const auto& ev : stepper.step_jumps()) {
        if (ev.to <= k0) return PathValue{ev.t};
      }
    }
    return PathValue{.censored = true};
  });
  return fold(values);
}

void ProductFunctional::validate() const {
  if (f1 && (!grad_f1 || !hess_f1)) {
    throw std::invalid_argument("functional: f1 needs its gradient and Hessian");
  }
  if (f2 && (!g || !dg_dt)) throw std::invalid_argument("functional: f2 needs g and dg/dt");
}

namespace {

// Trapezoid rule for int_{-r}^0 h(s, phi(s)) ds on the segment grid.
template <class F>
double grid_integral(const Segment& seg, F&& h) {
  const double dt = seg.grid_step();
  const double r = seg.delay();
  double acc = 0.0;
  const std::size_t last = seg.size() - 1;
  for (std::size_t k = 0; k <= last; ++k) {
    const double s = -r + static_cast<double>(k) * dt;
    const double w = (k == 0 || k == last) ? 0.5 : 1.0;
    acc += w * h(s, Vector(seg.sample(k)));
  }
  return acc * dt;
}

}  // namespace

double evaluate(const ProductFunctional& V, const Segment& seg, Mode i) {
  double v = V.f1 ? V.f1(Vector(seg.newest()), i) : 0.0;
  if (V.f2) {
    v += grid_integral(seg, [&](double s, const Vector& x) { return V.g(s, i) * V.f2(x, i); });
  }
  return v;
}

double apply_generator(const ProductFunctional& V, const ModelSpec& m, const Segment& seg, Mode i) {
  V.validate();
  const Vector x0 = seg.newest();
  double lv = 0.0;
  if (V.f2) {
    const double r = seg.delay();
    lv += V.g(0.0, i) * V.f2(x0, i) - V.g(-r, i) * V.f2(Vector(seg.oldest()), i);
    lv -= grid_integral(seg, [&](double s, const Vector& x) { return V.f2(x, i) * V.dg_dt(s, i); });
  }
  if (V.f1) {
    const Matrix sigma = m.eval_diffusion(x0, i);
    lv += V.grad_f1(x0, i).dot(m.eval_drift(x0, i));
    lv += 0.5 * (V.hess_f1(x0, i) * (sigma * sigma.transpose())).trace();
  }
  const RateRow row = m.eval_rates(seg, i);
  if (!row.empty()) {
    const double here = evaluate(V, seg, i);
    for (const auto& e : row) {
      if (e.rate > 0.0) lv += e.rate * (evaluate(V, seg, e.to) - here);
    }
  }
  return lv;
}

MCEstimate dynkin_residual(const ProductFunctional& V, const ModelSpec& m, const Segment& phi0,
                           Mode i0, double t, const EnsembleConfig& cfg) {
  V.validate();
  const auto n = std::llround(t / cfg.sim.dt);
  if (n < 0 || std::abs(static_cast<double>(n) * cfg.sim.dt - t) > 1e-9 * std::max(1.0, t)) {
    throw std::invalid_argument("dynkin_residual: t must be a nonnegative multiple of dt");
  }
  const double v0 = evaluate(V, phi0, i0);
  auto values = map_paths<PathValue>(0, cfg.n_paths, cfg.threads, [&](std::uint64_t path) {
    PathStepper stepper(m, phi0, i0, cfg.sim, path);
    double integral = 0.0;
    for (std::int64_t k = 0; k < n; ++k) {
      integral += apply_generator(V, m, stepper.segment(), stepper.mode()) * cfg.sim.dt;
      if (!stepper.step()) return PathValue{.blown_up = true};
    }
    return PathValue{evaluate(V, stepper.segment(), stepper.mode()) - v0 - integral};
  });
  return fold(values);
}

std::vector<CouplingRow> coupling_decay(const ModelSpec& m, const Linearization& lin,
                                        std::span<const double> radii, double H, Mode i0,
                                        const EnsembleConfig& cfg) {
  std::vector<CouplingRow> rows;
  const auto n = cfg.sim.steps();
  for (double R : radii) {
    const Segment phi0 = constant_at_radius(m, R, cfg.sim.dt);
    auto values = map_paths<PathValue>(0, cfg.n_paths, cfg.threads, [&](std::uint64_t path) {
      PathStepper stepper(m, phi0, i0, cfg.sim, path, &lin.qhat);
      if (phi0.newest().norm() < H) return PathValue{0.0};
      for (std::int64_t k = 1; k <= n; ++k) {
        if (!stepper.step()) return PathValue{.blown_up = true};
        if (stepper.decouple_time() <= stepper.time()) return PathValue{1.0};
        if (stepper.state().norm() < H) return PathValue{0.0};
      }
      return PathValue{0.0};
    });
    rows.push_back({R, fold(values)});
  }
  return rows;
}

OccupationReport occupation_stability(const ModelSpec& m, std::span<const OccupationStart> starts,
                                      double burn_in, const EnsembleConfig& cfg,
                                      const OccupationBinning& binning) {
  if (starts.size() < 2) throw std::invalid_argument("occupation_stability: need at least two starts");
  if (binning.edges.size() < 2 || binning.k0 < 1) throw std::invalid_argument("occupation_stability: bad binning");
  OccupationReport rep;
  rep.x_bins = binning.edges.size();  // edges.size() - 1 interior bins + overflow
  rep.mode_bins = static_cast<std::size_t>(binning.k0) + 1;
  const std::size_t cells = rep.x_bins * rep.mode_bins;
  const auto n = cfg.sim.steps();
  const auto first = static_cast<std::int64_t>(std::ceil(burn_in / cfg.sim.dt - 1e-9));

  auto cell = [&](double r, Mode i) {
    auto it = std::upper_bound(binning.edges.begin(), binning.edges.end(), r);
    std::size_t xb = it == binning.edges.begin() ? 0 : static_cast<std::size_t>(it - binning.edges.begin()) - 1;
    xb = std::min(xb, rep.x_bins - 1);
    const std::size_t mb = static_cast<std::size_t>(std::min(i, binning.k0 + 1) - 1);
    return xb * rep.mode_bins + mb;
  };

  for (const auto& start : starts) {
    const Segment phi0 = Segment::constant(start.x0, m.delay, cfg.sim.dt);
    auto counts = map_paths<std::vector<double>>(0, cfg.n_paths, cfg.threads, [&](std::uint64_t path) {
      std::vector<double> h(cells, 0.0);
      PathStepper stepper(m, phi0, start.i0, cfg.sim, path);
      if (first <= 0) h[cell(stepper.state().norm(), stepper.mode())] += 1.0;
      for (std::int64_t k = 1; k <= n; ++k) {
        if (!stepper.step()) break;
        if (k >= first) h[cell(stepper.state().norm(), stepper.mode())] += 1.0;
      }
      return h;
    });
    std::vector<double> total(cells, 0.0);
    for (const auto& h : counts) {
      for (std::size_t c = 0; c < cells; ++c) total[c] += h[c];
    }
    double mass = 0.0;
    for (double v : total) mass += v;
    if (mass > 0.0) {
      for (double& v : total) v /= mass;
    }
    rep.histograms.push_back(std::move(total));
  }
  const auto s = rep.histograms.size();
  rep.distances.assign(s, std::vector<double>(s, 0.0));
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = a + 1; b < s; ++b) {
      double d = 0.0;
      for (std::size_t c = 0; c < cells; ++c) d += std::abs(rep.histograms[a][c] - rep.histograms[b][c]);
      rep.distances[a][b] = rep.distances[b][a] = d;
    }
  }
  return rep;
}

std::vector<CouplingRow> persistence_probability(const ModelSpec& m, std::span<const double> radii,
                                                 double K2, Mode i0, const EnsembleConfig& cfg) {
  std::vector<CouplingRow> rows;
  const auto n = cfg.sim.steps();
  for (double R : radii) {
    const Segment phi0 = constant_at_radius(m, R, cfg.sim.dt);
    auto values = map_paths<PathValue>(0, cfg.n_paths, cfg.threads, [&](std::uint64_t path) {
      PathStepper stepper(m, phi0, i0, cfg.sim, path);
      if (stepper.state().norm() < K2) return PathValue{0.0};
      for (std::int64_t k = 1; k <= n; ++k) {
        if (!stepper.step()) return PathValue{.blown_up = true};
        if (stepper.state().norm() < K2) return PathValue{0.0};
      }
      return PathValue{1.0};
    });
    rows.push_back({R, fold(values)});
  }
  return rows;
}

std::vector<MCEstimate> sup_moment_ladder(const ModelSpec& m, const Segment& phi0, Mode i0,
                                          std::span<const double> horizons, const EnsembleConfig& cfg) {
  if (horizons.empty()) return {};
  if (!std::is_sorted(horizons.begin(), horizons.end())) {
    throw std::invalid_argument("sup_moment_ladder: horizons must be ascending");
  }
  std::vector<std::int64_t> marks;
  for (double T : horizons) marks.push_back(std::llround(T / cfg.sim.dt));
  auto per_path = map_paths<std::vector<PathValue>>(0, cfg.n_paths, cfg.threads, [&](std::uint64_t path) {
    std::vector<PathValue> out(marks.size(), PathValue{.blown_up = true});
    PathStepper stepper(m, phi0, i0, cfg.sim, path);
    double sup = stepper.state().squaredNorm();
    std::size_t next = 0;
    for (std::int64_t k = 0; next < marks.size(); ++k) {
      if (k > 0) {
        if (!stepper.step()) break;
        sup = std::max(sup, stepper.state().squaredNorm());
      }
      while (next < marks.size() && marks[next] == k) out[next++] = PathValue{sup};
    }
    return out;
  });
  std::vector<MCEstimate> ests;
  for (std::size_t h = 0; h < marks.size(); ++h) {
    std::vector<PathValue> col;
    col.reserve(per_path.size());
    for (const auto& p : per_path) col.push_back(p[h]);
    ests.push_back(fold(col));
  }
  return ests;
}

}  // namespace pdswitch
