#include "pdswitch/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pdswitch/certify.hpp"
#include "pdswitch/chain.hpp"
#include "pdswitch/config.hpp"
#include "pdswitch/sim.hpp"
#include "pdswitch/verify.hpp"

#ifndef PDSWITCH_VERSION
#define PDSWITCH_VERSION "0.0.0"
#endif

namespace pdswitch {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

// Shortest round-trip decimal form; stable across runs and platforms.
std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct Common {
  std::string model;
  std::uint64_t seed = 1;
  std::string out = "pdswitch_out";
  unsigned threads = 1;
};

struct SimFlags {
  double T = 10.0;
  double dt = 0.0;  // 0: default_dt(r, T)
  std::string scheme = "thinning";
  std::size_t paths = 1;
};

ordered_json provenance(const std::string& command, const Common& c, const ModelConfig& cfg) {
  return {{"command", command},
          {"seed", c.seed},
          {"config_hash", cfg.hash},
          {"tool_version", PDSWITCH_VERSION},
          {"model", cfg.name}};
}

std::string csv_provenance(const std::string& command, const Common& c, const ModelConfig& cfg) {
  return "# command=" + command + " seed=" + std::to_string(c.seed) + " config_hash=" + cfg.hash +
         " tool_version=" + PDSWITCH_VERSION + "\n";
}

fs::path prepare_out(const Common& c) {
  fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory: " + dir.string());
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write output file: " + path.string());
  f << text;
}

void write_json(const fs::path& path, const ordered_json& j) { write_file(path, j.dump(2) + "\n"); }

SimConfig sim_config(const SimFlags& f, const Common& c, const ModelSpec& m) {
  SimConfig s;
  s.horizon = f.T;
  s.dt = f.dt > 0.0 ? f.dt : default_dt(m.delay, f.T);
  s.scheme = scheme_from_string(f.scheme);
  s.seed = c.seed;
  s.validate(m);
  return s;
}

ordered_json sim_json(const SimConfig& s, std::size_t paths) {
  return {{"T", s.horizon}, {"dt", s.dt}, {"scheme", to_string(s.scheme)}, {"paths", paths}};
}

ordered_json estimate_json(const MCEstimate& e) {
  return {{"mean", e.mean},
          {"std_error", e.std_error},
          {"ci95", {e.ci_low(), e.ci_high()}},
          {"n_samples", e.n_samples},
          {"n_paths", e.n_paths},
          {"censored_fraction", e.censored_fraction},
          {"n_blown_up", e.n_blown_up},
          {"usable", e.usable}};
}

std::vector<Mode> probe_modes(const Linearization& lin, Mode N) {
  Mode top = std::min<Mode>(N, 20);
  if (lin.qhat.finite_size()) top = std::min(top, *lin.qhat.finite_size());
  std::vector<Mode> modes;
  for (Mode i = 1; i <= top; ++i) modes.push_back(i);
  return modes;
}

std::optional<GainPlan> configured_plan(const RegisteredModel& rm) {
  if (!rm.control) return std::nullopt;
  return GainPlan{.controllable = rm.control->controllable,
                  .input_matrix = rm.control->input_matrix,
                  .gains = rm.control->gains};
}

AssumptionFlag to_flag(const CheckReport& r) { return {r.name, r.passed, r.detail}; }

// Desk-scale assumption probes recorded in the certificate.
std::vector<AssumptionFlag> assumption_flags(const ModelConfig& cfg, const Linearization& lin, Mode N) {
  const ModelSpec& m = cfg.built.model;
  std::vector<AssumptionFlag> flags;
  flags.push_back({"elliptic", cfg.elliptic.value_or(false),
                   cfg.elliptic ? "asserted in the model config" : "not asserted in the model config"});

  const bool irreducible = is_irreducible(truncate(lin.qhat, N));
  flags.push_back({"qhat_irreducible", irreducible, "strong connectivity of the truncation at N = " + std::to_string(N)});

  const auto modes = probe_modes(lin, N);
  std::vector<Segment> segs;
  for (double R : {0.0, 1.0, 10.0, 100.0, 1000.0}) {
    for (int axis = 0; axis < m.dim; ++axis) {
      for (double sign : {1.0, -1.0}) {
        Vector x = Vector::Zero(m.dim);
        x[axis] = sign * R;
        segs.push_back(Segment::constant(x, m.delay, m.delay));
      }
    }
  }
  flags.push_back(to_flag(check_rate_bound(m, segs, modes)));

  std::vector<Vector> dirs;
  for (int axis = 0; axis < m.dim; ++axis) {
    for (double sign : {1.0, -1.0}) {
      Vector d = Vector::Zero(m.dim);
      d[axis] = sign;
      dirs.push_back(d);
    }
  }
  const std::vector<double> radii{1e2, 1e3, 1e4, 1e5};
  flags.push_back(to_flag(check_sublinear_residuals(m, lin, dirs, radii, modes, 1e-3)));
  flags.push_back(to_flag(check_rate_convergence(m, lin, 10.0, modes, 4)));
  flags.push_back(to_flag(check_coefficient_bound(lin, modes)));
  flags.push_back(to_flag(check_local_lipschitz(m, 10.0, modes, 50, 12345, 1e6)));

  if (cfg.drift_condition) {
    const auto& dc = *cfg.drift_condition;
    DriftWeights w{.k0 = dc.k0, .eta = [eta = dc.eta](Mode j) { return eta(j); }, .bound = dc.eta.max_abs()};
    std::vector<Mode> pm;
    for (Mode i = dc.k0 + 1; i <= dc.k0 + 20; ++i) pm.push_back(i);
    const bool ok = check_drift_condition(
        [&m](const Segment& phi, Mode i, RateRow& out) { m.rates(phi, i, out); }, w, pm, segs);
    flags.push_back({"drift_condition", ok, "k0 = " + std::to_string(dc.k0) + ", probed modes k0+1..k0+20"});
  }
  return flags;
}

ordered_json certificate_json(const Certificate& cert, std::size_t head) {
  ordered_json c = ordered_json::array();
  for (std::size_t k = 0; k < std::min(head, cert.per_mode_c.size()); ++k) c.push_back(cert.per_mode_c[k]);
  ordered_json flags = ordered_json::array();
  for (const auto& f : cert.assumption_flags) {
    flags.push_back({{"name", f.name}, {"passed", f.passed}, {"detail", f.detail}});
  }
  return {{"form", to_string(cert.form)},
          {"N", cert.nu.N},
          {"per_mode_c", c},
          {"partial_sum", cert.partial_sum},
          {"tail_mass", cert.tail_mass},
          {"tail_source", cert.tail_source},
          {"tail_bound", cert.tail_bound},
          {"margin", cert.margin},
          {"stationary_residual", cert.nu.residual},
          {"verdict", to_string(cert.verdict)},
          {"assumptions", flags}};
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--model", c.model, "Model config JSON")->required();
  sub->add_option("--seed", c.seed, "Master seed");
  sub->add_option("--out", c.out, "Output directory");
  sub->add_option("--threads", c.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
}

void add_sim(CLI::App* sub, SimFlags& f) {
  sub->add_option("--T", f.T, "Horizon")->check(CLI::NonNegativeNumber);
  sub->add_option("--dt", f.dt, "Grid step (must divide the delay); default derived from r and T");
  sub->add_option("--scheme", f.scheme, "Jump scheme")->check(CLI::IsMember({"thinning", "bernoulli"}));
  sub->add_option("--paths", f.paths, "Number of paths")->check(CLI::PositiveNumber);
}

// ---- commands ----

int cmd_simulate(const Common& c, const SimFlags& f, int stride) {
  const ModelConfig cfg = load_model_config(c.model);
  const ModelSpec& m = cfg.built.model;
  SimConfig s = sim_config(f, c, m);
  s.record_stride = stride;
  const Segment phi0 = Segment::constant(cfg.x0, m.delay, s.dt);
  const auto recs = simulate_ensemble(m, phi0, cfg.i0, s, f.paths, c.threads);
  const fs::path dir = prepare_out(c);

  ordered_json paths = ordered_json::array();
  for (std::size_t p = 0; p < recs.size(); ++p) {
    const auto& rec = recs[p];
    const std::string suffix = f.paths == 1 ? "" : "_" + std::to_string(p);
    std::string traj = csv_provenance("simulate", c, cfg) + "t";
    for (int k = 1; k <= m.dim; ++k) traj += ",x" + std::to_string(k);
    traj += ",mode\n";
    for (std::size_t r = 0; r < rec.times.size(); ++r) {
      traj += num(rec.times[r]);
      for (int k = 0; k < m.dim; ++k) traj += "," + num(rec.states[r][k]);
      traj += "," + std::to_string(rec.modes[r]) + "\n";
    }
    write_file(dir / ("trajectory" + suffix + ".csv"), traj);

    std::string jumps = csv_provenance("simulate", c, cfg) + "t,from,to\n";
    for (const auto& j : rec.jumps) {
      jumps += num(j.t) + "," + std::to_string(j.from) + "," + std::to_string(j.to) + "\n";
    }
    write_file(dir / ("jumps" + suffix + ".csv"), jumps);

    // Time spent in each mode up to the last recorded time.
    const double t_end = rec.times.back();
    std::map<Mode, double> occupancy;
    double t = 0.0;
    Mode cur = cfg.i0;
    for (const auto& j : rec.jumps) {
      occupancy[cur] += j.t - t;
      t = j.t;
      cur = j.to;
    }
    occupancy[cur] += t_end - t;
    ordered_json occ = ordered_json::object();
    for (const auto& [mode, time] : occupancy) occ[std::to_string(mode)] = t_end > 0.0 ? time / t_end : 0.0;
    ordered_json final_state = ordered_json::array();
    for (int k = 0; k < m.dim; ++k) final_state.push_back(rec.states.back()[k]);
    paths.push_back({{"path", p},
                     {"final_time", t_end},
                     {"final_state", final_state},
                     {"final_mode", rec.modes.back()},
                     {"n_jumps", rec.jumps.size()},
                     {"blown_up", rec.blown_up},
                     {"mode_occupancy", occ}});
  }
  ordered_json summary = provenance("simulate", c, cfg);
  summary["sim"] = sim_json(s, f.paths);
  summary["paths"] = paths;
  write_json(dir / "summary.json", summary);
  return 0;
}

struct CertifyFlags {
  Mode N = 0;  // 0: truncation_hint
  std::string form = "thm37";
  std::optional<double> tail_mass;
  double margin = 0.1;
};

int cmd_certify(const Common& c, const CertifyFlags& f, std::ostream& out) {
  const ModelConfig cfg = load_model_config(c.model);
  const Mode N = f.N > 0 ? f.N : cfg.truncation_hint;
  const CriterionForm form = form_from_string(f.form);
  const auto plan = configured_plan(cfg.built);
  const Linearization lin = plan ? close_loop(cfg.built.lin, *plan) : cfg.built.lin;

  CertifyOptions opts{.tail_mass_bound = f.tail_mass, .margin = f.margin, .flags = assumption_flags(cfg, lin, N)};
  Certificate cert;
  if (plan) {
    cert = certify_stabilization(cfg.built.lin, *plan, N, opts, form);
  } else if (form == CriterionForm::kStabilization) {
    cert = certify_stabilization(cfg.built.lin, GainPlan{}, N, opts, form);
  } else {
    cert = certify_recurrence(cfg.built.lin, N, opts);
  }

  ordered_json doc = provenance("certify", c, cfg);
  doc.update(certificate_json(cert, 20));
  write_json(prepare_out(c) / "certificate.json", doc);
  out << to_string(cert.verdict) << " partial_sum=" << num(cert.partial_sum)
      << " tail_bound=" << num(cert.tail_bound) << "\n";
  return cert.verdict == Verdict::kPositiveRecurrentCertified ? 0 : 1;
}

int cmd_stationary(const Common& c, Mode N_flag, std::ostream& out) {
  const ModelConfig cfg = load_model_config(c.model);
  const Mode N = N_flag > 0 ? N_flag : cfg.truncation_hint;
  const TruncatedGenerator tg = truncate(cfg.built.lin.qhat, N);
  const StationaryDist nu = stationary(tg);
  ordered_json doc = provenance("stationary", c, cfg);
  doc["N"] = nu.N;
  doc["lump_policy"] = tg.lump_policy;
  doc["nu"] = std::vector<double>(nu.nu.data(), nu.nu.data() + nu.nu.size());
  doc["residual"] = nu.residual;
  doc["tail_mass_extrapolated"] = extrapolate_tail_mass(nu.nu);
  write_json(prepare_out(c) / "stationary.json", doc);
  out << "nu[1.." << std::min<Mode>(nu.N, 5) << "] =";
  for (Mode k = 0; k < std::min<Mode>(nu.N, 5); ++k) out << " " << num(nu.nu[k]);
  out << "\n";
  return 0;
}

struct StabilizeFlags {
  Mode N = 0;
  double budget = 1e3;
  double g_min = 1e-2;
  double growth = 1.25;
  std::optional<double> tail_mass;
};

int cmd_stabilize(const Common& c, const StabilizeFlags& f, std::ostream& out) {
  const ModelConfig cfg = load_model_config(c.model);
  if (!cfg.built.control) throw ConfigError("model '" + cfg.name + "' has no control input to stabilize");
  const Mode N = f.N > 0 ? f.N : cfg.truncation_hint;
  const auto& ctl = *cfg.built.control;
  GainSearchOptions opts{.g_min = f.g_min, .growth = f.growth, .budget = f.budget, .margin = 0.1,
                         .tail_mass_bound = f.tail_mass};
  const auto plan = search_gain(cfg.built.lin, ctl.input_matrix, ctl.controllable, N, opts);

  ordered_json doc = provenance("stabilize", c, cfg);
  doc["N"] = N;
  doc["search"] = {{"g_min", f.g_min}, {"growth", f.growth}, {"budget", f.budget}};
  doc["found"] = plan.has_value();
  if (plan) {
    ordered_json gains = ordered_json::object();
    double g = 0.0;
    for (const auto& [i, L] : plan->gains) {
      std::vector<std::vector<double>> rows;
      for (Eigen::Index r = 0; r < L.rows(); ++r) {
        rows.emplace_back();
        for (Eigen::Index k = 0; k < L.cols(); ++k) rows.back().push_back(L(r, k));
      }
      gains[std::to_string(i)] = rows;
      if (L.size() > 0) g = L(0, 0);
    }
    doc["gain"] = g;
    doc["gains"] = gains;
    const Certificate cert = certify_stabilization(cfg.built.lin, *plan, N,
                                                   {.tail_mass_bound = f.tail_mass, .margin = 0.1, .flags = {}});
    doc["certificate"] = certificate_json(cert, 20);
    out << "gain " << num(g) << " certifies, partial_sum=" << num(cert.partial_sum) << "\n";
  } else {
    out << "no certifying gain up to " << num(f.budget) << "\n";
  }
  write_json(prepare_out(c) / "gain_plan.json", doc);
  return plan ? 0 : 1;
}

struct VerifyFlags {
  double H = 1.0;
  Mode k0 = 1;
  std::string norm = "segment";
  std::vector<double> radii;
  double burn_in = -1.0;  // default T / 2
};

int cmd_verify(const std::string& what, const Common& c, const SimFlags& sf, const VerifyFlags& vf,
               std::ostream& out) {
  const ModelConfig cfg = load_model_config(c.model);
  const ModelSpec& m = cfg.built.model;
  EnsembleConfig ec{.sim = sim_config(sf, c, m), .n_paths = sf.paths, .threads = c.threads};
  const Segment phi0 = Segment::constant(cfg.x0, m.delay, ec.sim.dt);
  ordered_json doc = provenance("verify " + what, c, cfg);
  doc["sim"] = sim_json(ec.sim, sf.paths);
  bool usable = true;
  const fs::path dir = prepare_out(c);

  if (what == "hitting") {
    const HitNorm norm = vf.norm == "point" ? HitNorm::kPoint : HitNorm::kSegment;
    const MCEstimate e = estimate_hitting_time(m, phi0, cfg.i0, vf.H, vf.k0, ec, norm);
    doc["H"] = vf.H;
    doc["k0"] = vf.k0;
    doc["norm"] = vf.norm;
    doc["estimate"] = estimate_json(e);
    usable = e.usable;
    out << "mean hitting time " << num(e.mean) << " +- " << num(e.std_error) << " (censored "
        << num(e.censored_fraction) << ")\n";
  } else if (what == "descent") {
    const MCEstimate e = estimate_mode_descent(m, phi0, cfg.i0, vf.k0, ec);
    doc["k0"] = vf.k0;
    doc["estimate"] = estimate_json(e);
    usable = e.usable;
    out << "mean descent time " << num(e.mean) << " +- " << num(e.std_error) << "\n";
  } else if (what == "coupling") {
    const std::vector<double> radii = vf.radii.empty() ? std::vector<double>{10.0, 100.0, 1000.0} : vf.radii;
    const auto plan = configured_plan(cfg.built);
    const Linearization lin = plan ? close_loop(cfg.built.lin, *plan) : cfg.built.lin;
    const auto rows = coupling_decay(m, lin, radii, vf.H, cfg.i0, ec);
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows) {
      arr.push_back({{"radius", r.radius}, {"probability", estimate_json(r.probability)}});
      out << "R=" << num(r.radius) << " P=" << num(r.probability.mean) << "\n";
    }
    doc["H"] = vf.H;
    doc["rows"] = arr;
  } else {
    const std::vector<double> radii = vf.radii.empty() ? std::vector<double>{0.0, 10.0, 100.0} : vf.radii;
    std::vector<OccupationStart> starts;
    for (double R : radii) {
      Vector x = Vector::Zero(m.dim);
      x[0] = R;
      starts.push_back({x, cfg.i0});
    }
    const double burn = vf.burn_in >= 0.0 ? vf.burn_in : ec.sim.horizon / 2.0;
    const OccupationBinning binning;
    const OccupationReport rep = occupation_stability(m, starts, burn, ec, binning);
    doc["burn_in"] = burn;
    doc["start_radii"] = radii;
    doc["x_edges"] = binning.edges;
    doc["k0"] = binning.k0;
    doc["l1_distances"] = rep.distances;
    std::string csv = csv_provenance("verify occupation", c, cfg) + "start,x_low,x_high,mode_bin,fraction\n";
    for (std::size_t s = 0; s < rep.histograms.size(); ++s) {
      for (std::size_t xb = 0; xb < rep.x_bins; ++xb) {
        const std::string hi = xb + 1 < binning.edges.size() ? num(binning.edges[xb + 1]) : "inf";
        for (std::size_t mb = 0; mb < rep.mode_bins; ++mb) {
          const std::string mode = mb + 1 < rep.mode_bins ? std::to_string(mb + 1) : ">" + std::to_string(binning.k0);
          csv += std::to_string(s) + "," + num(binning.edges[xb]) + "," + hi + "," + mode + "," +
                 num(rep.histograms[s][xb * rep.mode_bins + mb]) + "\n";
        }
      }
    }
    write_file(dir / "occupation.csv", csv);
    double worst = 0.0;
    for (const auto& row : rep.distances) {
      for (double d : row) worst = std::max(worst, d);
    }
    out << "max pairwise l1 distance " << num(worst) << "\n";
  }
  write_json(dir / ("verify_" + what + ".json"), doc);
  return usable ? 0 : 1;
}

ProductFunctional functional_by_name(const std::string& name, int dim) {
  ProductFunctional V;
  if (name == "square") {
    V.f1 = [](const Vector& x, Mode) { return x.squaredNorm(); };
    V.grad_f1 = [](const Vector& x, Mode) { return Vector(2.0 * x); };
    V.hess_f1 = [dim](const Vector&, Mode) { return Matrix(2.0 * Matrix::Identity(dim, dim)); };
  } else if (name == "constant") {
    V.f1 = [](const Vector&, Mode) { return 1.0; };
    V.grad_f1 = [dim](const Vector&, Mode) { return Vector(Vector::Zero(dim)); };
    V.hess_f1 = [dim](const Vector&, Mode) { return Matrix(Matrix::Zero(dim, dim)); };
  } else if (name == "memory") {
    // |x|^2 + int e^{s} |phi(s)|^2 ds: exercises the horizontal derivative.
    V.f1 = [](const Vector& x, Mode) { return x.squaredNorm(); };
    V.grad_f1 = [](const Vector& x, Mode) { return Vector(2.0 * x); };
    V.hess_f1 = [dim](const Vector&, Mode) { return Matrix(2.0 * Matrix::Identity(dim, dim)); };
    V.f2 = [](const Vector& x, Mode) { return x.squaredNorm(); };
    V.g = [](double s, Mode) { return std::exp(s); };
    V.dg_dt = [](double s, Mode) { return std::exp(s); };
  } else {
    throw ConfigError("unknown functional '" + name + "' (expected square, constant or memory)");
  }
  return V;
}

int cmd_dynkin(const Common& c, const SimFlags& sf, const std::string& functional, std::ostream& out) {
  const ModelConfig cfg = load_model_config(c.model);
  const ModelSpec& m = cfg.built.model;
  EnsembleConfig ec{.sim = sim_config(sf, c, m), .n_paths = sf.paths, .threads = c.threads};
  const Segment phi0 = Segment::constant(cfg.x0, m.delay, ec.sim.dt);
  const ProductFunctional V = functional_by_name(functional, m.dim);
  const MCEstimate e = dynkin_residual(V, m, phi0, cfg.i0, sf.T, ec);
  ordered_json doc = provenance("dynkin", c, cfg);
  doc["sim"] = sim_json(ec.sim, sf.paths);
  doc["functional"] = functional;
  doc["estimate"] = estimate_json(e);
  doc["z_score"] = e.std_error > 0.0 ? e.mean / e.std_error : 0.0;
  write_json(prepare_out(c) / "dynkin.json", doc);
  out << "dynkin residual " << num(e.mean) << " +- " << num(e.std_error) << "\n";
  return e.usable ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Switching diffusions with past-dependent switching: simulation, certification, verification",
               "pdswitch"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PDSWITCH_VERSION);

  Common common;
  SimFlags sim;
  int stride = 1;
  CertifyFlags cert;
  Mode N = 0;
  StabilizeFlags stab;
  VerifyFlags ver;
  std::string functional = "square";

  auto* s_sim = app.add_subcommand("simulate", "Simulate paths; writes trajectory/jumps CSV and summary.json");
  add_common(s_sim, common);
  add_sim(s_sim, sim);
  s_sim->add_option("--stride", stride, "Record every k-th grid point")->check(CLI::PositiveNumber);

  auto* s_cert = app.add_subcommand("certify", "Certify positive recurrence; writes certificate.json");
  add_common(s_cert, common);
  s_cert->add_option("--N", cert.N, "Truncation level (default: config truncation_hint)");
  s_cert->add_option("--form", cert.form, "Criterion form")->check(CLI::IsMember({"thm37", "thm41"}));
  s_cert->add_option("--tail-mass", cert.tail_mass, "Override the tail mass beyond N");
  s_cert->add_option("--margin", cert.margin, "Relative safety margin")->check(CLI::NonNegativeNumber);

  auto* s_stat = app.add_subcommand("stationary", "Stationary law of the truncated limit chain");
  add_common(s_stat, common);
  s_stat->add_option("--N", N, "Truncation level");

  auto* s_stab = app.add_subcommand("stabilize", "Search a stabilizing feedback gain");
  add_common(s_stab, common);
  s_stab->add_option("--N", stab.N, "Truncation level");
  s_stab->add_option("--budget", stab.budget, "Largest gain tried")->check(CLI::PositiveNumber);
  s_stab->add_option("--g-min", stab.g_min, "Smallest gain tried")->check(CLI::PositiveNumber);
  s_stab->add_option("--growth", stab.growth, "Geometric step of the gain grid");
  s_stab->add_option("--tail-mass", stab.tail_mass, "Override the tail mass beyond N");

  auto* s_ver = app.add_subcommand("verify", "Monte Carlo corroboration");
  s_ver->require_subcommand(1);
  std::string verify_kind;
  for (const char* kind : {"hitting", "descent", "coupling", "occupation"}) {
    auto* v = s_ver->add_subcommand(kind);
    add_common(v, common);
    add_sim(v, sim);
    v->add_option("--H", ver.H, "Radius of the bounded set")->check(CLI::PositiveNumber);
    v->add_option("--k0", ver.k0, "Largest mode of the finite mode set");
    v->add_option("--norm", ver.norm, "Hitting norm")->check(CLI::IsMember({"segment", "point"}));
    v->add_option("--radii", ver.radii, "Starting radii");
    v->add_option("--burn-in", ver.burn_in, "Occupation burn-in time");
    v->callback([&verify_kind, kind] { verify_kind = kind; });
  }

  auto* s_dyn = app.add_subcommand("dynkin", "Dynkin residual E V(X_t) - V(X_0) - E int LV");
  add_common(s_dyn, common);
  add_sim(s_dyn, sim);
  s_dyn->add_option("--functional", functional, "square | constant | memory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (s_sim->parsed()) return cmd_simulate(common, sim, stride);
    if (s_cert->parsed()) return cmd_certify(common, cert, out);
    if (s_stat->parsed()) return cmd_stationary(common, N, out);
    if (s_stab->parsed()) return cmd_stabilize(common, stab, out);
    if (s_ver->parsed()) return cmd_verify(verify_kind, common, sim, ver, out);
    if (s_dyn->parsed()) return cmd_dynkin(common, sim, functional, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace pdswitch
