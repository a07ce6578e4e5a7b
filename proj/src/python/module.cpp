#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdswitch/certify.hpp"
#include "pdswitch/chain.hpp"
#include "pdswitch/cli.hpp"
#include "pdswitch/config.hpp"
#include "pdswitch/registry.hpp"
#include "pdswitch/sim.hpp"
#include "pdswitch/spectra.hpp"
#include "pdswitch/verify.hpp"

namespace py = pybind11;
using namespace pdswitch;

namespace {

RegisteredModel build(const std::string& name, const std::string& params_json) {
  return registry_get(name, nlohmann::json::parse(params_json.empty() ? "{}" : params_json));
}

py::dict certificate_dict(const Certificate& c) {
  py::dict d;
  d["verdict"] = to_string(c.verdict);
  d["form"] = to_string(c.form);
  d["partial_sum"] = c.partial_sum;
  d["tail_mass"] = c.tail_mass;
  d["tail_source"] = c.tail_source;
  d["tail_bound"] = c.tail_bound;
  d["margin"] = c.margin;
  d["per_mode_c"] = c.per_mode_c;
  d["nu"] = c.nu.nu;
  return d;
}

SimConfig sim_config(double T, double dt, double delay, std::uint64_t seed, const std::string& scheme) {
  SimConfig c;
  c.horizon = T;
  c.dt = dt > 0.0 ? dt : default_dt(delay, T);
  c.seed = seed;
  c.scheme = scheme_from_string(scheme);
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Past-dependent switching diffusions: certificates, limit chains and simulation";
  m.attr("__version__") = PDSWITCH_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("model_names", &registry_names);

  m.def(
      "spectral_summary",
      [](const Matrix& A) {
        const auto s = summarize(A);
        return py::make_tuple(s.lambda_max, s.lambda_min, s.rho);
      },
      py::arg("A"), "(lambda_max, lambda_min, rho) of a square matrix");

  m.def(
      "stationary",
      [](const std::string& family, Mode N) { return Vector(stationary(truncate(SparseGenerator::family(family), N)).nu); },
      py::arg("family"), py::arg("N") = 30, "Stationary law of a truncated limit generator family");

  m.def(
      "certify",
      [](const std::string& name, const std::string& params, Mode N, const std::string& form,
         std::optional<double> tail_mass, double margin) {
        const auto rm = build(name, params);
        CertifyOptions opts{.tail_mass_bound = tail_mass, .margin = margin};
        const CriterionForm f = form_from_string(form);
        if (rm.control) {
          const GainPlan plan{rm.control->controllable, rm.control->input_matrix, rm.control->gains};
          return certificate_dict(certify_stabilization(rm.lin, plan, N, opts, f));
        }
        if (f == CriterionForm::kStabilization) {
          return certificate_dict(certify_stabilization(rm.lin, GainPlan{}, N, opts, f));
        }
        return certificate_dict(certify_recurrence(rm.lin, N, opts));
      },
      py::arg("name"), py::arg("params") = "{}", py::arg("N") = 30, py::arg("form") = "thm37",
      py::arg("tail_mass") = py::none(), py::arg("margin") = 0.1,
      "Certificate from the limit linearization only; assumption probes are left to the CLI");

  m.def(
      "search_gain",
      [](const std::string& name, const std::string& params, Mode N) -> std::optional<double> {
        const auto rm = build(name, params);
        if (!rm.control) throw ConfigError(name + ": model has no control input");
        const auto plan = search_gain(rm.lin, rm.control->input_matrix, rm.control->controllable, N);
        if (!plan) return std::nullopt;
        return plan->gain(*rm.control->controllable.begin()).norm();
      },
      py::arg("name"), py::arg("params") = "{}", py::arg("N") = 30,
      "Norm of the first certifying scalar gain on the search grid, or None");

  m.def(
      "simulate",
      [](const std::string& name, const std::string& params, const Vector& x0, Mode i0, double T, double dt,
         std::uint64_t seed, std::uint64_t path, const std::string& scheme) {
        const auto rm = build(name, params);
        const auto cfg = sim_config(T, dt, rm.model.delay, seed, scheme);
        const TrajectoryRecord rec = [&] {
          py::gil_scoped_release release;
          return simulate(rm.model, Segment::constant(x0, rm.model.delay, cfg.dt), i0, cfg, path);
        }();
        Matrix states(static_cast<Eigen::Index>(rec.states.size()), rm.model.dim);
        for (std::size_t k = 0; k < rec.states.size(); ++k) states.row(static_cast<Eigen::Index>(k)) = rec.states[k].transpose();
        py::dict d;
        d["t"] = Vector(Eigen::Map<const Vector>(rec.times.data(), static_cast<Eigen::Index>(rec.times.size())));
        d["x"] = states;
        d["mode"] = rec.modes;
        d["blown_up"] = rec.blown_up;
        std::vector<py::tuple> jumps;
        for (const auto& j : rec.jumps) jumps.push_back(py::make_tuple(j.t, j.from, j.to));
        d["jumps"] = jumps;
        return d;
      },
      py::arg("name"), py::arg("params") = "{}", py::arg("x0"), py::arg("i0") = 1, py::arg("T") = 10.0,
      py::arg("dt") = 0.0, py::arg("seed") = 1, py::arg("path") = 0, py::arg("scheme") = "thinning");

  m.def(
      "hitting_time",
      [](const std::string& name, const std::string& params, const Vector& x0, Mode i0, double H, Mode k0,
         double T, double dt, std::size_t paths, std::uint64_t seed, bool segment_norm) {
        const auto rm = build(name, params);
        EnsembleConfig ec{.sim = sim_config(T, dt, rm.model.delay, seed, "thinning"), .n_paths = paths};
        MCEstimate e;
        {
          py::gil_scoped_release release;
          e = estimate_hitting_time(rm.model, Segment::constant(x0, rm.model.delay, ec.sim.dt), i0, H, k0, ec,
                                    segment_norm ? HitNorm::kSegment : HitNorm::kPoint);
        }
        py::dict d;
        d["mean"] = e.mean;
        d["std_error"] = e.std_error;
        d["n_samples"] = e.n_samples;
        d["censored_fraction"] = e.censored_fraction;
        d["usable"] = e.usable;
        return d;
      },
      py::arg("name"), py::arg("params") = "{}", py::arg("x0"), py::arg("i0") = 1, py::arg("H") = 1.0,
      py::arg("k0") = 1, py::arg("T") = 100.0, py::arg("dt") = 0.0, py::arg("paths") = 1000, py::arg("seed") = 1,
      py::arg("segment_norm") = true);

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "pdswitch");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in process; returns (exit_code, stdout, stderr)");
}
