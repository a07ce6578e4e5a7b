#include "pdswitch/certify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

#include "pdswitch/spectra.hpp"

namespace pdswitch {

std::string to_string(Verdict v) {
  return v == Verdict::kPositiveRecurrentCertified ? "POSITIVE_RECURRENT_CERTIFIED" : "INCONCLUSIVE";
}

std::string to_string(CriterionForm f) {
  return f == CriterionForm::kRecurrence ? "thm37" : "thm41";
}

CriterionForm form_from_string(const std::string& s) {
  if (s == "thm37") return CriterionForm::kRecurrence;
  if (s == "thm41") return CriterionForm::kStabilization;
  throw std::invalid_argument("unknown criterion form '" + s + "' (expected thm37 or thm41)");
}

Matrix GainPlan::gain(Mode i) const {
  const auto it = gains.find(i);
  if (it == gains.end() || !controllable.count(i)) return {};
  return it->second;
}

void GainPlan::validate() const {
  for (const auto& [i, L] : gains) {
    if (!controllable.count(i) && L.size() > 0 && !L.isZero(0.0)) {
      throw std::invalid_argument("gain plan: nonzero gain on uncontrolled mode " + std::to_string(i));
    }
  }
  if (!gains.empty() && !input_matrix) throw std::invalid_argument("gain plan: missing input matrices");
}

double per_mode_cost(const Linearization& lin, Mode i, CriterionForm form) {
  const Matrix b = lin.drift_matrix(i);
  const auto sig = lin.noise_matrices(i);
  for (const auto& s : sig) {
    if (s.rows() != b.rows() || s.cols() != b.cols()) {
      throw std::invalid_argument("per_mode_cost: noise matrix shape differs from drift matrix");
    }
  }
  double rho_sq = 0.0;
  for (const auto& s : sig) {
    const double r = summarize(s).rho;
    rho_sq += r * r;
  }
  const double lam_b = summarize(b).lambda_max;
  if (form == CriterionForm::kRecurrence) {
    const double lam_a = sig.empty() ? 0.0 : summarize(a_of_i(sig)).lambda_max;
    return lam_b + 0.5 * lam_a - rho_sq;
  }
  double per_component = 0.0;
  for (const auto& s : sig) {
    per_component += summarize(Matrix(s.transpose() * s)).lambda_max;
  }
  return 2.0 * lam_b + per_component - rho_sq;
}

double criterion_sum(std::span<const double> nu, std::span<const double> c) {
  if (nu.size() != c.size()) throw std::invalid_argument("criterion_sum: length mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < nu.size(); ++k) s += nu[k] * c[k];
  return s;
}

Verdict decide(double partial_sum, double tail_bound, double margin,
               std::span<const AssumptionFlag> flags) {
  const double upper = partial_sum + tail_bound;
  const bool flags_ok = std::all_of(flags.begin(), flags.end(), [](const auto& f) { return f.passed; });
  if (flags_ok && upper < 0.0 && -upper >= margin * std::abs(partial_sum)) {
    return Verdict::kPositiveRecurrentCertified;
  }
  return Verdict::kInconclusive;
}

namespace {

struct TailEstimate {
  double mass;
  std::string source;
};

TailEstimate tail_for(const SparseGenerator& qhat, const StationaryDist& nu,
                      const std::optional<double>& user) {
  if (user) {
    if (!(*user >= 0.0 && *user < 1.0)) throw std::invalid_argument("tail mass bound must lie in [0, 1)");
    return {*user, "user"};
  }
  if (qhat.finite_size() && nu.N >= *qhat.finite_size()) return {0.0, "exact"};
  return {extrapolate_tail_mass(nu.nu), "extrapolated"};
}

Certificate assemble(const Linearization& lin, const StationaryDist& nu, const TailEstimate& tail,
                     CriterionForm form, const CertifyOptions& opts) {
  Certificate cert;
  cert.nu = nu;
  cert.form = form;
  cert.margin = opts.margin;
  cert.assumption_flags = opts.flags;
  cert.per_mode_c.reserve(static_cast<std::size_t>(nu.N));
  double c_bar = 0.0;
  for (Mode i = 1; i <= nu.N; ++i) {
    cert.per_mode_c.push_back(per_mode_cost(lin, i, form));
    c_bar = std::max(c_bar, std::abs(cert.per_mode_c.back()));
  }
  cert.partial_sum = criterion_sum(std::span<const double>(nu.nu.data(), static_cast<std::size_t>(nu.nu.size())),
                                   cert.per_mode_c);
  cert.tail_mass = tail.mass;
  cert.tail_source = tail.source;
  cert.tail_bound = c_bar * tail.mass;
  cert.verdict = decide(cert.partial_sum, cert.tail_bound, cert.margin, cert.assumption_flags);
  return cert;
}

}  // namespace

Certificate certify_recurrence(const Linearization& lin, Mode N, const CertifyOptions& opts) {
  const StationaryDist nu = stationary(truncate(lin.qhat, N));
  return assemble(lin, nu, tail_for(lin.qhat, nu, opts.tail_mass_bound), CriterionForm::kRecurrence,
                  opts);
}

Linearization close_loop(const Linearization& lin, const GainPlan& plan) {
  plan.validate();
  Linearization out = lin;
  out.drift_matrix = [base = lin.drift_matrix, plan](Mode i) {
    Matrix b = base(i);
    const Matrix L = plan.gain(i);
    if (L.size() > 0) {
      const Matrix B = plan.input_matrix(i);
      if (B.rows() != b.rows() || B.cols() != L.rows() || L.cols() != b.cols()) {
        throw std::invalid_argument("gain plan: input/gain shapes do not match the drift matrix");
      }
      b -= B * L;
    }
    return b;
  };
  for (Mode i : plan.controllable) {
    const Matrix b = out.drift_matrix(i);
    if (b.size() > 0) {
      out.coeff_bound = std::max(out.coeff_bound, Eigen::JacobiSVD<Matrix>(b).singularValues()(0));
    }
  }
  return out;
}

Certificate certify_stabilization(const Linearization& lin, const GainPlan& plan, Mode N,
                                  const CertifyOptions& opts, CriterionForm form) {
  const Linearization closed = close_loop(lin, plan);
  const StationaryDist nu = stationary(truncate(lin.qhat, N));
  return assemble(closed, nu, tail_for(lin.qhat, nu, opts.tail_mass_bound), form, opts);
}

std::optional<GainPlan> search_gain(const Linearization& lin,
                                    std::function<Matrix(Mode)> input_matrix,
                                    const std::set<Mode>& controllable, Mode N,
                                    const GainSearchOptions& opts) {
  if (controllable.empty()) throw std::invalid_argument("search_gain: controllable set is empty");
  if (!(opts.g_min > 0.0) || !(opts.growth > 1.0)) {
    throw std::invalid_argument("search_gain: need g_min > 0 and growth > 1");
  }
  const StationaryDist nu = stationary(truncate(lin.qhat, N));
  const TailEstimate tail = tail_for(lin.qhat, nu, opts.tail_mass_bound);
  CertifyOptions copts{.tail_mass_bound = opts.tail_mass_bound, .margin = opts.margin, .flags = {}};

  auto plan_for = [&](double g) {
    GainPlan plan{.controllable = controllable, .input_matrix = input_matrix, .gains = {}};
    for (Mode i : controllable) {
      const Matrix B = input_matrix(i);
      plan.gains[i] = g * Matrix::Identity(B.cols(), B.rows());
    }
    return plan;
  };
  auto certifies = [&](const GainPlan& plan) {
    return assemble(close_loop(lin, plan), nu, tail, CriterionForm::kRecurrence, copts).verdict ==
           Verdict::kPositiveRecurrentCertified;
  };

  if (GainPlan zero = plan_for(0.0); certifies(zero)) return zero;
  for (double g = opts.g_min; g <= opts.budget * (1.0 + 1e-12); g *= opts.growth) {
    GainPlan plan = plan_for(g);
    if (certifies(plan)) return plan;
  }
  return std::nullopt;
}

}  // namespace pdswitch
