#include "ccm/optimality.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "ccm/errors.hpp"
#include "ccm/scalar_min.hpp"

namespace ccm {

namespace {

// Largest relative increase along a sequence that should be non-increasing.
double worst_increase(double start, const std::vector<double>& trace) {
  double worst = 0.0;
  double prev = start;
  for (double f : trace) {
    const double rise = (f - prev) / (1.0 + std::abs(prev));
    if (std::isnan(rise)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, rise);
    prev = f;
  }
  return worst;
}

}  // namespace

KktResidual make_kkt_residual(Vector per_coordinate) {
  KktResidual r;
  r.per_coordinate = std::move(per_coordinate);
  if (r.per_coordinate.size() > 0) {
    r.inf_norm = r.per_coordinate.lpNorm<Eigen::Infinity>();
    r.two_norm = r.per_coordinate.norm();
  }
  return r;
}

KktResidual kkt_residual_f1(const F1Problem& p, const Vector& x) {
  if (!std::isfinite(eval_f1(p, x))) {
    throw DomainViolation("KKT residual requested at a point where f1 is infinite");
  }
  const Vector d = gradient_d(p, x);
  Vector r(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double shifted = x[i] - d[i];
    r[i] = p.penalized.contains(static_cast<std::size_t>(i))
               ? x[i] - soft_threshold(shifted, p.lambda)
               : x[i] - std::max(0.0, shifted);
  }
  return make_kkt_residual(std::move(r));
}

KktResidual kkt_residual_f2(const F2Problem& p, const Vector& x) {
  const Vector d = gradient_d(p, x);
  Vector r(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    if (p.penalized.contains(static_cast<std::size_t>(i))) {
      r[i] = x[i] - soft_threshold(x[i] - d[i], p.lambda);
    } else {
      if (!(x[i] > 0.0)) {
        throw DomainViolation("barrier coordinate " + std::to_string(i + 1) +
                              " is not positive");
      }
      r[i] = d[i] - 1.0 / x[i];
    }
  }
  return make_kkt_residual(std::move(r));
}

std::string Certification::to_key_value() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "converged=" << (converged ? "true" : "false") << '\n';
  os << "sweeps=" << sweeps << '\n';
  os << "monotone_descent=" << (monotone_descent ? "pass" : "fail") << '\n';
  os << "max_descent_violation=" << max_descent_violation << '\n';
  os << "square_summable_tail=" << (square_summable_tail ? "pass" : "fail") << '\n';
  os << "last_step_sq=" << last_step_sq << '\n';
  os << "cum_sq_steps=" << cum_sq_steps << '\n';
  os << "kkt_below_threshold=" << (kkt_below_threshold ? "pass" : "fail") << '\n';
  os << "final_kkt_inf_norm=" << final_kkt_inf_norm << '\n';
  os << "certified=" << (passed() ? "pass" : "fail") << '\n';
  return os.str();
}

Certification certify(const DiagnosticsReport& diagnostics, bool converged,
                      const KktResidual& final_residual, const CertifyOptions& options) {
  Certification c;
  c.converged = converged;
  c.sweeps = diagnostics.sweeps();

  c.max_descent_violation =
      std::max(worst_increase(diagnostics.initial_objective, diagnostics.objective_trace),
               worst_increase(diagnostics.initial_objective,
                              diagnostics.coordinate_objective_trace));
  c.monotone_descent = c.max_descent_violation <= options.descent_slack;

  const auto& cum = diagnostics.cum_sq_steps;
  bool nondecreasing = std::is_sorted(cum.begin(), cum.end());
  if (!cum.empty()) {
    c.cum_sq_steps = cum.back();
    c.last_step_sq = cum.size() > 1 ? cum.back() - cum[cum.size() - 2] : cum.back();
    if (!diagnostics.step_norms.empty()) {
      c.last_step_sq = diagnostics.step_norms.back() * diagnostics.step_norms.back();
    }
  }
  c.square_summable_tail = nondecreasing && std::isfinite(c.cum_sq_steps) &&
                           c.last_step_sq <= options.step_sq_tolerance;

  c.final_kkt_inf_norm = final_residual.inf_norm;
  c.kkt_below_threshold = final_residual.inf_norm <= options.kkt_tolerance;
  return c;
}

Certification certify(const SolveOutcome& outcome, const F1Problem& p,
                      const CertifyOptions& options) {
  return certify(outcome.diagnostics, outcome.converged,
                 kkt_residual_f1(p, outcome.x_final), options);
}

Certification certify(const SolveOutcome& outcome, const F2Problem& p,
                      const CertifyOptions& options) {
  return certify(outcome.diagnostics, outcome.converged,
                 kkt_residual_f2(p, outcome.x_final), options);
}

}  // namespace ccm
