#pragma once

#include <cstddef>
#include <string>

#include "ccm/model.hpp"
#include "ccm/solver.hpp"
#include "ccm/types.hpp"

namespace ccm {

/// Fixed-point residual of the optimality conditions. A point is optimal
/// exactly when every entry is zero.
struct KktResidual {
  Vector per_coordinate;
  double inf_norm = 0.0;
  double two_norm = 0.0;
};

KktResidual make_kkt_residual(Vector per_coordinate);

/// r_i = x_i - S_lambda(x_i - d_i) on S, r_i = x_i - max(0, x_i - d_i) off S.
/// Throws DomainViolation if f1(x) is infinite.
KktResidual kkt_residual_f1(const F1Problem& p, const Vector& x);

/// r_i = x_i - S_lambda(x_i - d_i) on S, r_i = d_i - 1/x_i off S.
/// Throws DomainViolation if a barrier coordinate is not positive.
KktResidual kkt_residual_f2(const F2Problem& p, const Vector& x);

struct CertifyOptions {
  /// Threshold on the final KKT residual inf-norm.
  double kkt_tolerance = 1e-6;
  /// Threshold on the last increment of the cumulative squared step norms.
  double step_sq_tolerance = 1e-12;
  /// Allowed objective increase per step, relative to 1 + |f|.
  double descent_slack = 1e-10;
};

struct Certification {
  bool converged = false;
  std::size_t sweeps = 0;
  bool monotone_descent = false;
  double max_descent_violation = 0.0;
  bool square_summable_tail = false;
  double last_step_sq = 0.0;
  double cum_sq_steps = 0.0;
  bool kkt_below_threshold = false;
  double final_kkt_inf_norm = 0.0;

  bool passed() const noexcept {
    return monotone_descent && square_summable_tail && kkt_below_threshold;
  }
  /// One key=value pair per line.
  std::string to_key_value() const;
};

/// Aggregates the trace checks with a fresh KKT residual at the final point.
Certification certify(const DiagnosticsReport& diagnostics, bool converged,
                      const KktResidual& final_residual, const CertifyOptions& options = {});
Certification certify(const SolveOutcome& outcome, const F1Problem& p,
                      const CertifyOptions& options = {});
Certification certify(const SolveOutcome& outcome, const F2Problem& p,
                      const CertifyOptions& options = {});

}  // namespace ccm
