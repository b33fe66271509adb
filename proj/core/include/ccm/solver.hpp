#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccm/errors.hpp"
#include "ccm/model.hpp"
#include "ccm/scalar_min.hpp"
#include "ccm/types.hpp"

namespace ccm {

/// Per-sweep traces. Entry r describes the state after sweep r + 1.
struct DiagnosticsReport {
  double initial_objective = 0.0;
  std::vector<double> objective_trace;
  std::vector<double> step_norms;
  std::vector<double> cum_sq_steps;
  std::vector<double> kkt_inf_norm_trace;
  /// Objective after every single coordinate step; only filled when
  /// SolverConfig::record_coordinate_trace is set.
  std::vector<double> coordinate_objective_trace;

  std::size_t sweeps() const noexcept { return objective_trace.size(); }
};

/// Called after each sweep with the 1-based sweep number and the new iterate.
using SweepObserver = std::function<void(std::size_t, const Vector&)>;

struct SolverConfig {
  /// Stop when ||x^{r+1} - x^r||_2 <= epsilon.
  double epsilon = 1e-8;
  std::size_t max_sweeps = 10000;
  /// Coordinate visiting order (0-based permutation). Empty means 0..n-1.
  std::vector<std::size_t> order;
  /// Options for the one-dimensional searches of the general f1 update.
  ScalarOptions inner;
  /// Also stop once the KKT residual inf-norm falls to this value.
  std::optional<double> kkt_stop;
  bool record_coordinate_trace = false;
  /// Recompute t = E x after this many coordinate updates; 0 means n^2.
  std::size_t refresh_interval = 0;
  SweepObserver on_sweep;
};

enum class StopReason { kStepNorm, kKktResidual, kMaxSweeps };

std::string to_string(StopReason r);

struct SolveOutcome {
  Vector x_final;
  std::size_t sweeps_used = 0;
  bool converged = false;
  StopReason stop_reason = StopReason::kMaxSweeps;
  DiagnosticsReport diagnostics;
};

/// Raised by require_converged; carries the partial outcome.
class NotConverged : public Error {
 public:
  explicit NotConverged(SolveOutcome outcome);
  const SolveOutcome& outcome() const noexcept { return outcome_; }

 private:
  SolveOutcome outcome_;
};

/// Returns the outcome unchanged when converged, throws NotConverged otherwise.
const SolveOutcome& require_converged(const SolveOutcome& outcome);

/// Checks that order is a permutation of 0..n-1 (empty is accepted) and
/// returns the order to use.
std::vector<std::size_t> resolve_order(std::span<const std::size_t> order, std::size_t n);

/// One pass of exact coordinate minimization of f1 in the given order.
/// Each coordinate is minimized with min_scalar_general; the update is only
/// applied when it does not increase the restricted objective.
/// If coordinate_trace is non-null the objective after each step is appended.
void sweep_f1(const F1Problem& p, Iterate& it, std::span<const std::size_t> order,
              const ScalarOptions& inner = {},
              std::vector<double>* coordinate_trace = nullptr);

/// One pass of exact coordinate minimization of f2 using the closed forms.
void sweep_f2(const F2Problem& p, Iterate& it, std::span<const std::size_t> order,
              std::vector<double>* coordinate_trace = nullptr);

/// Repeats sweeps from x0 until a stopping rule fires or max_sweeps is hit.
/// Throws DomainViolation if the objective is infinite at x0.
SolveOutcome solve(const F1Problem& p, const Vector& x0, const SolverConfig& cfg);
SolveOutcome solve(const F2Problem& p, const Vector& x0, const SolverConfig& cfg);

/// f1: the zero vector if f1(0) is finite, otherwise NoFiniteStart.
/// f2: 1 on the barrier coordinates, 0 on the penalized ones.
Vector default_start(const F1Problem& p);
Vector default_start(const F2Problem& p);

}  // namespace ccm
