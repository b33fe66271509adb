#include "ccm/solver.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "ccm/optimality.hpp"

namespace ccm {

namespace {

double penalty_sum(const IndexSet& s, const Vector& x) {
  double sum = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    if (s.contains(static_cast<std::size_t>(i))) sum += std::abs(x[i]);
  }
  return sum;
}

// Objective evaluated from the cached residual.
double cached_f2(const F2Problem& p, const Iterate& it) {
  double barrier = 0.0;
  for (Index i = 0; i < it.x().size(); ++i) {
    if (!p.penalized.contains(static_cast<std::size_t>(i))) barrier -= std::log(it[i]);
  }
  return it.residual().squaredNorm() + barrier +
         p.lambda * penalty_sum(p.penalized, it.x());
}

void check_start(Index n, const Vector& x0) {
  if (x0.size() != n) {
    throw DimensionMismatch("starting point has " + std::to_string(x0.size()) +
                            " entries, expected " + std::to_string(n));
  }
}

template <class Problem, class Sweep, class Objective, class Kkt>
SolveOutcome run_sweeps(const Problem& p, const Vector& x0, const SolverConfig& cfg,
                        Sweep&& sweep, Objective&& objective, Kkt&& kkt) {
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const auto n = static_cast<std::size_t>(p.dimension());
  check_start(p.dimension(), x0);
  const std::vector<std::size_t> order = resolve_order(cfg.order, n);

  const double f0 = objective(x0);
  if (!std::isfinite(f0)) {
    throw DomainViolation("objective is infinite at the starting point");
  }

  SolveOutcome out;
  DiagnosticsReport& diag = out.diagnostics;
  diag.initial_objective = f0;
  std::vector<double>* coord_trace =
      cfg.record_coordinate_trace ? &diag.coordinate_objective_trace : nullptr;

  const std::size_t refresh_every =
      cfg.refresh_interval > 0 ? cfg.refresh_interval : std::max<std::size_t>(1, n * n);

  Iterate it(p.E, x0);
  double cum = 0.0;
  for (std::size_t r = 1; r <= cfg.max_sweeps; ++r) {
    const Vector prev = it.x();
    sweep(it, order, coord_trace);
    if (it.updates_since_refresh() >= refresh_every) it.refresh(p.E);

    const double step = (it.x() - prev).norm();
    cum += step * step;
    const double residual = kkt(it.x());
    diag.objective_trace.push_back(objective(it.x()));
    diag.step_norms.push_back(step);
    diag.cum_sq_steps.push_back(cum);
    diag.kkt_inf_norm_trace.push_back(residual);
    out.sweeps_used = r;
    if (cfg.on_sweep) cfg.on_sweep(r, it.x());

    if (step <= cfg.epsilon) {
      out.converged = true;
      out.stop_reason = StopReason::kStepNorm;
      break;
    }
    if (cfg.kkt_stop && residual <= *cfg.kkt_stop) {
      out.converged = true;
      out.stop_reason = StopReason::kKktResidual;
      break;
    }
  }
  out.x_final = it.x();
  return out;
}

}  // namespace

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::kStepNorm:
      return "step_norm";
    case StopReason::kKktResidual:
      return "kkt_residual";
    case StopReason::kMaxSweeps:
      return "max_sweeps";
  }
  return "unknown";
}

NotConverged::NotConverged(SolveOutcome outcome)
    : Error("not converged after " + std::to_string(outcome.sweeps_used) + " sweeps"),
      outcome_(std::move(outcome)) {}

const SolveOutcome& require_converged(const SolveOutcome& outcome) {
  if (!outcome.converged) throw NotConverged(outcome);
  return outcome;
}

std::vector<std::size_t> resolve_order(std::span<const std::size_t> order, std::size_t n) {
  std::vector<std::size_t> out(n);
  if (order.empty()) {
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }
  if (order.size() != n) {
    throw std::invalid_argument("order has " + std::to_string(order.size()) +
                                " entries, expected " + std::to_string(n));
  }
  std::vector<bool> seen(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    if (i >= n || seen[i]) throw std::invalid_argument("order is not a permutation");
    seen[i] = true;
    out[k] = i;
  }
  return out;
}

void sweep_f1(const F1Problem& p, Iterate& it, std::span<const std::size_t> order,
              const ScalarOptions& inner, std::vector<double>* coordinate_trace) {
  const DesignMatrix& E = p.E;
  const SmoothOracle& g = *p.g;
  Vector column(E.rows());
  Vector probe(E.rows());
  double pen = coordinate_trace ? penalty_sum(p.penalized, it.x()) : 0.0;

  for (std::size_t k : order) {
    const auto i = static_cast<Index>(k);
    const bool penalized = p.penalized.contains(k);
    const double xi = it[i];
    const Vector& t = it.residual();
    column = E.col(i);

    auto move_to = [&](double u) -> const Vector& {
      probe = t + (u - xi) * column;
      return probe;
    };
    ScalarProblem sp;
    sp.smooth = [&](double u) { return g.value(move_to(u)); };
    sp.derivatives = [&](double u) {
      const DirectionalDerivatives d = g.directional_derivatives(move_to(u), column);
      return ScalarDerivatives{d.first, d.second};
    };
    sp.kind = penalized ? ScalarKind::kPenalized : ScalarKind::kNonnegative;
    sp.lambda = p.lambda;
    sp.anchor = xi;

    const double u = min_scalar_general(sp, 1.0 + std::abs(xi), inner);
    if (u != xi) {
      const double weight = penalized ? p.lambda : 0.0;
      const double before = g.value(t) + weight * std::abs(xi);
      const double after = sp.smooth(u) + weight * std::abs(u);
      // Near the minimizer the true decrease is below the rounding error of
      // g, so only a rise beyond a few ulps counts as a failed update.
      const double slack = 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(before));
      if (after <= before + slack) {
        if (penalized) pen += std::abs(u) - std::abs(xi);
        it.set_coordinate(E, i, u);
      }
    }
    if (coordinate_trace) {
      coordinate_trace->push_back(g.value(it.residual()) + p.lambda * pen);
    }
  }
}

void sweep_f2(const F2Problem& p, Iterate& it, std::span<const std::size_t> order,
              std::vector<double>* coordinate_trace) {
  const DesignMatrix& E = p.E;
  for (std::size_t k : order) {
    const auto i = static_cast<Index>(k);
    const double a = E.column_norms_sq()[i];
    const double xi = it[i];
    // Linear coefficient of the restricted quadratic with x_i removed.
    const double b = 2.0 * E.col(i).dot(it.residual()) - 2.0 * a * xi;
    const double u = p.penalized.contains(k) ? min_quad_l1({a, b, p.lambda})
                                             : min_quad_log({a, b});
    it.set_coordinate(E, i, u);
    if (coordinate_trace) coordinate_trace->push_back(cached_f2(p, it));
  }
}

SolveOutcome solve(const F1Problem& p, const Vector& x0, const SolverConfig& cfg) {
  if (!p.g) throw InvalidProblem("F1 problem has no smooth oracle");
  return run_sweeps(
      p, x0, cfg,
      [&](Iterate& it, const std::vector<std::size_t>& order, std::vector<double>* trace) {
        sweep_f1(p, it, order, cfg.inner, trace);
      },
      [&](const Vector& x) { return eval_f1(p, x); },
      [&](const Vector& x) { return kkt_residual_f1(p, x).inf_norm; });
}

SolveOutcome solve(const F2Problem& p, const Vector& x0, const SolverConfig& cfg) {
  return run_sweeps(
      p, x0, cfg,
      [&](Iterate& it, const std::vector<std::size_t>& order, std::vector<double>* trace) {
        sweep_f2(p, it, order, trace);
      },
      [&](const Vector& x) { return eval_f2(p, x); },
      [&](const Vector& x) { return kkt_residual_f2(p, x).inf_norm; });
}

Vector default_start(const F1Problem& p) {
  Vector x = Vector::Zero(p.dimension());
  if (!p.g || !std::isfinite(eval_f1(p, x))) {
    throw NoFiniteStart("f1 is infinite at the origin; supply a starting point");
  }
  return x;
}

Vector default_start(const F2Problem& p) {
  Vector x = Vector::Zero(p.dimension());
  for (std::size_t i : p.penalized.complement()) x[static_cast<Index>(i)] = 1.0;
  return x;
}

}  // namespace ccm
