#pragma once

#include <cstddef>
#include <functional>

#include "ccm/model.hpp"
#include "ccm/types.hpp"

// Slow reference solvers used to cross-check the coordinate engines. Nothing
// here calls into the solver or scalar-min code paths.
namespace ccm::oracle {

struct OracleConfig {
  double grid_span = 10.0;
  double grid_step = 1e-3;
  std::size_t max_iters = 2'000'000;
  /// Proximal-gradient step; 0 selects 1 / L from a power-iteration estimate.
  double step_size = 0.0;
  /// Stop when ||x^{k+1} - x^k||_2 <= tol.
  double tol = 1e-13;
  /// Upper bound on the curvature of g, multiplied into L = bound * ||E||_2^2.
  double curvature_bound = 1.0;
  std::size_t power_iterations = 500;
};

using ScalarFunction = std::function<double(double)>;

/// Scans [lo, hi] with the given step, then golden-section refines around the
/// best grid point until the bracket is narrower than refine_tol.
double grid_min_1d(const ScalarFunction& phi, double lo, double hi, double step,
                   double refine_tol);
/// Same over [-span, span].
double grid_min_1d(const ScalarFunction& phi, double span, double step, double refine_tol);

/// Golden-section search on [lo, hi] for a unimodal phi.
double golden_section(const ScalarFunction& phi, double lo, double hi, double tol);

/// Root of a monotone f with f(lo) and f(hi) of opposite signs.
double bisect_root(const ScalarFunction& f, double lo, double hi, double tol);

/// Largest eigenvalue of E'E by power iteration.
double power_iteration_norm_sq(const Matrix& E, std::size_t iterations);

struct IstaResult {
  Vector x;
  std::size_t iterations = 0;
  double objective = 0.0;
};

/// Proximal gradient: x <- prox(x - step * E' grad g(E x)) with
/// soft-thresholding on S and clamping at zero off S.
/// Throws NotConverged if max_iters is exhausted.
IstaResult ista_solve(const F1Problem& p, const Vector& x0, const OracleConfig& cfg);

}  // namespace ccm::oracle
