#pragma once

#include <functional>
#include <optional>

namespace ccm {

/// Soft-thresholding sign(x) * max(|x| - lambda, 0).
///
/// The threshold is rounded up to the ulp grid of x before subtracting, so
/// the subtraction is exact and the computed map is 1-Lipschitz in floating
/// point, not just in exact arithmetic. The result differs from the
/// correctly rounded value by at most one ulp of x.
double soft_threshold(double x, double lambda);

/// h(u) = a u^2 + b u + c - log u on u > 0.
struct QuadLogSpec {
  double a = 0.0;
  double b = 0.0;
};

/// h(u) = a u^2 + b u + c + lambda |u|.
struct QuadL1Spec {
  double a = 0.0;
  double b = 0.0;
  double lambda = 0.0;
};

/// Unique minimizer (-b + sqrt(b^2 + 8a)) / (4a), always > 0.
/// Throws NonpositiveCurvature if a <= 0.
double min_quad_log(const QuadLogSpec& s);

/// Unique minimizer S_lambda(-b) / (2a). Throws NonpositiveCurvature if a <= 0.
double min_quad_l1(const QuadL1Spec& s);

enum class ScalarKind {
  kPenalized,    // smooth(u) + lambda |u| over the real line
  kNonnegative,  // smooth(u) over u >= 0
};

struct ScalarDerivatives {
  double first = 0.0;
  double second = 0.0;
};

/// Convex one-dimensional problem given through its smooth part.
struct ScalarProblem {
  /// Smooth part; +inf outside its domain.
  std::function<double(double)> smooth;
  /// First and second derivative of the smooth part.
  std::function<ScalarDerivatives(double)> derivatives;
  ScalarKind kind = ScalarKind::kPenalized;
  double lambda = 0.0;
  /// A point where smooth() is known to be finite, typically the current
  /// coordinate. Points where smooth() is +inf are classified by which side of
  /// this point they fall on. If the derivative already vanishes here to
  /// tolerance, it is returned unchanged.
  std::optional<double> anchor;
};

struct ScalarOptions {
  /// Absolute tolerance on the derivative of the full restricted objective.
  double tol = 1e-12;
  int max_iterations = 200;
  int max_doublings = 60;
};

/// Minimizes sp.smooth(u) (+ lambda |u| or subject to u >= 0) by a kink test
/// at zero followed by safeguarded Newton on the derivative over the half-line
/// that contains the minimizer. bracket_hint is the initial bracket width.
///
/// Throws NoBracket, MaxIterations, or NonpositiveCurvature (negative or NaN
/// second derivative).
double min_scalar_general(const ScalarProblem& sp, double bracket_hint,
                          const ScalarOptions& options = {});

}  // namespace ccm
