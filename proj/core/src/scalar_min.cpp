#include "ccm/scalar_min.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "ccm/errors.hpp"

namespace ccm {

namespace {

// Spacing of doubles in the binade of x (x != 0).
double ulp_of(double x) {
  int exponent = 0;
  std::frexp(x, &exponent);
  return std::max(std::ldexp(1.0, exponent - std::numeric_limits<double>::digits),
                  std::numeric_limits<double>::denorm_min());
}

struct Probe {
  bool finite = false;
  double f = 0.0;   // derivative of the restricted objective
  double df = 0.0;  // its derivative (second derivative of the objective)
};

// Finds the root of an increasing function F on (0, inf) given F(0) < 0.
// Points outside the domain are classified by their position relative to
// the anchor.
template <class ProbeFn>
double solve_half_line(ProbeFn&& probe, std::optional<double> anchor, double hint,
                       const ScalarOptions& opt) {
  if (anchor && !(*anchor > 0.0)) anchor.reset();

  auto sign_of = [&](const Probe& p, double v) -> int {
    if (!p.finite) return (anchor && v < *anchor) ? -1 : 1;
    return p.f > 0.0 ? 1 : (p.f < 0.0 ? -1 : 0);
  };

  double lo = 0.0;
  double hi = std::numeric_limits<double>::quiet_NaN();
  if (anchor) {
    const Probe p = probe(*anchor);
    if (p.finite && std::abs(p.f) <= opt.tol) return *anchor;
    if (sign_of(p, *anchor) > 0) {
      hi = *anchor;
    } else {
      lo = *anchor;
    }
  }
  if (std::isnan(hi)) {
    double width = hint > 0.0 ? hint : 1.0;
    hi = lo + width;
    for (int k = 0;; ++k) {
      const Probe p = probe(hi);
      if (p.finite && std::abs(p.f) <= opt.tol) return hi;
      if (sign_of(p, hi) > 0) break;
      if (k >= opt.max_doublings) {
        throw NoBracket("derivative does not change sign within " +
                        std::to_string(opt.max_doublings) + " doublings");
      }
      lo = hi;
      width *= 2.0;
      hi = lo + width;
    }
  }

  double v = (anchor && *anchor > lo && *anchor < hi) ? *anchor : lo + 0.5 * (hi - lo);
  double dx_old = hi - lo;
  double dx = dx_old;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Probe p = probe(v);
    if (p.finite) {
      if (std::abs(p.f) <= opt.tol) return v;
      if (!(p.df >= 0.0)) {
        throw NonpositiveCurvature("negative or undefined second derivative at u = " +
                                   std::to_string(v));
      }
    }
    if (sign_of(p, v) < 0) {
      lo = v;
    } else {
      hi = v;
    }
    if (hi - lo <= 2.0 * eps * std::max(std::abs(lo), std::abs(hi)) +
                       std::numeric_limits<double>::min()) {
      return v;
    }

    double next = lo + 0.5 * (hi - lo);
    if (p.finite && p.df > 0.0) {
      const double newton = v - p.f / p.df;
      if (newton > lo && newton < hi && std::abs(2.0 * p.f) <= std::abs(dx_old * p.df)) {
        next = newton;
      }
    }
    dx_old = dx;
    dx = std::abs(next - v);
    if (next == v) return v;
    v = next;
  }
  throw MaxIterations("scalar minimization did not reach tolerance in " +
                      std::to_string(opt.max_iterations) + " iterations");
}

}  // namespace

double soft_threshold(double x, double lambda) {
  const double mag = std::abs(x);
  if (mag <= lambda) return 0.0;
  const double u = ulp_of(mag);
  const double threshold = std::ceil(lambda / u) * u;
  const double shrunk = mag - threshold;
  if (shrunk <= 0.0) return 0.0;
  return std::copysign(shrunk, x);
}

double min_quad_log(const QuadLogSpec& s) {
  if (!(s.a > 0.0)) throw NonpositiveCurvature("quadratic coefficient must be positive");
  const double root = std::hypot(s.b, std::sqrt(8.0 * s.a));
  // Both branches are the same closed form; the second avoids cancellation.
  if (s.b <= 0.0) return (root - s.b) / (4.0 * s.a);
  return 2.0 / (s.b + root);
}

double min_quad_l1(const QuadL1Spec& s) {
  if (!(s.a > 0.0)) throw NonpositiveCurvature("quadratic coefficient must be positive");
  if (s.lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");
  return soft_threshold(-s.b, s.lambda) / (2.0 * s.a);
}

double min_scalar_general(const ScalarProblem& sp, double bracket_hint,
                          const ScalarOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const double lambda = sp.kind == ScalarKind::kPenalized ? sp.lambda : 0.0;
  if (lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");

  // side = +1 searches u > 0, side = -1 searches u < 0 via u = -v.
  auto make_probe = [&](int side) {
    return [&sp, lambda, side](double v) {
      const double u = side * v;
      Probe p;
      p.finite = std::isfinite(sp.smooth(u));
      if (!p.finite) return p;
      const ScalarDerivatives d = sp.derivatives(u);
      p.f = side > 0 ? d.first + lambda : lambda - d.first;
      p.df = d.second;
      return p;
    };
  };

  auto anchor_for = [&](int side) -> std::optional<double> {
    if (!sp.anchor) return std::nullopt;
    return side * *sp.anchor;
  };

  const bool zero_ok = std::isfinite(sp.smooth(0.0));
  int side = 1;
  if (zero_ok) {
    const double d0 = sp.derivatives(0.0).first;
    if (sp.kind == ScalarKind::kPenalized) {
      if (std::abs(d0) <= lambda) return 0.0;
      side = d0 < -lambda ? 1 : -1;
    } else {
      if (d0 >= 0.0) return 0.0;
    }
  } else {
    if (!sp.anchor || !std::isfinite(sp.smooth(*sp.anchor)) || *sp.anchor == 0.0) {
      throw DomainViolation("restricted objective is infinite at 0 and no feasible anchor");
    }
    if (sp.kind == ScalarKind::kNonnegative && *sp.anchor < 0.0) {
      throw DomainViolation("anchor violates the nonnegativity constraint");
    }
    side = *sp.anchor > 0.0 ? 1 : -1;
  }
  return side * solve_half_line(make_probe(side), anchor_for(side), bracket_hint, options);
}

}  // namespace ccm
