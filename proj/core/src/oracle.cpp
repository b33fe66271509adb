#include "ccm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ccm/solver.hpp"

namespace ccm::oracle {

namespace {

double shrink(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

double objective(const F1Problem& p, const Vector& x) {
  double l1 = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    if (p.penalized.contains(static_cast<std::size_t>(i))) l1 += std::abs(x[i]);
  }
  return p.g->value(p.E.entries() * x) + p.lambda * l1;
}

}  // namespace

double golden_section(const ScalarFunction& phi, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = phi(c);
  double fd = phi(d);
  for (int it = 0; it < 400 && (b - a) > tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = phi(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = phi(d);
    }
    if (!(c < d)) break;
  }
  return fc <= fd ? c : d;
}

double grid_min_1d(const ScalarFunction& phi, double lo, double hi, double step,
                   double refine_tol) {
  if (!(hi > lo) || !(step > 0.0)) throw std::invalid_argument("bad grid");
  const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / step));
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= count; ++k) {
    const double u = std::min(hi, lo + static_cast<double>(k) * step);
    const double v = phi(u);
    if (v < best_value) {
      best_value = v;
      best = k;
    }
  }
  const double left = std::max(lo, lo + (static_cast<double>(best) - 1.0) * step);
  const double right = std::min(hi, lo + (static_cast<double>(best) + 1.0) * step);
  const double refined = golden_section(phi, left, right, refine_tol);
  const double grid_point = std::min(hi, lo + static_cast<double>(best) * step);
  return phi(refined) <= best_value ? refined : grid_point;
}

double grid_min_1d(const ScalarFunction& phi, double span, double step, double refine_tol) {
  return grid_min_1d(phi, -span, span, step, refine_tol);
}

double bisect_root(const ScalarFunction& f, double lo, double hi, double tol) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) throw std::invalid_argument("root not bracketed");
  for (int it = 0; it < 2000 && (hi - lo) > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double power_iteration_norm_sq(const Matrix& E, std::size_t iterations) {
  if (E.cols() == 0) return 0.0;
  Vector v = Vector::Ones(E.cols()) / std::sqrt(static_cast<double>(E.cols()));
  double estimate = 0.0;
  for (std::size_t k = 0; k < iterations; ++k) {
    Vector w = E.transpose() * (E * v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    estimate = v.dot(w);
    v = w / norm;
  }
  return estimate;
}

IstaResult ista_solve(const F1Problem& p, const Vector& x0, const OracleConfig& cfg) {
  const Matrix& E = p.E.entries();
  double step = cfg.step_size;
  if (step <= 0.0) {
    // Power iteration approaches the top eigenvalue from below; pad it.
    const double lipschitz =
        1.05 * cfg.curvature_bound * power_iteration_norm_sq(E, cfg.power_iterations);
    step = 1.0 / lipschitz;
  }

  Vector x = x0;
  for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
    const Vector grad = E.transpose() * p.g->gradient(E * x);
    Vector next = x - step * grad;
    for (Index i = 0; i < next.size(); ++i) {
      next[i] = p.penalized.contains(static_cast<std::size_t>(i))
                    ? shrink(next[i], step * p.lambda)
                    : std::max(0.0, next[i]);
    }
    const double moved = (next - x).norm();
    x = std::move(next);
    if (moved <= cfg.tol) return {x, k, objective(p, x)};
  }
  SolveOutcome partial;
  partial.x_final = x;
  partial.sweeps_used = cfg.max_iters;
  throw NotConverged(std::move(partial));
}

}  // namespace ccm::oracle
