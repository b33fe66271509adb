#include "ccm/concord.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "ccm/errors.hpp"
#include "ccm/scalar_min.hpp"

namespace ccm::concord {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Row of Omega_c that lands at slot r of P^c Omega_c (diagonal moved last).
std::size_t slot_source(std::size_t c, std::size_t r, std::size_t p) {
  if (r + 1 == p) return c;
  return r < c ? r : r + 1;
}

Matrix psd_sqrt(const Matrix& block) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(block);
  if (eig.info() != Eigen::Success) throw NotPSD("eigendecomposition failed");
  const double scale = std::max(block.trace(), std::numeric_limits<double>::min());
  Vector root = eig.eigenvalues();
  for (Index k = 0; k < root.size(); ++k) {
    if (root[k] < -1e-8 * scale) {
      throw NotPSD("covariance block has eigenvalue " + std::to_string(root[k]));
    }
    root[k] = root[k] < 1e-14 * scale ? 0.0 : std::sqrt(root[k]);
  }
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

struct DirectState {
  const CovarianceProblem& cp;
  Vector x;  // packed Omega
  Matrix w;  // S * Omega

  DirectState(const CovarianceProblem& problem, const Matrix& omega0)
      : cp(problem), x(pack(omega0)), w(problem.sigma_hat * omega0) {}

  Index p() const { return cp.dimension(); }

  void update(std::size_t position) {
    const Matrix& s = cp.sigma_hat;
    const auto [i, j] = packed_entry(position);
    const auto ii = static_cast<Index>(i);
    const auto jj = static_cast<Index>(j);
    const double current = x[static_cast<Index>(position)];
    if (i == j) {
      const double a = 0.5 * s(jj, jj);
      const double b = w(jj, jj) - s(jj, jj) * current;
      const double u = min_quad_log({a, b});
      const double delta = u - current;
      x[static_cast<Index>(position)] = u;
      if (delta != 0.0) w.col(jj) += delta * s.col(jj);
    } else {
      const double a = 0.5 * (s(ii, ii) + s(jj, jj));
      const double grad = w(ii, jj) + w(jj, ii);
      const double b = grad - 2.0 * a * current;
      const double u = min_quad_l1({a, b, cp.lambda});
      const double delta = u - current;
      x[static_cast<Index>(position)] = u;
      if (delta != 0.0) {
        w.col(jj) += delta * s.col(ii);
        w.col(ii) += delta * s.col(jj);
      }
    }
  }
};

ConcordEstimate finish(const CovarianceProblem& cp, Matrix omega, SolveOutcome outcome) {
  ConcordEstimate est;
  est.kkt = concord_kkt_residual(cp, omega);
  est.omega = std::move(omega);
  est.converged = outcome.converged;
  est.sweeps_used = outcome.sweeps_used;
  est.diagnostics = std::move(outcome.diagnostics);
  return est;
}

}  // namespace

void validate(const CovarianceProblem& cp) {
  const Matrix& s = cp.sigma_hat;
  if (s.rows() != s.cols() || s.rows() == 0) {
    throw InvalidProblem("covariance matrix must be square and non-empty");
  }
  if (!s.allFinite()) throw InvalidProblem("covariance matrix has non-finite entries");
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidProblem("covariance matrix is not symmetric");
  }
  for (Index k = 0; k < s.rows(); ++k) {
    if (!(s(k, k) > 0.0)) {
      throw InvalidProblem("diagonal entry " + std::to_string(k + 1) +
                           " of the covariance matrix is not positive");
    }
  }
  if (!(cp.lambda > 0.0)) throw InvalidProblem("lambda must be positive");
}

Matrix sample_covariance(const Matrix& data) {
  if (data.rows() == 0) throw InvalidProblem("data matrix has no rows");
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Matrix centered = data.rowwise() - mean;
  return (centered.transpose() * centered) / static_cast<double>(data.rows());
}

std::pair<std::size_t, std::size_t> packed_entry(std::size_t position) {
  std::size_t j = static_cast<std::size_t>((std::sqrt(8.0 * position + 1.0) - 1.0) / 2.0);
  while (packed_index(0, j) > position) --j;
  while (packed_index(0, j + 1) <= position) ++j;
  return {position - packed_index(0, j), j};
}

Vector pack(const Matrix& omega) {
  const auto p = static_cast<std::size_t>(omega.rows());
  Vector x(static_cast<Index>(packed_size(p)));
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i <= j; ++i) {
      x[static_cast<Index>(packed_index(i, j))] =
          omega(static_cast<Index>(i), static_cast<Index>(j));
    }
  }
  return x;
}

Matrix unpack(const Vector& packed, Index p) {
  if (static_cast<std::size_t>(packed.size()) != packed_size(static_cast<std::size_t>(p))) {
    throw DimensionMismatch("packed vector does not match dimension " + std::to_string(p));
  }
  Matrix omega(p, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double v = packed[static_cast<Index>(
          packed_index(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))];
      omega(i, j) = v;
      omega(j, i) = v;
    }
  }
  return omega;
}

double concord_objective(const CovarianceProblem& cp, const Matrix& omega) {
  const Index p = cp.dimension();
  if (omega.rows() != p || omega.cols() != p) {
    throw DimensionMismatch("Omega does not match the covariance dimension");
  }
  double value = 0.0;
  for (Index i = 0; i < p; ++i) {
    if (!(omega(i, i) > 0.0)) return kInf;
    value -= std::log(omega(i, i));
  }
  value += 0.5 * (omega.transpose() * cp.sigma_hat * omega).trace();
  double l1 = 0.0;
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < j; ++i) l1 += std::abs(omega(i, j));
  }
  return value + cp.lambda * l1;
}

VectorizedConcord vectorize_to_f2(const CovarianceProblem& cp) {
  const auto p = static_cast<std::size_t>(cp.dimension());
  for (std::size_t k = 0; k < p; ++k) {
    if (!(cp.sigma_hat(static_cast<Index>(k), static_cast<Index>(k)) > 0.0)) {
      throw InvalidProblem("covariance diagonal must be strictly positive");
    }
  }
  const auto n = static_cast<Index>(packed_size(p));
  const auto pp = static_cast<Index>(p * p);

  VectorizedConcord out;
  out.selector = Matrix::Zero(pp, n);
  out.block_sqrt = Matrix::Zero(pp, pp);
  for (std::size_t c = 0; c < p; ++c) {
    Matrix block(static_cast<Index>(p), static_cast<Index>(p));
    for (std::size_t r = 0; r < p; ++r) {
      const std::size_t row_src = slot_source(c, r, p);
      const std::size_t lo = std::min(row_src, c);
      const std::size_t hi = std::max(row_src, c);
      out.selector(static_cast<Index>(c * p + r), static_cast<Index>(packed_index(lo, hi))) = 1.0;
      for (std::size_t s = 0; s < p; ++s) {
        block(static_cast<Index>(r), static_cast<Index>(s)) =
            0.5 * cp.sigma_hat(static_cast<Index>(row_src),
                               static_cast<Index>(slot_source(c, s, p)));
      }
    }
    out.block_sqrt.block(static_cast<Index>(c * p), static_cast<Index>(c * p),
                         static_cast<Index>(p), static_cast<Index>(p)) = psd_sqrt(block);
  }

  std::vector<std::size_t> off_diagonal;
  out.entries.reserve(static_cast<std::size_t>(n));
  for (std::size_t pos = 0; pos < static_cast<std::size_t>(n); ++pos) {
    const auto e = packed_entry(pos);
    out.entries.push_back(e);
    if (e.first != e.second) off_diagonal.push_back(pos);
  }
  out.problem.E = DesignMatrix(out.block_sqrt * out.selector);
  out.problem.penalized = IndexSet(static_cast<std::size_t>(n), off_diagonal);
  out.problem.lambda = cp.lambda;
  return out;
}

bool ConcordEstimate::is_positive_definite() const {
  Eigen::LLT<Matrix> llt(omega);
  return llt.info() == Eigen::Success;
}

std::vector<std::pair<std::size_t, std::size_t>> ConcordEstimate::edges(double threshold) const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (Index i = 0; i < omega.rows(); ++i) {
    for (Index j = i + 1; j < omega.cols(); ++j) {
      if (std::abs(omega(i, j)) > threshold) {
        out.emplace_back(static_cast<std::size_t>(i + 1), static_cast<std::size_t>(j + 1));
      }
    }
  }
  return out;
}

KktResidual concord_kkt_residual(const CovarianceProblem& cp, const Matrix& omega) {
  const Index p = cp.dimension();
  const Matrix w = cp.sigma_hat * omega;
  Vector r(static_cast<Index>(packed_size(static_cast<std::size_t>(p))));
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const auto pos = static_cast<Index>(
          packed_index(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
      if (i == j) {
        if (!(omega(j, j) > 0.0)) throw DomainViolation("diagonal of Omega is not positive");
        r[pos] = w(j, j) - 1.0 / omega(j, j);
      } else {
        const double d = w(i, j) + w(j, i);
        r[pos] = omega(i, j) - soft_threshold(omega(i, j) - d, cp.lambda);
      }
    }
  }
  return make_kkt_residual(std::move(r));
}

ConcordEstimate concord_solve(const CovarianceProblem& cp, const SolverConfig& cfg,
                              SolvePath path, const Matrix* omega0) {
  validate(cp);
  const Index p = cp.dimension();
  const Matrix start = omega0 ? *omega0 : Matrix::Identity(p, p);
  if (start.rows() != p || start.cols() != p) {
    throw DimensionMismatch("starting Omega does not match the covariance dimension");
  }

  if (path == SolvePath::kVectorized) {
    const VectorizedConcord vec = vectorize_to_f2(cp);
    SolveOutcome outcome = solve(vec.problem, pack(start), cfg);
    Matrix omega = unpack(outcome.x_final, p);
    return finish(cp, std::move(omega), std::move(outcome));
  }

  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const std::size_t n = packed_size(static_cast<std::size_t>(p));
  const std::vector<std::size_t> order = resolve_order(cfg.order, n);

  SolveOutcome outcome;
  DiagnosticsReport& diag = outcome.diagnostics;
  diag.initial_objective = concord_objective(cp, start);
  if (!std::isfinite(diag.initial_objective)) {
    throw DomainViolation("objective is infinite at the starting point");
  }

  DirectState state(cp, start);
  double cum = 0.0;
  for (std::size_t r = 1; r <= cfg.max_sweeps; ++r) {
    const Vector prev = state.x;
    for (std::size_t position : order) {
      state.update(position);
      if (cfg.record_coordinate_trace) {
        diag.coordinate_objective_trace.push_back(
            concord_objective(cp, unpack(state.x, p)));
      }
    }
    const Matrix omega = unpack(state.x, p);
    state.w = cp.sigma_hat * omega;

    const double step = (state.x - prev).norm();
    cum += step * step;
    const double residual = concord_kkt_residual(cp, omega).inf_norm;
    diag.objective_trace.push_back(concord_objective(cp, omega));
    diag.step_norms.push_back(step);
    diag.cum_sq_steps.push_back(cum);
    diag.kkt_inf_norm_trace.push_back(residual);
    outcome.sweeps_used = r;
    if (cfg.on_sweep) cfg.on_sweep(r, state.x);

    if (step <= cfg.epsilon) {
      outcome.converged = true;
      outcome.stop_reason = StopReason::kStepNorm;
      break;
    }
    if (cfg.kkt_stop && residual <= *cfg.kkt_stop) {
      outcome.converged = true;
      outcome.stop_reason = StopReason::kKktResidual;
      break;
    }
  }
  outcome.x_final = state.x;
  return finish(cp, unpack(state.x, p), std::move(outcome));
}

LevelSetConstants levelset_constants(const CovarianceProblem& cp) {
  const Index p = cp.dimension();
  const double column_lambda = 0.5 * cp.lambda;
  LevelSetConstants out;
  out.a1_per_column.resize(p);
  out.a2_per_column.resize(p);
  for (Index k = 0; k < p; ++k) {
    const double akk = 0.5 * cp.sigma_hat(k, k);
    double b_inf = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (j != k) b_inf = std::max(b_inf, std::abs(0.5 * cp.sigma_hat(j, k)));
    }
    // -log x + A x^2 >= A x + 1 + log A - A.
    double a1 = akk;
    double offset = 1.0 + std::log(akk) - akk;
    if (b_inf > 0.0) {
      // Minimizing the coupled term over the off-diagonal block leaves
      // -log x + min(A x^2, c (x - delta)) with the constants below; the
      // linear branch is bounded using (c/2) x - log x >= 1 + log(c/2).
      const double ratio = column_lambda / b_inf;
      const double c = akk * ratio;
      const double delta = 0.5 * ratio;
      a1 = std::min(a1, 0.5 * c);
      offset = std::min(offset, 1.0 + std::log(0.5 * c) - c * delta);
    }
    out.a1_per_column[k] = a1;
    out.a2_per_column[k] = -offset;
  }
  out.a1 = out.a1_per_column.minCoeff();
  out.a2 = out.a2_per_column.maxCoeff();
  return out;
}

double column_objective(const CovarianceProblem& cp, const Matrix& omega, Index k) {
  if (!(omega(k, k) > 0.0)) return kInf;
  const auto col = omega.col(k);
  double l1 = 0.0;
  for (Index j = 0; j < omega.rows(); ++j) {
    if (j != k) l1 += std::abs(omega(j, k));
  }
  return -std::log(omega(k, k)) + 0.5 * col.dot(cp.sigma_hat * col) + 0.5 * cp.lambda * l1;
}

}  // namespace ccm::concord
