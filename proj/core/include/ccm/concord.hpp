#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "ccm/model.hpp"
#include "ccm/optimality.hpp"
#include "ccm/solver.hpp"
#include "ccm/types.hpp"

namespace ccm::concord {

/// Sample covariance and penalty for the CONCORD pseudo-likelihood
///
///   Q(Omega) = -sum_i log w_ii + 1/2 sum_i Omega_i' S Omega_i + lambda sum_{i<j} |w_ij|.
struct CovarianceProblem {
  Matrix sigma_hat;
  double lambda = 0.0;

  Index dimension() const noexcept { return sigma_hat.rows(); }
};

/// Throws InvalidProblem unless sigma_hat is square, symmetric to 1e-12
/// relative, has a strictly positive diagonal, and lambda > 0.
void validate(const CovarianceProblem& cp);

/// Covariance of the rows of data around their mean, divided by the number
/// of rows.
Matrix sample_covariance(const Matrix& data);

/// Number of distinct entries of a symmetric p x p matrix.
constexpr std::size_t packed_size(std::size_t p) noexcept { return p * (p + 1) / 2; }

/// Position of w_ij (i <= j, 0-based) in the packed layout
/// (w_11, w_12, w_22, w_13, w_23, w_33, ...): column by column, diagonal last.
constexpr std::size_t packed_index(std::size_t i, std::size_t j) noexcept {
  return j * (j + 1) / 2 + i;
}

/// Inverse of packed_index: returns (i, j) with i <= j.
std::pair<std::size_t, std::size_t> packed_entry(std::size_t position);

Vector pack(const Matrix& omega);
Matrix unpack(const Vector& packed, Index p);

/// Q(Omega); +inf if a diagonal entry is not positive.
double concord_objective(const CovarianceProblem& cp, const Matrix& omega);

/// The same problem written as an f2 instance over the packed vector.
struct VectorizedConcord {
  F2Problem problem;
  /// The p^2 x p(p+1)/2 selector with exactly one 1 per row.
  Matrix selector;
  /// Block-diagonal square root of the half-covariance blocks.
  Matrix block_sqrt;
  /// position -> (i, j), i <= j.
  std::vector<std::pair<std::size_t, std::size_t>> entries;
};

/// Builds E = blocksqrt(S) * P. Eigenvalues of a block below 1e-14 * trace
/// are clamped to zero; below -1e-8 * trace raises NotPSD.
VectorizedConcord vectorize_to_f2(const CovarianceProblem& cp);

enum class SolvePath { kDirect, kVectorized };

struct ConcordEstimate {
  Matrix omega;
  bool converged = false;
  std::size_t sweeps_used = 0;
  DiagnosticsReport diagnostics;
  KktResidual kkt;

  bool is_positive_definite() const;
  /// 1-based (i, j), i < j, with |w_ij| > threshold.
  std::vector<std::pair<std::size_t, std::size_t>> edges(double threshold = 1e-8) const;
};

/// KKT residual of the packed problem, computed from Omega directly.
KktResidual concord_kkt_residual(const CovarianceProblem& cp, const Matrix& omega);

/// Coordinate minimization of Q starting from the identity (or omega0).
/// The direct path updates packed entries in place with cached S * Omega;
/// cfg.order, when given, permutes packed positions. The vectorized path
/// materializes E and runs the generic f2 solver, so it is only meant for
/// small p.
ConcordEstimate concord_solve(const CovarianceProblem& cp, const SolverConfig& cfg,
                              SolvePath path = SolvePath::kDirect,
                              const Matrix* omega0 = nullptr);

/// Lower-bound constants for the level sets of Q.
///
/// For each column k with A = 1/2 P^k S P^k' and per-column penalty lambda / 2,
///   h_k(Omega) = -log w_kk + 1/2 Omega_k' S Omega_k + lambda/2 sum_{j != k} |w_jk|
///              >= a1_k * w_kk - a2_k.
/// a1 = min_k a1_k and a2 = max_k a2_k, so every column also satisfies
/// h_k >= a1 * w_kk - a2 and Q >= a1 * trace(Omega) - p * a2.
struct LevelSetConstants {
  double a1 = 0.0;
  double a2 = 0.0;
  Vector a1_per_column;
  Vector a2_per_column;
};

LevelSetConstants levelset_constants(const CovarianceProblem& cp);

/// h_k(Omega) for column k as in LevelSetConstants.
double column_objective(const CovarianceProblem& cp, const Matrix& omega, Index k);

}  // namespace ccm::concord
