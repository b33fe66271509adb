#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "ccm/concord.hpp"
#include "ccm/logistic.hpp"
#include "ccm/model.hpp"
#include "ccm/types.hpp"

namespace ccm::testing {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
/// exp(uniform(log lo, log hi)); lo > 0.
double log_uniform(Rng& rng, double lo, double hi);
Matrix uniform_matrix(Rng& rng, Index rows, Index cols, double lo, double hi);
Matrix gaussian_matrix(Rng& rng, Index rows, Index cols);
Vector gaussian_vector(Rng& rng, Index n);
std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n);
/// k distinct indices from 0..n-1, sorted.
std::vector<std::size_t> random_subset(Rng& rng, std::size_t n, std::size_t k);

/// Gaussian features, labels from a sparse planted model with logistic noise.
logistic::LogisticDataset random_logistic(Rng& rng, Index rows, Index cols);

/// Gaussian E with `barrier` random unpenalized coordinates (barrier <= rows
/// keeps the level sets bounded).
F2Problem random_f2(Rng& rng, Index rows, Index cols, std::size_t barrier, double lambda);

/// random_f2 with lambda = fraction * max_{i in S} |d_i| at the default
/// start, the analogue of a fraction of the logistic origin bound.
F2Problem random_f2_scaled(Rng& rng, Index rows, Index cols, std::size_t barrier,
                           double fraction);

/// Sample covariance of `observations` Gaussian rows with random scales.
Matrix random_covariance(Rng& rng, Index p, Index observations);

/// Symmetric matrix with log-uniform positive diagonal and off-diagonal
/// entries that are zero with probability 1/4.
Matrix random_symmetric_positive_diagonal(Rng& rng, Index p, double scale);

/// g(t) = 0.5 ||t - c||^2 - sum log t_j, +inf unless every t_j > 0.
class BarrierOracle final : public SmoothOracle {
 public:
  explicit BarrierOracle(Vector center);

  Index dimension() const override { return center_.size(); }
  double value(const Vector& t) const override;
  Vector gradient(const Vector& t) const override;
  double directional_second_derivative(const Vector& t, const Vector& v) const override;

 private:
  Vector center_;
};

/// Least-squares f1 problem g = 0.5 ||t||^2 with all coordinates penalized.
F1Problem least_squares_problem(const Matrix& E, double lambda);

/// Independent minimizer of a u^2 + b u - log u over u > 0: geometric grid
/// scan, golden-section refinement, then bisection on the derivative.
double oracle_quad_log(double a, double b);
/// Independent minimizer of a u^2 + b u + lambda |u| by the same route.
double oracle_quad_l1(double a, double b, double lambda);

}  // namespace ccm::testing
