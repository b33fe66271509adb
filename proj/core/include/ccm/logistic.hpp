#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "ccm/model.hpp"
#include "ccm/solver.hpp"
#include "ccm/types.hpp"

namespace ccm::logistic {

/// Rows of X are observations; labels are -1 or +1. No intercept column is
/// added; append a constant column to X to fit one (it is penalized like any
/// other coefficient).
struct LogisticDataset {
  Matrix X;
  Vector y;
};

/// Throws InvalidProblem for labels outside {-1, +1}, zero columns, or a
/// label count that does not match the rows of X.
void validate(const LogisticDataset& ds);

/// log(1 + exp(z)) without overflow.
double softplus(double z);
/// 1 / (1 + exp(-z)).
double sigmoid(double z);

/// g(eta) = sum_i log(1 + exp(-y_i eta_i)).
class LogisticOracle final : public SmoothOracle {
 public:
  explicit LogisticOracle(Vector labels);

  Index dimension() const override { return labels_.size(); }
  double value(const Vector& eta) const override;
  Vector gradient(const Vector& eta) const override;
  double directional_second_derivative(const Vector& eta, const Vector& v) const override;
  DirectionalDerivatives directional_derivatives(const Vector& eta,
                                                 const Vector& v) const override;

 private:
  Vector labels_;
};

std::shared_ptr<const SmoothOracle> logistic_oracle(const LogisticDataset& ds);

/// f1 instance with E = X, every coefficient penalized.
F1Problem make_problem(const LogisticDataset& ds, double lambda);

/// ||X' grad g(0)||_inf. For lambda at or above this value beta = 0 is optimal.
double origin_lambda_bound(const LogisticDataset& ds);

struct LogisticFit {
  Vector beta;
  std::vector<std::size_t> support;  // 0-based, beta_j != 0
  bool converged = false;
  std::size_t sweeps_used = 0;
  DiagnosticsReport diagnostics;
};

/// Cyclic coordinate minimization from beta = 0.
LogisticFit logistic_fit(const LogisticDataset& ds, double lambda, const SolverConfig& cfg);

/// sigmoid(X_new * beta), row by row.
Vector predict(const Vector& beta, const Matrix& X_new);
inline Vector predict(const LogisticFit& fit, const Matrix& X_new) {
  return predict(fit.beta, X_new);
}

}  // namespace ccm::logistic
