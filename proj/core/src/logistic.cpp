#include "ccm/logistic.hpp"

#include <cmath>

#include "ccm/errors.hpp"

namespace ccm::logistic {

namespace {

// Beyond this argument log1p(exp(z)) == z + log1p(exp(-z)) is used.
constexpr double kSoftplusCutoff = 30.0;

}  // namespace

double softplus(double z) {
  if (z > kSoftplusCutoff) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void validate(const LogisticDataset& ds) {
  if (ds.y.size() != ds.X.rows()) {
    throw InvalidProblem("label count " + std::to_string(ds.y.size()) +
                         " does not match " + std::to_string(ds.X.rows()) + " rows");
  }
  for (Index i = 0; i < ds.y.size(); ++i) {
    if (ds.y[i] != 1.0 && ds.y[i] != -1.0) {
      throw InvalidProblem("label " + std::to_string(i + 1) + " is not -1 or +1");
    }
  }
  for (Index j = 0; j < ds.X.cols(); ++j) {
    if (ds.X.col(j).squaredNorm() == 0.0) {
      throw InvalidProblem("column " + std::to_string(j + 1) + " of X is zero");
    }
  }
}

LogisticOracle::LogisticOracle(Vector labels) : labels_(std::move(labels)) {}

double LogisticOracle::value(const Vector& eta) const {
  double sum = 0.0;
  for (Index i = 0; i < eta.size(); ++i) sum += softplus(-labels_[i] * eta[i]);
  return sum;
}

Vector LogisticOracle::gradient(const Vector& eta) const {
  Vector g(eta.size());
  for (Index i = 0; i < eta.size(); ++i) {
    g[i] = -labels_[i] * sigmoid(-labels_[i] * eta[i]);
  }
  return g;
}

double LogisticOracle::directional_second_derivative(const Vector& eta,
                                                     const Vector& v) const {
  double sum = 0.0;
  for (Index i = 0; i < eta.size(); ++i) {
    const double s = sigmoid(labels_[i] * eta[i]);
    sum += v[i] * v[i] * s * (1.0 - s);
  }
  return sum;
}

DirectionalDerivatives LogisticOracle::directional_derivatives(const Vector& eta,
                                                               const Vector& v) const {
  DirectionalDerivatives d;
  for (Index i = 0; i < eta.size(); ++i) {
    const double margin = labels_[i] * eta[i];
    const double s_pos = sigmoid(margin);
    const double s_neg = sigmoid(-margin);
    d.first -= v[i] * labels_[i] * s_neg;
    d.second += v[i] * v[i] * s_pos * s_neg;
  }
  return d;
}

std::shared_ptr<const SmoothOracle> logistic_oracle(const LogisticDataset& ds) {
  return std::make_shared<LogisticOracle>(ds.y);
}

F1Problem make_problem(const LogisticDataset& ds, double lambda) {
  F1Problem p;
  p.E = DesignMatrix(ds.X);
  p.penalized = IndexSet::all(static_cast<std::size_t>(ds.X.cols()));
  p.lambda = lambda;
  p.g = logistic_oracle(ds);
  p.boundary = BoundaryBehavior::kNonnegativeFullyPenalized;
  return p;
}

double origin_lambda_bound(const LogisticDataset& ds) {
  if (ds.X.cols() == 0) return 0.0;
  return (0.5 * (ds.X.transpose() * ds.y)).lpNorm<Eigen::Infinity>();
}

LogisticFit logistic_fit(const LogisticDataset& ds, double lambda, const SolverConfig& cfg) {
  validate(ds);
  const F1Problem problem = make_problem(ds, lambda);
  require_valid(problem);
  SolveOutcome outcome = solve(problem, default_start(problem), cfg);

  LogisticFit fit;
  fit.beta = std::move(outcome.x_final);
  for (Index j = 0; j < fit.beta.size(); ++j) {
    if (fit.beta[j] != 0.0) fit.support.push_back(static_cast<std::size_t>(j));
  }
  fit.converged = outcome.converged;
  fit.sweeps_used = outcome.sweeps_used;
  fit.diagnostics = std::move(outcome.diagnostics);
  return fit;
}

Vector predict(const Vector& beta, const Matrix& X_new) {
  if (X_new.cols() != beta.size()) {
    throw DimensionMismatch("X has " + std::to_string(X_new.cols()) +
                            " columns, model has " + std::to_string(beta.size()));
  }
  const Vector eta = X_new * beta;
  return eta.unaryExpr([](double z) { return sigmoid(z); });
}

}  // namespace ccm::logistic
