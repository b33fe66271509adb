#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ccm/types.hpp"

namespace ccm {

/// Dense m x n design matrix with cached squared column norms.
class DesignMatrix {
 public:
  DesignMatrix() = default;
  explicit DesignMatrix(Matrix entries);

  Index rows() const noexcept { return entries_.rows(); }
  Index cols() const noexcept { return entries_.cols(); }
  const Matrix& entries() const noexcept { return entries_; }
  const Vector& column_norms_sq() const noexcept { return column_norms_sq_; }
  auto col(Index i) const { return entries_.col(i); }

 private:
  Matrix entries_;
  Vector column_norms_sq_;
};

/// First and second derivative of g(t + s v) with respect to s at s = 0.
struct DirectionalDerivatives {
  double first = 0.0;
  double second = 0.0;
};

/// The smooth convex part g of f1, evaluated on t = E x.
///
/// value() returns +inf outside the effective domain. Derivatives are only
/// requested at points where value() is finite.
class SmoothOracle {
 public:
  virtual ~SmoothOracle() = default;

  virtual Index dimension() const = 0;
  virtual double value(const Vector& t) const = 0;
  virtual Vector gradient(const Vector& t) const = 0;
  /// v' * Hessian(t) * v.
  virtual double directional_second_derivative(const Vector& t,
                                               const Vector& v) const = 0;

  /// Both directional derivatives at once. Implementations that can share
  /// work between the two should override this.
  virtual DirectionalDerivatives directional_derivatives(const Vector& t,
                                                         const Vector& v) const;
};

/// g(t) = 0.5 * ||t - target||^2, finite everywhere.
class LeastSquaresOracle final : public SmoothOracle {
 public:
  explicit LeastSquaresOracle(Vector target);
  static LeastSquaresOracle zero_target(Index m);

  Index dimension() const override { return target_.size(); }
  double value(const Vector& t) const override;
  Vector gradient(const Vector& t) const override;
  double directional_second_derivative(const Vector& t,
                                       const Vector& v) const override;
  DirectionalDerivatives directional_derivatives(const Vector& t,
                                                 const Vector& v) const override;

 private:
  Vector target_;
};

/// Which alternative of the boundary assumption on g the caller relies on.
/// The library does not try to detect this.
enum class BoundaryBehavior {
  /// g(t) -> inf as t approaches the boundary of its domain.
  kBarrier,
  /// g >= 0 with full domain, and every coordinate is penalized.
  kNonnegativeFullyPenalized,
};

/// Penalized index set S as a mask over 0..n-1.
class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(std::size_t n, std::span<const std::size_t> members);
  static IndexSet all(std::size_t n);
  static IndexSet none(std::size_t n);

  std::size_t universe() const noexcept { return mask_.size(); }
  bool contains(std::size_t i) const { return mask_[i]; }
  std::size_t count() const;
  std::vector<std::size_t> members() const;
  std::vector<std::size_t> complement() const;

 private:
  std::vector<bool> mask_;
};

/// minimize g(E x) + lambda * sum_{i in S} |x_i|  subject to x_i >= 0 off S.
struct F1Problem {
  DesignMatrix E;
  IndexSet penalized;
  double lambda = 0.0;
  std::shared_ptr<const SmoothOracle> g;
  BoundaryBehavior boundary = BoundaryBehavior::kBarrier;

  Index dimension() const noexcept { return E.cols(); }
};

/// minimize x'E'Ex - sum_{i not in S} log x_i + lambda * sum_{i in S} |x_i|.
struct F2Problem {
  DesignMatrix E;
  IndexSet penalized;
  double lambda = 0.0;

  Index dimension() const noexcept { return E.cols(); }
};

enum class ViolationKind {
  kZeroColumn,
  kNonpositiveLambda,
  kIndexSetSize,
  kOracleDimension,
  kBoundaryBranch,
};

struct Violation {
  ViolationKind kind;
  Index index = -1;  // column for kZeroColumn, else -1
  std::string message;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(ViolationKind kind) const;
  std::string summary() const;
};

ValidationResult validate_problem(const F1Problem& p);
ValidationResult validate_problem(const F2Problem& p);

/// Throws InvalidProblem carrying the summary when validation fails.
void require_valid(const F1Problem& p);
void require_valid(const F2Problem& p);

/// Current point x together with the cached product t = E x.
class Iterate {
 public:
  Iterate() = default;
  Iterate(const DesignMatrix& E, Vector x);

  const Vector& x() const noexcept { return x_; }
  const Vector& residual() const noexcept { return residual_; }
  double operator[](Index i) const { return x_[i]; }

  /// Sets x_i and updates t in O(m).
  void set_coordinate(const DesignMatrix& E, Index i, double value);
  /// Recomputes t = E x from scratch.
  void refresh(const DesignMatrix& E);
  /// ||t - E x||_inf.
  double cache_drift(const DesignMatrix& E) const;
  std::size_t updates_since_refresh() const noexcept { return updates_; }

 private:
  Vector x_;
  Vector residual_;
  std::size_t updates_ = 0;
};

/// Extended-real objectives: +inf outside the domain or feasible set.
double eval_f1(const F1Problem& p, const Vector& x);
double eval_f2(const F2Problem& p, const Vector& x);

/// Smooth parts only: g(Ex) and x'E'Ex - sum log x_i.
double smooth_f1(const F1Problem& p, const Vector& x);
double smooth_f2(const F2Problem& p, const Vector& x);

/// i-th entry of the gradient of the smooth part (without the log barrier
/// for f2), computed from the cached residual.
double partial_d(const F1Problem& p, const Iterate& it, Index i);
double partial_d(const F2Problem& p, const Iterate& it, Index i);

/// Whole gradient d(x) of the smooth part, recomputing E x.
Vector gradient_d(const F1Problem& p, const Vector& x);
Vector gradient_d(const F2Problem& p, const Vector& x);

}  // namespace ccm
