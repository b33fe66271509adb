#include "ccm/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ccm/errors.hpp"

namespace ccm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double penalty(const IndexSet& s, double lambda, const Vector& x) {
  double sum = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    if (s.contains(static_cast<std::size_t>(i))) sum += std::abs(x[i]);
  }
  return lambda * sum;
}

void check_common(const DesignMatrix& E, const IndexSet& s, double lambda,
                  ValidationResult& out) {
  for (Index j = 0; j < E.cols(); ++j) {
    if (!(E.column_norms_sq()[j] > 0.0)) {
      out.violations.push_back({ViolationKind::kZeroColumn, j,
                                "column " + std::to_string(j + 1) + " of E is zero"});
    }
  }
  if (!(lambda > 0.0)) {
    out.violations.push_back(
        {ViolationKind::kNonpositiveLambda, -1, "lambda must be positive"});
  }
  if (s.universe() != static_cast<std::size_t>(E.cols())) {
    out.violations.push_back({ViolationKind::kIndexSetSize, -1,
                              "penalized set is defined over " +
                                  std::to_string(s.universe()) + " indices, E has " +
                                  std::to_string(E.cols()) + " columns"});
  }
}

}  // namespace

DesignMatrix::DesignMatrix(Matrix entries)
    : entries_(std::move(entries)),
      column_norms_sq_(entries_.colwise().squaredNorm().transpose()) {}

DirectionalDerivatives SmoothOracle::directional_derivatives(const Vector& t,
                                                             const Vector& v) const {
  return {v.dot(gradient(t)), directional_second_derivative(t, v)};
}

LeastSquaresOracle::LeastSquaresOracle(Vector target) : target_(std::move(target)) {}

LeastSquaresOracle LeastSquaresOracle::zero_target(Index m) {
  return LeastSquaresOracle(Vector::Zero(m));
}

double LeastSquaresOracle::value(const Vector& t) const {
  return 0.5 * (t - target_).squaredNorm();
}

Vector LeastSquaresOracle::gradient(const Vector& t) const { return t - target_; }

double LeastSquaresOracle::directional_second_derivative(const Vector&,
                                                         const Vector& v) const {
  return v.squaredNorm();
}

DirectionalDerivatives LeastSquaresOracle::directional_derivatives(
    const Vector& t, const Vector& v) const {
  return {v.dot(t - target_), v.squaredNorm()};
}

IndexSet::IndexSet(std::size_t n, std::span<const std::size_t> members) : mask_(n, false) {
  for (std::size_t i : members) {
    if (i >= n) {
      throw InvalidProblem("index " + std::to_string(i + 1) + " outside 1.." +
                           std::to_string(n));
    }
    mask_[i] = true;
  }
}

IndexSet IndexSet::all(std::size_t n) {
  IndexSet s;
  s.mask_.assign(n, true);
  return s;
}

IndexSet IndexSet::none(std::size_t n) {
  IndexSet s;
  s.mask_.assign(n, false);
  return s;
}

std::size_t IndexSet::count() const {
  std::size_t c = 0;
  for (bool b : mask_) c += b ? 1 : 0;
  return c;
}

std::vector<std::size_t> IndexSet::members() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> IndexSet::complement() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (!mask_[i]) out.push_back(i);
  }
  return out;
}

bool ValidationResult::has(ViolationKind kind) const {
  for (const auto& v : violations) {
    if (v.kind == kind) return true;
  }
  return false;
}

std::string ValidationResult::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i].message;
  }
  return os.str();
}

ValidationResult validate_problem(const F1Problem& p) {
  ValidationResult out;
  check_common(p.E, p.penalized, p.lambda, out);
  if (!p.g) {
    out.violations.push_back({ViolationKind::kOracleDimension, -1, "no smooth oracle"});
  } else if (p.g->dimension() != p.E.rows()) {
    out.violations.push_back({ViolationKind::kOracleDimension, -1,
                              "oracle dimension does not match rows of E"});
  }
  if (p.boundary == BoundaryBehavior::kNonnegativeFullyPenalized &&
      p.penalized.count() != p.penalized.universe()) {
    out.violations.push_back(
        {ViolationKind::kBoundaryBranch, -1,
         "nonnegative-g branch requires every coordinate to be penalized"});
  }
  return out;
}

ValidationResult validate_problem(const F2Problem& p) {
  ValidationResult out;
  check_common(p.E, p.penalized, p.lambda, out);
  return out;
}

void require_valid(const F1Problem& p) {
  if (auto r = validate_problem(p); !r.ok()) throw InvalidProblem(r.summary());
}

void require_valid(const F2Problem& p) {
  if (auto r = validate_problem(p); !r.ok()) throw InvalidProblem(r.summary());
}

Iterate::Iterate(const DesignMatrix& E, Vector x) : x_(std::move(x)) {
  if (x_.size() != E.cols()) {
    throw DimensionMismatch("iterate has " + std::to_string(x_.size()) +
                            " entries, E has " + std::to_string(E.cols()) + " columns");
  }
  refresh(E);
}

void Iterate::set_coordinate(const DesignMatrix& E, Index i, double value) {
  const double delta = value - x_[i];
  x_[i] = value;
  if (delta != 0.0) residual_.noalias() += delta * E.col(i);
  ++updates_;
}

void Iterate::refresh(const DesignMatrix& E) {
  residual_.noalias() = E.entries() * x_;
  updates_ = 0;
}

double Iterate::cache_drift(const DesignMatrix& E) const {
  if (x_.size() == 0) return 0.0;
  return (residual_ - E.entries() * x_).lpNorm<Eigen::Infinity>();
}

double smooth_f1(const F1Problem& p, const Vector& x) {
  const Vector t = p.E.entries() * x;
  return p.g->value(t);
}

double eval_f1(const F1Problem& p, const Vector& x) {
  for (Index i = 0; i < x.size(); ++i) {
    if (!p.penalized.contains(static_cast<std::size_t>(i)) && x[i] < 0.0) return kInf;
  }
  const double g = smooth_f1(p, x);
  if (!std::isfinite(g)) return kInf;
  return g + penalty(p.penalized, p.lambda, x);
}

double smooth_f2(const F2Problem& p, const Vector& x) {
  double barrier = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    if (p.penalized.contains(static_cast<std::size_t>(i))) continue;
    if (!(x[i] > 0.0)) return kInf;
    barrier -= std::log(x[i]);
  }
  return (p.E.entries() * x).squaredNorm() + barrier;
}

double eval_f2(const F2Problem& p, const Vector& x) {
  const double s = smooth_f2(p, x);
  if (!std::isfinite(s)) return kInf;
  return s + penalty(p.penalized, p.lambda, x);
}

double partial_d(const F1Problem& p, const Iterate& it, Index i) {
  const Vector& t = it.residual();
  if (!std::isfinite(p.g->value(t))) {
    throw DomainViolation("gradient requested outside the domain of g");
  }
  return p.E.col(i).dot(p.g->gradient(t));
}

double partial_d(const F2Problem& p, const Iterate& it, Index i) {
  return 2.0 * p.E.col(i).dot(it.residual());
}

Vector gradient_d(const F1Problem& p, const Vector& x) {
  const Vector t = p.E.entries() * x;
  if (!std::isfinite(p.g->value(t))) {
    throw DomainViolation("gradient requested outside the domain of g");
  }
  return p.E.entries().transpose() * p.g->gradient(t);
}

Vector gradient_d(const F2Problem& p, const Vector& x) {
  const Vector t = p.E.entries() * x;
  return 2.0 * (p.E.entries().transpose() * t);
}

}  // namespace ccm
