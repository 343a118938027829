#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "nia/dataset.hpp"
#include "nia/errors.hpp"

namespace nia {

using MatrixRef = Eigen::Ref<const Matrix>;
using VectorRef = Eigen::Ref<const Vector>;

/// Neumaier-compensated running sum. Loss values are compared at the
/// 1e-15 level across different logit columns, so plain summation is not
/// enough.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// log(1 + e^z) without overflow. The two branches satisfy
/// softplus(z) - softplus(-z) = z.
inline double stable_softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline Vector sigmoid(const VectorRef& z) {
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

/// Pointwise loss l(z, y) = log(1 + e^z) - y z.
inline double pointwise_bce(double z, double y) { return stable_softplus(z) - y * z; }

/// Mean BCE of a logit column against binary labels.
inline double bce_loss(const VectorRef& logits, const VectorRef& labels) {
  if (logits.size() != labels.size()) {
    throw LengthMismatch("logits " + std::to_string(logits.size()) + " vs labels " +
                         std::to_string(labels.size()));
  }
  if (logits.size() == 0) throw LengthMismatch("bce_loss needs at least one sample");
  CompensatedSum acc;
  for (Eigen::Index i = 0; i < logits.size(); ++i) acc.add(pointwise_bce(logits[i], labels[i]));
  return acc.value() / static_cast<double>(logits.size());
}

struct FitOptions {
  double grad_tol = 1e-10;       // sup-norm of the gradient at termination
  std::size_t max_iters = 100;
  double ridge = 0.0;            // adds ridge * |theta|^2 / 2 (intercept excluded)
  bool intercept = false;        // off in every theory suite
  double backtrack = 0.5;        // step shrink factor
  double initial_step = 1.0;
  double armijo = 1e-4;
  double max_weight_norm = 1e4;  // separable data guard

  void validate() const {
    if (!(grad_tol > 0.0)) throw DomainError("grad_tol must be positive");
    if (max_iters < 1) throw DomainError("max_iters must be at least 1");
    if (!(ridge >= 0.0)) throw DomainError("ridge must be nonnegative");
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw DomainError("backtrack must lie in (0,1)");
    if (!(initial_step > 0.0)) throw DomainError("initial_step must be positive");
  }
};

enum class FitStatus { Converged, MaxIterations, WeightNormCap, NoProgress };

inline const char* to_string(FitStatus s) {
  switch (s) {
    case FitStatus::Converged: return "converged";
    case FitStatus::MaxIterations: return "max_iterations";
    case FitStatus::WeightNormCap: return "weight_norm_cap";
    case FitStatus::NoProgress: return "no_progress";
  }
  return "unknown";
}

struct FitResult {
  Vector weights;            // one per design column
  double intercept = 0.0;    // stays 0 unless FitOptions::intercept
  double loss = 0.0;         // empirical BCE at the solution (no ridge term)
  double grad_norm = 0.0;    // sup-norm of the objective gradient
  std::size_t iterations = 0;
  bool converged = false;
  FitStatus status = FitStatus::MaxIterations;
};

/// theta^T x per row.
inline Vector predict_logits(const VectorRef& weights, const MatrixRef& design) {
  if (weights.size() != design.cols()) {
    throw DimensionMismatch("weights " + std::to_string(weights.size()) + " vs design columns " +
                            std::to_string(design.cols()));
  }
  if (design.cols() == 0) return Vector::Zero(design.rows());
  return design * weights;
}

inline Vector predict_logits(const FitResult& fit, const MatrixRef& design) {
  Vector z = predict_logits(fit.weights, design);
  if (fit.intercept != 0.0) z.array() += fit.intercept;
  return z;
}

/// Per-column empirical mean of column_l * (sigmoid(logit) - y). At an
/// unregularized optimum these are exactly the gradient components.
inline Vector residual_moments(const MatrixRef& design, const VectorRef& logits,
                               const VectorRef& labels) {
  if (design.rows() != logits.size() || logits.size() != labels.size()) {
    throw DimensionMismatch("design rows, logits and labels must agree");
  }
  const Eigen::Index n = design.rows();
  Vector residual(n);
  for (Eigen::Index i = 0; i < n; ++i) residual[i] = sigmoid(logits[i]) - labels[i];
  if (n == 0) return Vector::Zero(design.cols());
  return design.transpose() * residual / static_cast<double>(n);
}

/// Mean BCE and its gradient at theta (ridge term included when set).
/// This is the reference used by finite-difference checks.
inline double bce_objective(const MatrixRef& design, const VectorRef& labels, const VectorRef& theta,
                            double ridge = 0.0, Vector* gradient = nullptr) {
  const Vector z = predict_logits(theta, design);
  double value = bce_loss(z, labels) + 0.5 * ridge * theta.squaredNorm();
  if (gradient) *gradient = residual_moments(design, z, labels) + ridge * theta;
  return value;
}

namespace detail {

struct NewtonState {
  double loss = 0.0;       // BCE part
  double objective = 0.0;  // loss + ridge term
  Vector gradient;
  Matrix hessian;
};

// One pass over the rows: loss, gradient and Hessian. The exponential is
// shared between the softplus and sigmoid evaluations.
inline void evaluate(const MatrixRef& design, const VectorRef& labels, const Vector& theta,
                     double ridge, bool intercept, NewtonState& s) {
  const Eigen::Index n = design.rows();
  const Eigen::Index m = design.cols();
  const Eigen::Index p = theta.size();
  Vector z = m > 0 ? Vector(design * theta.head(m)) : Vector(Vector::Zero(n));
  if (intercept) z.array() += theta[m];

  CompensatedSum loss;
  s.gradient.setZero(p);
  s.hessian.setZero(p, p);
  Vector xrow(p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double zi = z[i];
    const double e = std::exp(-std::abs(zi));
    const double sp = (zi > 0.0 ? zi : 0.0) + std::log1p(e);
    const double prob = zi >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
    const double yi = labels[i];
    loss.add(sp - yi * zi);
    const double r = prob - yi;
    const double w = prob * (1.0 - prob);
    for (Eigen::Index j = 0; j < m; ++j) xrow[j] = design(i, j);
    if (intercept) xrow[m] = 1.0;
    for (Eigen::Index a = 0; a < p; ++a) {
      s.gradient[a] += r * xrow[a];
      const double wa = w * xrow[a];
      for (Eigen::Index b = 0; b <= a; ++b) s.hessian(a, b) += wa * xrow[b];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  s.loss = loss.value() * inv_n;
  s.gradient *= inv_n;
  s.hessian *= inv_n;
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = 0; b < a; ++b) s.hessian(b, a) = s.hessian(a, b);
  }
  double penalty = 0.0;
  if (ridge > 0.0) {
    for (Eigen::Index j = 0; j < m; ++j) {
      penalty += theta[j] * theta[j];
      s.gradient[j] += ridge * theta[j];
      s.hessian(j, j) += ridge;
    }
  }
  s.objective = s.loss + 0.5 * ridge * penalty;
}

inline Vector newton_direction(const Matrix& hessian, const Vector& gradient) {
  Eigen::LDLT<Matrix> ldlt(hessian);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    Vector step = ldlt.solve(gradient);
    if (step.allFinite() && step.dot(gradient) > 0.0) return step;
  }
  // Rank-deficient Hessian (e.g. an all-zero column): minimum-norm solve
  // keeps the step out of the null space.
  Vector step = hessian.completeOrthogonalDecomposition().solve(gradient);
  if (!step.allFinite() || !(step.dot(gradient) > 0.0)) step = gradient;
  return step;
}

}  // namespace detail

/// Damped Newton minimization of the empirical BCE over the design columns,
/// started from zero weights. Never throws for numerical trouble; the
/// outcome is reported through FitResult::status.
inline FitResult fit_logistic(const MatrixRef& design, const VectorRef& labels,
                              const FitOptions& opts = {}) {
  opts.validate();
  if (design.rows() != labels.size()) {
    throw DimensionMismatch("design has " + std::to_string(design.rows()) + " rows, labels " +
                            std::to_string(labels.size()));
  }
  if (design.rows() < 1) throw DimensionMismatch("fit_logistic needs at least one row");
  if (!design.allFinite()) throw NonFinite("design matrix contains non-finite values");
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (!std::isfinite(labels[i])) throw NonFinite("labels contain non-finite values");
    if (labels[i] != 0.0 && labels[i] != 1.0) throw DomainError("labels must be 0 or 1");
  }

  const Eigen::Index m = design.cols();
  const Eigen::Index p = m + (opts.intercept ? 1 : 0);
  FitResult result;
  if (p == 0) {
    // No information: predict the prior, i.e. logit 0.
    result.weights = Vector(0);
    result.loss = bce_loss(Vector::Zero(design.rows()), labels);
    result.converged = true;
    result.status = FitStatus::Converged;
    return result;
  }

  Vector theta = Vector::Zero(p);
  detail::NewtonState cur;
  detail::evaluate(design, labels, theta, opts.ridge, opts.intercept, cur);
  detail::NewtonState trial;

  result.status = FitStatus::MaxIterations;
  std::size_t iter = 0;
  for (;; ++iter) {
    const double gnorm = cur.gradient.lpNorm<Eigen::Infinity>();
    if (gnorm <= opts.grad_tol) {
      result.status = FitStatus::Converged;
      break;
    }
    if (theta.norm() > opts.max_weight_norm) {
      result.status = FitStatus::WeightNormCap;
      break;
    }
    if (iter >= opts.max_iters) break;

    const Vector dir = detail::newton_direction(cur.hessian, cur.gradient);
    const double slope = -dir.dot(cur.gradient);
    double step = opts.initial_step;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      const Vector candidate = theta - step * dir;
      detail::evaluate(design, labels, candidate, opts.ridge, opts.intercept, trial);
      const bool sufficient = trial.objective <= cur.objective + opts.armijo * step * slope;
      // Near the optimum the predicted decrease drops below the resolution
      // of the loss; accept full steps that still shrink the gradient.
      const double resolution = 64.0 * std::numeric_limits<double>::epsilon() *
                                std::max(1.0, std::abs(cur.objective));
      const bool flat = std::abs(slope) * step <= resolution &&
                        trial.objective <= cur.objective + resolution &&
                        trial.gradient.lpNorm<Eigen::Infinity>() < gnorm;
      if (std::isfinite(trial.objective) && (sufficient || flat)) {
        theta = candidate;
        std::swap(cur, trial);
        accepted = true;
        break;
      }
      step *= opts.backtrack;
    }
    if (!accepted) {
      result.status = FitStatus::NoProgress;
      break;
    }
  }

  result.iterations = iter;
  result.weights = theta.head(m);
  result.intercept = opts.intercept ? theta[m] : 0.0;
  result.loss = cur.loss;
  result.grad_norm = cur.gradient.lpNorm<Eigen::Infinity>();
  result.converged = result.status == FitStatus::Converged;
  return result;
}

}  // namespace nia
