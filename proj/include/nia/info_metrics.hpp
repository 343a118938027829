#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "nia/logistic.hpp"

namespace nia {

/// Bernoulli KL divergence KL(Bern(p) || Bern(q)) with 0 log 0 = 0.
/// Returns +infinity only when q sits on an endpoint that p does not.
inline double bernoulli_kl(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p = " + std::to_string(p) + " outside [0,1]");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("q = " + std::to_string(q) + " outside [0,1]");
  auto term = [](double a, double b) {
    if (a == 0.0) return 0.0;
    if (b == 0.0) return std::numeric_limits<double>::infinity();
    return a * std::log(a / b);
  };
  const double kl = term(p, q) + term(1.0 - p, 1.0 - q);
  return kl < 0.0 ? 0.0 : kl;
}

/// KL(Bern(sigmoid(a)) || Bern(sigmoid(b))) from logits:
/// sigmoid(a) (a - b) - softplus(a) + softplus(b).
inline double bernoulli_kl_logits(double a, double b) {
  const double kl = sigmoid(a) * (a - b) - stable_softplus(a) + stable_softplus(b);
  return kl < 0.0 ? 0.0 : kl;
}

/// Expected KL D(p || q): mean of pointwise Bernoulli KL over rows.
inline double expected_kl(const VectorRef& p_col, const VectorRef& q_col) {
  if (p_col.size() != q_col.size()) throw LengthMismatch("expected_kl columns differ in length");
  if (p_col.size() == 0) return 0.0;
  CompensatedSum acc;
  for (Eigen::Index i = 0; i < p_col.size(); ++i) acc.add(bernoulli_kl(p_col[i], q_col[i]));
  return acc.value() / static_cast<double>(p_col.size());
}

/// Expected KL with both predictors given as logit columns. No clamping.
inline double expected_kl_logits(const VectorRef& p_logits, const VectorRef& q_logits) {
  if (p_logits.size() != q_logits.size()) throw LengthMismatch("expected_kl columns differ in length");
  if (p_logits.size() == 0) return 0.0;
  CompensatedSum acc;
  for (Eigen::Index i = 0; i < p_logits.size(); ++i) {
    const double a = p_logits[i];
    const double b = q_logits[i];
    acc.add(sigmoid(a) * (a - b) - stable_softplus(a) + stable_softplus(b));
  }
  return acc.value() / static_cast<double>(p_logits.size());
}

/// D(p || q) - 2 E[(p - q)^2]; nonnegative up to rounding.
inline double pinsker_gap(const VectorRef& p_col, const VectorRef& q_col) {
  if (p_col.size() != q_col.size()) throw LengthMismatch("pinsker_gap columns differ in length");
  if (p_col.size() == 0) return 0.0;
  const double mse = (p_col - q_col).squaredNorm() / static_cast<double>(p_col.size());
  return expected_kl(p_col, q_col) - 2.0 * mse;
}

/// Components of the loss decomposition L(q) = L(p*) + D(p* || q), each
/// side evaluated separately on the empirical distribution.
struct Decomposition {
  double loss_q = 0.0;
  double loss_star = 0.0;
  double divergence = 0.0;
  [[nodiscard]] double residual() const { return std::abs(loss_q - loss_star - divergence); }
};

inline Decomposition decompose_loss(const VectorRef& labels, const VectorRef& star_logits,
                                    const VectorRef& q_logits) {
  if (star_logits.size() != labels.size() || q_logits.size() != labels.size()) {
    throw LengthMismatch("decomposition columns must match the label count");
  }
  return {bce_loss(q_logits, labels), bce_loss(star_logits, labels),
          expected_kl_logits(star_logits, q_logits)};
}

/// |L(q) - L(p*) - D(p* || q)|. star_logits must come from an unregularized
/// fit over some feature set and q_logits from a linear predictor over the
/// same set; the residual then scales with the solver's gradient tolerance.
inline double verify_decomposition(const Dataset& dataset, const VectorRef& star_logits,
                                   const VectorRef& q_logits) {
  return decompose_loss(dataset.labels, star_logits, q_logits).residual();
}

/// B_g * B_X * sqrt(k * epsilon / 2).
inline double residual_bound_rhs(double b_g, double b_x, double k, double epsilon) {
  if (b_g < 0 || b_x < 0 || k < 0 || epsilon < 0) {
    throw DomainError("residual bound arguments must be nonnegative");
  }
  return b_g * b_x * std::sqrt(k * epsilon / 2.0);
}

/// B_{p*} * B_X * M / sqrt(D): excess-risk bound for an M-covered path of depth D.
inline double convergence_bound_rhs(double b_pstar, double b_x, std::size_t window, std::size_t depth) {
  if (window < 1 || depth < window) {
    throw InvalidDimension("need depth >= window >= 1, got window " + std::to_string(window) +
                           ", depth " + std::to_string(depth));
  }
  return b_pstar * b_x * static_cast<double>(window) / std::sqrt(static_cast<double>(depth));
}

struct StableBlock {
  std::size_t block = 0;  // 1-based block index
  std::size_t first = 0;  // 1-based first path position in the block
  std::size_t last = 0;   // 1-based last path position
  double drop = 0.0;      // loss[first] - loss[last]
  std::size_t num_blocks = 0;
};

/// Splits the path into K = floor(D / M) disjoint length-M blocks and returns
/// the one with the smallest internal loss drop (lowest index on ties).
inline StableBlock stable_block(const VectorRef& losses, std::size_t window) {
  const auto depth = static_cast<std::size_t>(losses.size());
  if (window < 1 || depth < window) {
    throw InvalidDimension("stable_block needs 1 <= M <= path length");
  }
  StableBlock best;
  best.num_blocks = depth / window;
  best.drop = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < best.num_blocks; ++b) {
    const std::size_t s = b * window;
    const std::size_t t = s + window - 1;
    const double drop = losses[static_cast<Eigen::Index>(s)] - losses[static_cast<Eigen::Index>(t)];
    if (drop < best.drop) {
      best.drop = drop;
      best.block = b + 1;
      best.first = s + 1;
      best.last = t + 1;
    }
  }
  return best;
}

/// max_l sqrt(mean(x_l^2)) over the design columns.
inline double feature_scale_bound(const MatrixRef& features) {
  double best = 0.0;
  const double n = static_cast<double>(features.rows());
  for (Eigen::Index l = 0; l < features.cols(); ++l) {
    best = std::max(best, std::sqrt(features.col(l).squaredNorm() / n));
  }
  return best;
}

/// |E[(sigmoid(z_p) - y) z_g]|: the residual alignment bounded by
/// residual_bound_rhs.
inline double residual_alignment(const VectorRef& logits, const VectorRef& labels,
                                 const VectorRef& comparator_logits) {
  if (logits.size() != labels.size() || comparator_logits.size() != labels.size()) {
    throw LengthMismatch("residual_alignment columns differ in length");
  }
  CompensatedSum acc;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    acc.add((sigmoid(logits[i]) - labels[i]) * comparator_logits[i]);
  }
  return std::abs(acc.value() / static_cast<double>(logits.size()));
}

/// Bound ingredients and evaluated right-hand sides for one run.
struct TheoryReport {
  double b_x = 0.0;
  double b_g = 0.0;
  std::size_t window = 0;
  std::size_t depth = 0;
  double epsilon = 0.0;
  double rhs_residual_bound = 0.0;
  double rhs_convergence_bound = 0.0;

  static TheoryReport make(double b_g, double b_x, std::size_t window, std::size_t depth,
                           double epsilon) {
    TheoryReport r;
    r.b_g = b_g;
    r.b_x = b_x;
    r.window = window;
    r.depth = depth;
    r.epsilon = epsilon < 0.0 ? 0.0 : epsilon;
    r.rhs_residual_bound = residual_bound_rhs(b_g, b_x, static_cast<double>(window), r.epsilon);
    r.rhs_convergence_bound = convergence_bound_rhs(b_g, b_x, window, depth);
    return r;
  }
};

}  // namespace nia
