#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "nia/errors.hpp"

namespace nia {

/// Gauss-Hermite rule for the weight exp(-x^2) on the real line, by
/// Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi matrix
/// of the Hermite recurrence (off-diagonal sqrt(j/2)), weights are
/// sqrt(pi) times the squared first eigenvector components.
class GaussHermiteRule {
 public:
  explicit GaussHermiteRule(std::size_t nodes = 200) : nodes_(nodes), weights_(nodes) {
    if (nodes < 1) throw InvalidDimension("Gauss-Hermite rule needs at least one node");
    const auto n = static_cast<Eigen::Index>(nodes);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(std::max<Eigen::Index>(n - 1, 0));
    for (Eigen::Index j = 0; j + 1 < n; ++j) sub[j] = std::sqrt(static_cast<double>(j + 1) / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (eig.info() != Eigen::Success) throw QuadratureFailure("Jacobi eigenproblem did not converge");
    const double root_pi = std::sqrt(std::numbers::pi);
    for (Eigen::Index i = 0; i < n; ++i) {
      nodes_[static_cast<std::size_t>(i)] = eig.eigenvalues()[i];
      const double v = eig.eigenvectors()(0, i);
      weights_[static_cast<std::size_t>(i)] = root_pi * v * v;
    }
    // Symmetrize: the exact rule is symmetric about 0.
    for (std::size_t i = 0, k = nodes - 1; i < k; ++i, --k) {
      const double x = 0.5 * (nodes_[k] - nodes_[i]);
      const double w = 0.5 * (weights_[i] + weights_[k]);
      nodes_[i] = -x;
      nodes_[k] = x;
      weights_[i] = weights_[k] = w;
    }
    if (nodes % 2 == 1) nodes_[nodes / 2] = 0.0;
  }

  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] const std::vector<double>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<double>& weights() const { return weights_; }

  /// E[f(X)] for X ~ N(0, variance).
  template <class F>
  [[nodiscard]] double expect_normal(F&& f, double variance = 1.0) const {
    const double scale = std::sqrt(2.0 * variance);
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) acc += weights_[i] * f(scale * nodes_[i]);
    return acc / std::sqrt(std::numbers::pi);
  }

  /// E[f(X, Y)] for independent X ~ N(0, vx), Y ~ N(0, vy) by the product rule.
  template <class F>
  [[nodiscard]] double expect_normal2(F&& f, double vx = 1.0, double vy = 1.0) const {
    return expect_normal([&](double x) { return expect_normal([&](double y) { return f(x, y); }, vy); },
                         vx);
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

}  // namespace nia
