#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "nia/agent_graph.hpp"
#include "nia/dataset.hpp"
#include "nia/logistic.hpp"
#include "nia/quadrature.hpp"
#include "nia/rng.hpp"

namespace nia {

struct HardInstanceSpec {
  std::size_t k = 4;
  std::size_t n = 1000;
  std::uint64_t seed = 0;

  void validate() const {
    if (k < 2) throw InvalidDimension("hard instance needs k >= 2, got " + std::to_string(k));
    if (n < 1) throw InvalidDimension("hard instance needs n >= 1");
  }
};

/// Differencing construction: latents Z_1..Z_k iid N(0,1), features
/// x_1 = Z_1 and x_i = Z_i - Z_{i-1}, label ~ Bernoulli(sigmoid(Z_k)).
/// Row i draws its latents from counters i*k .. i*k+k-1 of the latent
/// stream and its label uniform from counter i of the label stream.
inline Dataset generate_hard_instance(const HardInstanceSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto k = static_cast<Eigen::Index>(spec.k);
  const CounterStream latent(spec.seed, stream_tag::kLatent);
  const CounterStream label(spec.seed, stream_tag::kLabel);

  Dataset ds;
  ds.features.resize(n, k);
  ds.labels.resize(n);
  Matrix z(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto base = static_cast<std::uint64_t>(i) * spec.k;
    for (Eigen::Index j = 0; j < k; ++j) z(i, j) = latent.normal(base + static_cast<std::uint64_t>(j));
    ds.features(i, 0) = z(i, 0);
    for (Eigen::Index j = 1; j < k; ++j) ds.features(i, j) = z(i, j) - z(i, j - 1);
    ds.labels[i] = label.uniform(static_cast<std::uint64_t>(i)) < sigmoid(z(i, k - 1)) ? 1.0 : 0.0;
  }
  ds.optimal_logits = z.col(k - 1);
  ds.latents = std::move(z);
  return ds;
}

/// I_p = {k-p+1, ..., k}: the features the end-of-pass-p predictor can use.
inline FeatureSet relevance_set(std::size_t k, std::size_t p) {
  if (p < 1 || p > k) {
    throw InvalidDimension("pass index " + std::to_string(p) + " outside 1.." + std::to_string(k));
  }
  FeatureSet out;
  for (std::size_t l = k - p + 1; l <= k; ++l) out.insert(l);
  return out;
}

/// Linear predictor over I_p written as c (Z_k + xi / sqrt(p)).
struct PassPredictor {
  std::size_t p = 1;
  double c = 1.0;
  std::vector<double> coefficients;  // c_0..c_{p-1} on x_k, x_{k-1}, ..., x_{k-p+1}
  std::vector<double> alphas;        // alpha_j = c_j - c_{j-1}, j = 1..p-1
  double alpha_sum = 0.0;            // S
  double residual_variance = 0.0;    // Var(eta), eta = z - c Z_k
  double noise_variance_scaled = 0.0;  // V_p = p Var(eta) / c^2
};

/// Var(z - c_0 Z_k) for z = sum_j coeffs[j] x_{k-j}, computed through the
/// latent representation of the differencing map.
inline double pass_residual_variance(const std::vector<double>& coeffs) {
  if (coeffs.empty()) return 0.0;
  double var = 0.0;
  for (std::size_t j = 1; j < coeffs.size(); ++j) {
    const double latent = coeffs[j] - coeffs[j - 1];  // on Z_{k-j}
    var += latent * latent;
  }
  var += coeffs.back() * coeffs.back();  // -c_{p-1} on Z_{k-p}
  return var;
}

inline PassPredictor make_pass_predictor(std::size_t p, std::vector<double> coeffs) {
  PassPredictor out;
  out.p = p;
  out.c = coeffs.front();
  for (std::size_t j = 1; j < coeffs.size(); ++j) {
    out.alphas.push_back(coeffs[j] - coeffs[j - 1]);
    out.alpha_sum += out.alphas.back();
  }
  out.residual_variance = pass_residual_variance(coeffs);
  out.noise_variance_scaled =
      out.c == 0.0 ? 1.0 : static_cast<double>(p) * out.residual_variance / (out.c * out.c);
  out.coefficients = std::move(coeffs);
  return out;
}

/// Variance-minimizing coefficients for a fixed scale c: equal alphas with
/// sum -c(p-1)/p, so c_j = c (p - j) / p and Var(eta) = c^2 / p.
inline PassPredictor optimal_pass_coefficients(std::size_t p, double c) {
  if (p < 1) throw InvalidDimension("pass index must be at least 1");
  std::vector<double> coeffs(p);
  for (std::size_t j = 0; j < p; ++j) {
    coeffs[j] = c * static_cast<double>(p - j) / static_cast<double>(p);
  }
  PassPredictor out = make_pass_predictor(p, std::move(coeffs));
  out.alpha_sum = -c * static_cast<double>(p - 1) / static_cast<double>(p);
  out.residual_variance = c * c / static_cast<double>(p);
  out.noise_variance_scaled = 1.0;
  return out;
}

/// Numeric route to the same optimum: coarse grid over c_1..c_{p-1}, then
/// cyclic coordinate descent where each 1-D minimum is bracketed by
/// bisection on a central-difference derivative. Used by the verification
/// suite as an independent check of the closed form.
inline PassPredictor minimize_pass_variance_numeric(std::size_t p, double c) {
  if (p < 1) throw InvalidDimension("pass index must be at least 1");
  std::vector<double> coeffs(p, 0.0);
  coeffs[0] = c;
  if (p == 1) return make_pass_predictor(p, coeffs);

  const std::size_t free = p - 1;
  const double span = std::max(1.0, std::abs(c));
  constexpr int kGrid = 9;
  std::vector<int> idx(free, 0);
  std::vector<double> trial = coeffs;
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    for (std::size_t j = 0; j < free; ++j) {
      trial[j + 1] = -span + 2.0 * span * idx[j] / (kGrid - 1);
    }
    const double v = pass_residual_variance(trial);
    if (v < best) {
      best = v;
      coeffs = trial;
    }
    std::size_t pos = 0;
    while (pos < free && ++idx[pos] == kGrid) idx[pos++] = 0;
    if (pos == free) break;
  }

  auto derivative = [&](std::size_t j, double x) {
    constexpr double h = 1e-4;
    std::vector<double> a = coeffs;
    std::vector<double> b = coeffs;
    a[j] = x + h;
    b[j] = x - h;
    return (pass_residual_variance(a) - pass_residual_variance(b)) / (2.0 * h);
  };
  for (int sweep = 0; sweep < 5000; ++sweep) {
    double moved = 0.0;
    for (std::size_t j = 1; j < p; ++j) {
      double lo = coeffs[j] - 2.0 * span;
      double hi = coeffs[j] + 2.0 * span;
      for (int it = 0; it < 200 && hi - lo > 1e-16 * span; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (derivative(j, mid) > 0.0) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      const double next = 0.5 * (lo + hi);
      moved = std::max(moved, std::abs(next - coeffs[j]));
      coeffs[j] = next;
    }
    if (moved <= 1e-13 * span) break;
  }
  return make_pass_predictor(p, std::move(coeffs));
}

struct QuadratureOptions {
  std::size_t nodes = 200;
  double bracket_tol = 1e-12;
};

/// h(u) = E[X sigmoid(X)] for X ~ N(0, u^2).
inline double gaussian_sigmoid_moment(double u, const GaussHermiteRule& rule) {
  return rule.expect_normal([](double x) { return x * sigmoid(x); }, u * u);
}

/// g'(c) = -E[Z sigmoid(Z)] + E[S sigmoid(c S)], Z ~ N(0,1), S ~ N(0, 1 + v):
/// the derivative in c of L(c (Z + xi)), xi ~ N(0, v).
inline double scaling_gradient(double c, double noise_variance, const GaussHermiteRule& rule) {
  const double bayes = rule.expect_normal([](double z) { return z * sigmoid(z); });
  const double mixed =
      rule.expect_normal([c](double s) { return s * sigmoid(c * s); }, 1.0 + noise_variance);
  return mixed - bayes;
}

struct ScalingFactor {
  double c = 0.0;
  double gradient = 0.0;     // g'(c) at the returned point
  double gradient_at_0 = 0.0;
  double gradient_at_1 = 0.0;
};

/// Minimizer of c -> L(c (Z + xi)), xi ~ N(0, v), by bisection on g'(c)
/// over [0, 1].
inline ScalingFactor optimal_scaling_factor_for_variance(double noise_variance,
                                                         const QuadratureOptions& quad = {}) {
  const GaussHermiteRule rule(quad.nodes);
  ScalingFactor out;
  out.gradient_at_0 = scaling_gradient(0.0, noise_variance, rule);
  out.gradient_at_1 = scaling_gradient(1.0, noise_variance, rule);
  if (!(out.gradient_at_0 < 0.0 && out.gradient_at_1 > 0.0)) {
    throw QuadratureFailure("g'(c) does not change sign on [0,1]: g'(0) = " +
                            std::to_string(out.gradient_at_0) +
                            ", g'(1) = " + std::to_string(out.gradient_at_1));
  }
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > quad.bracket_tol) {
    const double mid = 0.5 * (lo + hi);
    if (scaling_gradient(mid, noise_variance, rule) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.c = 0.5 * (lo + hi);
  out.gradient = scaling_gradient(out.c, noise_variance, rule);
  return out;
}

/// c*(p): noise variance 1/p, matching the end-of-pass-p predictor form.
inline ScalingFactor optimal_scaling_factor(std::size_t p, const QuadratureOptions& quad = {}) {
  if (p < 1) throw InvalidDimension("pass index must be at least 1");
  return optimal_scaling_factor_for_variance(1.0 / static_cast<double>(p), quad);
}

struct NoiseMonotonicity {
  double loss_small = 0.0;
  double loss_large = 0.0;
  double mean_difference = 0.0;  // loss_large - loss_small
  double standard_error = 0.0;   // of the paired difference
  [[nodiscard]] double margin_in_se() const {
    if (standard_error == 0.0) return mean_difference > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return mean_difference / standard_error;
  }
};

/// Monte Carlo estimate of L(c Z + xi) for xi ~ N(0, v) at two variances.
/// Both estimates share Z and the standardized noise G (xi = sqrt(v) G), and
/// integrate the label out via the conditional loss
/// -sigmoid(Z) z + log(1 + e^z).
inline NoiseMonotonicity noise_monotonicity_check(double c, double v_small, double v_large,
                                                  std::size_t n_mc, std::uint64_t seed) {
  if (v_small < 0.0 || v_large < v_small) {
    throw DomainError("need 0 <= v_small <= v_large");
  }
  if (n_mc < 2) throw InvalidDimension("need at least two Monte Carlo samples");
  const CounterStream latent(seed, stream_tag::kLatent);
  const CounterStream noise(seed, stream_tag::kNoise);
  const double s_small = std::sqrt(v_small);
  const double s_large = std::sqrt(v_large);
  CompensatedSum sum_small;
  CompensatedSum sum_large;
  CompensatedSum sum_diff;
  CompensatedSum sum_diff_sq;
  for (std::size_t i = 0; i < n_mc; ++i) {
    const double z = latent.normal(i);
    const double g = noise.normal(i);
    const double target = sigmoid(z);
    const double a = c * z + s_small * g;
    const double b = c * z + s_large * g;
    const double la = stable_softplus(a) - target * a;
    const double lb = stable_softplus(b) - target * b;
    sum_small.add(la);
    sum_large.add(lb);
    sum_diff.add(lb - la);
    sum_diff_sq.add((lb - la) * (lb - la));
  }
  const double n = static_cast<double>(n_mc);
  NoiseMonotonicity out;
  out.loss_small = sum_small.value() / n;
  out.loss_large = sum_large.value() / n;
  out.mean_difference = sum_diff.value() / n;
  const double var = std::max(0.0, (sum_diff_sq.value() - n * out.mean_difference * out.mean_difference) / (n - 1.0));
  out.standard_error = std::sqrt(var / n);
  return out;
}

/// Unnormalized lower-bound shape 1/(p+1) per pass.
inline std::vector<double> predicted_excess_curve(std::size_t k, const std::vector<std::size_t>& passes) {
  (void)k;
  std::vector<double> out;
  out.reserve(passes.size());
  for (std::size_t p : passes) {
    if (p < 1) throw InvalidDimension("pass index must be at least 1");
    out.push_back(1.0 / static_cast<double>(p + 1));
  }
  return out;
}

/// Regression diagnostics of an end-of-pass logit column on the hard instance.
struct PassDiagnostics {
  double slope_on_target = 0.0;          // OLS slope of the logit on Z_k (with intercept)
  Vector feature_coefficients;           // OLS of the logit on all k features
  double max_outside_relevance = 0.0;    // max |coefficient| over features outside I_p
};

inline PassDiagnostics diagnose_pass_logits(const Dataset& dataset, const VectorRef& logits,
                                            std::size_t p) {
  if (!dataset.latents) throw DomainError("pass diagnostics need the latent columns");
  const std::size_t k = dataset.d();
  const FeatureSet relevant = relevance_set(k, p);
  const Vector target = dataset.latents->col(static_cast<Eigen::Index>(dataset.latents->cols() - 1));

  PassDiagnostics out;
  const double tm = target.mean();
  const double zm = logits.mean();
  const double cov = ((target.array() - tm) * (logits.array() - zm)).sum();
  const double var = (target.array() - tm).square().sum();
  out.slope_on_target = cov / var;

  out.feature_coefficients = dataset.features.colPivHouseholderQr().solve(logits);
  for (std::size_t l = 1; l <= k; ++l) {
    if (!relevant.contains(l)) {
      out.max_outside_relevance = std::max(
          out.max_outside_relevance, std::abs(out.feature_coefficients[static_cast<Eigen::Index>(l - 1)]));
    }
  }
  return out;
}

}  // namespace nia
