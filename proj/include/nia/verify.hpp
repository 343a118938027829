#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "nia/experiment.hpp"
#include "nia/instance_lab.hpp"
#include "nia/protocol.hpp"
#include "nia/rng.hpp"

namespace nia {

/// Outcome of one verification suite. `worst` is the statistic compared
/// against `threshold`; `margin` is positive when the suite passes.
struct SuiteResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;
  double threshold = 0.0;
  double margin = 0.0;
  double seconds = 0.0;
  nlohmann::json details = nlohmann::json::object();

  [[nodiscard]] nlohmann::json to_json() const {
    return {{"name", name},         {"passed", passed}, {"worst", worst},    {"threshold", threshold},
            {"margin", margin},     {"seconds", seconds}, {"details", details}};
  }
};

struct VerifyReport {
  std::vector<SuiteResult> suites;
  [[nodiscard]] bool passed() const {
    return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed; });
  }
  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : suites) arr.push_back(s.to_json());
    return {{"passed", passed()}, {"suites", arr}};
  }
};

namespace detail {

inline SuiteResult upper_limited(std::string name, double worst, double threshold) {
  SuiteResult r;
  r.name = std::move(name);
  r.worst = worst;
  r.threshold = threshold;
  r.margin = threshold - worst;
  r.passed = std::isfinite(worst) && worst <= threshold;
  return r;
}

inline FitOptions suite_solver(const ExperimentConfig& cfg, double default_tol) {
  if (cfg.solver_given) return cfg.solver;
  FitOptions opts;
  opts.grad_tol = default_tol;
  return opts;
}

}  // namespace detail

/// Every per-column residual moment after every converged fit of a cyclic
/// protocol run, plus the largest consecutive loss increase along the path.
inline std::pair<SuiteResult, SuiteResult> verify_protocol_suites(const ExperimentConfig& cfg) {
  const auto& v = cfg.verify;
  const FitOptions opts = detail::suite_solver(cfg, 1e-10);
  const Dataset ds = generate_hard_instance({v.k, v.n, v.seed});
  const AgentGraph graph = cyclic_path_assignment(v.k, v.depth);
  const ProtocolTrace trace = run_protocol(ds, graph, opts);

  double worst_moment = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  for (AgentId id : trace.order) {
    if (!trace.model(id).converged) {
      ++skipped;
      continue;
    }
    const Matrix design = agent_design(ds, graph, id, trace);
    const Vector m = residual_moments(design, trace.logits(id), ds.labels);
    if (m.size() > 0) worst_moment = std::max(worst_moment, m.cwiseAbs().maxCoeff());
    ++checked;
  }
  SuiteResult ortho = detail::upper_limited("orthogonality", worst_moment, 1e-9);
  if (checked == 0) ortho.passed = false;
  ortho.details = {{"fits_checked", checked}, {"fits_unconverged", skipped}, {"grad_tol", opts.grad_tol}};

  const Vector losses = trace.losses_in_order();
  double worst_increase = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 1; i < losses.size(); ++i) {
    worst_increase = std::max(worst_increase, losses[i] - losses[i - 1]);
  }
  SuiteResult mono = detail::upper_limited("monotone_path_losses", worst_increase, 1e-9);
  mono.details = {{"depth", v.depth}, {"first_loss", losses[0]}, {"last_loss", losses[losses.size() - 1]}};
  return {ortho, mono};
}

/// |L(q) - L(p*) - D(p* || q)| for random perturbations q of the global fit.
inline SuiteResult verify_decomposition_suite(const ExperimentConfig& cfg) {
  const auto& v = cfg.verify;
  const FitOptions opts = detail::suite_solver(cfg, 1e-12);
  const Dataset ds = generate_hard_instance({v.k, v.n, v.seed});
  const FitResult star = fit_global(ds, opts);
  const Vector star_logits = predict_logits(star, ds.features);
  const CounterStream stream(v.seed, stream_tag::kPerturbation);
  const auto d = static_cast<Eigen::Index>(ds.d());

  double worst = 0.0;
  for (std::size_t t = 0; t < v.perturbations; ++t) {
    Vector theta = star.weights;
    for (Eigen::Index j = 0; j < d; ++j) {
      theta[j] += v.perturbation_scale * stream.normal(t * static_cast<std::uint64_t>(d) + static_cast<std::uint64_t>(j));
    }
    Vector q = predict_logits(theta, ds.features);
    if (star.intercept != 0.0) q.array() += star.intercept;
    worst = std::max(worst, verify_decomposition(ds, star_logits, q));
  }
  SuiteResult r = detail::upper_limited("decomposition", worst, 1e-8);
  r.details = {{"perturbations", v.perturbations},
               {"global_converged", star.converged},
               {"global_grad_norm", star.grad_norm},
               {"grad_tol", opts.grad_tol}};
  if (!star.converged) r.passed = false;
  return r;
}

/// Pointwise KL(p || q) - 2 (p - q)^2 over random probability pairs.
inline SuiteResult verify_pinsker_suite(const ExperimentConfig& cfg) {
  const auto& v = cfg.verify;
  const CounterStream stream(v.seed, stream_tag::kPairs);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.pinsker_pairs; ++i) {
    const double p = stream.uniform(2 * i);
    const double q = stream.uniform(2 * i + 1);
    worst = std::min(worst, bernoulli_kl(p, q) - 2.0 * (p - q) * (p - q));
  }
  SuiteResult r;
  r.name = "pinsker";
  r.worst = worst;
  r.threshold = -1e-12;
  r.margin = worst - r.threshold;
  r.passed = v.pinsker_pairs > 0 && worst >= r.threshold;
  r.details = {{"pairs", v.pinsker_pairs}};
  return r;
}

/// Numeric minimization of the pass-residual variance against the closed form.
inline SuiteResult verify_coefficient_suite(const ExperimentConfig& cfg) {
  const auto& v = cfg.verify;
  double worst = 0.0;
  nlohmann::json cases = nlohmann::json::array();
  for (std::size_t p : v.coefficient_passes) {
    for (double c : v.coefficient_scales) {
      const PassPredictor numeric = minimize_pass_variance_numeric(p, c);
      const PassPredictor closed = optimal_pass_coefficients(p, c);
      const double err_s = std::abs(numeric.alpha_sum - closed.alpha_sum);
      const double err_v = std::abs(numeric.residual_variance - closed.residual_variance);
      const double err_vp = std::abs(numeric.noise_variance_scaled - 1.0);
      worst = std::max({worst, err_s, err_v, err_vp});
      cases.push_back({{"p", p}, {"c", c}, {"S", numeric.alpha_sum}, {"var_eta", numeric.residual_variance},
                       {"V_p", numeric.noise_variance_scaled}});
    }
  }
  SuiteResult r = detail::upper_limited("coefficient_closed_form", worst, 1e-9);
  r.details = {{"cases", cases}};
  return r;
}

/// c*(p) in (0,1), strictly increasing over the grid, |g'(c*)| small.
inline SuiteResult verify_scaling_suite(const ExperimentConfig& cfg) {
  std::vector<std::size_t> passes = cfg.verify.scaling_passes;
  std::sort(passes.begin(), passes.end());
  double worst_grad = 0.0;
  bool in_range = true;
  bool increasing = true;
  double prev = -1.0;
  nlohmann::json values = nlohmann::json::array();
  for (std::size_t p : passes) {
    const ScalingFactor s = optimal_scaling_factor(p);
    worst_grad = std::max(worst_grad, std::abs(s.gradient));
    in_range = in_range && s.c > 0.0 && s.c < 1.0;
    increasing = increasing && s.c > prev;
    prev = s.c;
    values.push_back({{"p", p}, {"c_star", s.c}, {"gradient", s.gradient}});
  }
  SuiteResult r = detail::upper_limited("scaling_factor_range", worst_grad, 1e-10);
  r.passed = r.passed && in_range && increasing;
  r.details = {{"values", values}, {"in_unit_interval", in_range}, {"increasing", increasing}};
  return r;
}

/// Strict loss increase with noise variance, margin in standard errors.
inline SuiteResult verify_noise_suite(const ExperimentConfig& cfg) {
  const auto& v = cfg.verify;
  const std::vector<std::pair<double, double>> pairs{{0.0, 0.5}, {0.5, 1.0}, {1.0, 2.0}};
  double worst = std::numeric_limits<double>::infinity();
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& [vs, vl] : pairs) {
    const NoiseMonotonicity m = noise_monotonicity_check(v.noise_scale, vs, vl, v.mc_samples, v.seed);
    worst = std::min(worst, m.margin_in_se());
    cases.push_back({{"v", vs}, {"u", vl}, {"loss_v", m.loss_small}, {"loss_u", m.loss_large},
                     {"difference", m.mean_difference}, {"standard_error", m.standard_error},
                     {"margin_se", m.margin_in_se()}});
  }
  SuiteResult r;
  r.name = "noise_monotonicity";
  r.worst = worst;
  r.threshold = 3.0;
  r.margin = worst - 3.0;
  r.passed = worst > 3.0;
  r.details = {{"c", v.noise_scale}, {"samples", v.mc_samples}, {"cases", cases}};
  return r;
}

/// All suites in a fixed order.
inline VerifyReport run_verify(const ExperimentConfig& cfg) {
  VerifyReport report;
  auto timed = [&](const std::function<SuiteResult()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    SuiteResult r = fn();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.suites.push_back(std::move(r));
  };
  const auto t0 = std::chrono::steady_clock::now();
  auto [ortho, mono] = verify_protocol_suites(cfg);
  const double protocol_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ortho.seconds = mono.seconds = protocol_seconds;
  report.suites.push_back(ortho);
  timed([&] { return verify_decomposition_suite(cfg); });
  timed([&] { return verify_pinsker_suite(cfg); });
  report.suites.push_back(mono);
  timed([&] { return verify_coefficient_suite(cfg); });
  timed([&] { return verify_scaling_suite(cfg); });
  timed([&] { return verify_noise_suite(cfg); });
  return report;
}

inline VerifyReport cmd_verify(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  VerifyReport report = run_verify(cfg);
  nlohmann::json j = report.to_json();
  j["config_hash"] = cfg.hash();
  write_file_atomic(out_dir / "verify_report.json", j.dump(2) + "\n");
  return report;
}

}  // namespace nia
