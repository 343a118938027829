// Acceptance suite: one PASS/FAIL line per criterion.
//
//   nia_acceptance                 run every criterion
//   nia_acceptance --criterion N   run criterion N only
//
// Exit status is nonzero iff a selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "nia.hpp"

using namespace nia;

namespace {

// Pinned tolerances.
constexpr double kOrthogonalityTol = 1e-9;
constexpr double kDecompositionTol = 1e-8;
constexpr double kPinskerFloor = -1e-12;
constexpr double kMonotoneTol = 1e-9;
constexpr double kClosedFormTol = 1e-9;
constexpr double kQuadratureResidualTol = 1e-10;
constexpr double kNoiseMarginSe = 3.0;
constexpr double kShapeRelTol = 0.25;
constexpr double kLowerFraction = 0.5;
constexpr double kSlopeTol = 0.05;
constexpr double kOutsideWeightTol = 0.02;
constexpr double kGradRelTol = 1e-6;
constexpr double kFdStep = 1e-5;

constexpr std::size_t kScanN = 200000;
constexpr std::size_t kScanSeeds = 10;

struct Outcome {
  bool passed = true;
  std::vector<std::string> lines;
  void check(bool ok, const std::string& text) {
    passed = passed && ok;
    lines.push_back(std::string(ok ? "  ok   " : "  FAIL ") + text);
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

std::vector<std::uint64_t> seeds() {
  std::vector<std::uint64_t> s;
  for (std::uint64_t i = 1; i <= kScanSeeds; ++i) s.push_back(i);
  return s;
}

ExperimentConfig scan_config(const std::vector<std::size_t>& depths) {
  ExperimentConfig cfg = parse_config(nlohmann::json::object());
  cfg.instance.k = 4;
  cfg.instance.n = kScanN;
  cfg.instance.seeds = seeds();
  cfg.scan.depths = depths;
  cfg.scan.windows = {4};
  return cfg;
}

std::map<std::size_t, ScanSummary> summary_by_depth(const std::vector<ScanRow>& rows) {
  std::map<std::size_t, ScanSummary> out;
  for (const auto& s : summarize_scan(rows)) out[s.depth] = s;
  return out;
}

// 1. Orthogonality, decomposition, Pinsker and monotone-loss suites.
Outcome criterion1() {
  Outcome o;
  const ExperimentConfig cfg = parse_config(nlohmann::json::object());
  const auto [ortho, mono] = verify_protocol_suites(cfg);
  const SuiteResult dec = verify_decomposition_suite(cfg);
  const SuiteResult pin = verify_pinsker_suite(cfg);
  o.check(ortho.passed && ortho.worst <= kOrthogonalityTol,
          fmt("orthogonality: max |residual moment| = %.3e over %d fits (tol %.0e)", ortho.worst,
              ortho.details.at("fits_checked").get<int>(), kOrthogonalityTol));
  o.check(dec.passed && dec.worst <= kDecompositionTol,
          fmt("decomposition: max identity residual = %.3e over 20 perturbations (tol %.0e)", dec.worst,
              kDecompositionTol));
  o.check(pin.passed && pin.worst >= kPinskerFloor,
          fmt("pinsker: min pointwise gap = %.3e over 1e4 pairs (floor %.0e)", pin.worst, kPinskerFloor));
  o.check(mono.passed && mono.worst <= kMonotoneTol,
          fmt("monotone path: max consecutive increase = %.3e (tol %.0e)", mono.worst, kMonotoneTol));
  return o;
}

// 2. Closed forms of the lower-bound construction.
Outcome criterion2() {
  Outcome o;
  const ExperimentConfig cfg = parse_config(nlohmann::json::object());
  const SuiteResult coef = verify_coefficient_suite(cfg);
  o.check(coef.worst <= kClosedFormTol,
          fmt("V_p = 1: max |numeric - closed form| = %.3e for p=2..6, c in {0.3,0.7,1} (tol %.0e)", coef.worst,
              kClosedFormTol));
  const SuiteResult sc = verify_scaling_suite(cfg);
  std::string values;
  for (const auto& v : sc.details.at("values")) values += fmt(" %.4f", v.at("c_star").get<double>());
  o.check(sc.details.at("in_unit_interval").get<bool>() && sc.details.at("increasing").get<bool>(),
          "c*(p) in (0,1) and increasing for p=1,2,4,8,16,64:" + values);
  o.check(sc.worst <= kQuadratureResidualTol,
          fmt("max |g'(c*)| = %.3e (tol %.0e)", sc.worst, kQuadratureResidualTol));
  const SuiteResult noise = verify_noise_suite(cfg);
  for (const auto& c : noise.details.at("cases")) {
    const double m = c.at("margin_se").get<double>();
    o.check(m > kNoiseMarginSe, fmt("noise (%.1f -> %.1f): L increases by %.4e, %.1f SE (need > %.0f)",
                                    c.at("v").get<double>(), c.at("u").get<double>(),
                                    c.at("difference").get<double>(), m, kNoiseMarginSe));
  }
  return o;
}

// 3. Upper bound M / sqrt(D) on cyclic paths.
Outcome criterion3(std::size_t threads) {
  Outcome o;
  const auto rows = run_scan(scan_config({8, 16, 32, 64, 128}), threads);
  const auto by_depth = summary_by_depth(rows);
  double prev = std::numeric_limits<double>::infinity();
  bool decreasing = true;
  std::string trail;
  for (const auto& [depth, s] : by_depth) {
    o.check(s.mean_excess <= s.mean_upper_bound,
            fmt("D=%3zu: mean excess %.4e (se %.1e) <= bound %.4f", depth, s.mean_excess, s.se_excess,
                s.mean_upper_bound));
    decreasing = decreasing && s.mean_excess < prev;
    prev = s.mean_excess;
    trail += fmt(" %.3e", s.mean_excess);
  }
  o.check(decreasing, "mean excess strictly decreasing in D:" + trail);
  return o;
}

// 4. Lower-bound shape C / (p + 1) with C fitted at p = 1.
Outcome criterion4(std::size_t threads) {
  Outcome o;
  std::vector<std::size_t> depths;
  for (std::size_t p = 1; p <= 8; ++p) depths.push_back(4 * p);
  const auto by_depth = summary_by_depth(run_scan(scan_config(depths), threads));
  const double c_hat = by_depth.at(4).mean_excess * 2.0;
  o.lines.push_back(fmt("  fitted C = %.5f from p = 1", c_hat));
  for (std::size_t p = 1; p <= 8; ++p) {
    const ScanSummary& s = by_depth.at(4 * p);
    const double shape = c_hat / static_cast<double>(p + 1);
    const double rel = std::abs(s.mean_excess - shape) / shape;
    o.check(rel <= kShapeRelTol, fmt("p=%zu: mean excess %.4e vs C/(p+1) = %.4e, rel err %.1f%% (tol %.0f%%)", p,
                                     s.mean_excess, shape, 100 * rel, 100 * kShapeRelTol));
    o.check(s.mean_excess >= kLowerFraction * shape,
            fmt("p=%zu: mean excess %.4e >= %.1f * C/(p+1) = %.4e", p, s.mean_excess, kLowerFraction,
                kLowerFraction * shape));
  }
  return o;
}

// 5. Regression structure of end-of-pass logits.
Outcome criterion5(std::size_t threads) {
  Outcome o;
  constexpr std::size_t k = 4;
  const auto ss = seeds();
  std::vector<std::vector<PassDiagnostics>> diag(ss.size());
  parallel_for(ss.size(), threads, [&](std::size_t i) {
    const Dataset ds = generate_hard_instance({k, kScanN, ss[i]});
    const ProtocolTrace t = run_protocol(ds, cyclic_path_assignment(k, 3 * k));
    for (std::size_t p = 1; p <= 3; ++p) diag[i].push_back(diagnose_pass_logits(ds, t.logits(p * k), p));
  });
  for (std::size_t p = 1; p <= 3; ++p) {
    double slope = 0.0;
    Vector abs_w = Vector::Zero(k);
    double worst_seed_slope = 0.0;
    for (std::size_t i = 0; i < ss.size(); ++i) {
      const PassDiagnostics& d = diag[i][p - 1];
      slope += d.slope_on_target;
      abs_w += d.feature_coefficients.cwiseAbs();
      worst_seed_slope = std::max(worst_seed_slope, std::abs(d.slope_on_target - optimal_scaling_factor(p).c));
    }
    slope /= static_cast<double>(ss.size());
    abs_w /= static_cast<double>(ss.size());
    const double c_star = optimal_scaling_factor(p).c;
    const FeatureSet rel = relevance_set(k, p);
    double outside = 0.0;
    for (std::size_t l = 1; l <= k; ++l) {
      if (!rel.contains(l)) outside = std::max(outside, abs_w[static_cast<Eigen::Index>(l - 1)]);
    }
    o.check(slope > 0.0 && slope < 1.0 && std::abs(slope - c_star) <= kSlopeTol,
            fmt("p=%zu: mean slope on Z_k %.4f vs c* %.4f, |diff| %.4f (tol %.2f; worst seed %.4f)", p, slope, c_star,
                std::abs(slope - c_star), kSlopeTol, worst_seed_slope));
    if (rel.size() < k) {
      o.check(outside <= kOutsideWeightTol,
              fmt("p=%zu: max mean |weight| outside I_p = %.4f (tol %.2f)", p, outside, kOutsideWeightTol));
    }
  }
  return o;
}

// 6. Analytic BCE gradient against central differences.
Outcome criterion6() {
  Outcome o;
  const CounterStream s(2024, 99);
  std::uint64_t c = 0;
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const auto n = static_cast<Eigen::Index>(5 + s.bits(c++) % 46);
    const auto m = static_cast<Eigen::Index>(1 + s.bits(c++) % 5);
    Matrix x(n, m);
    Vector y(n), theta(m);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) x(i, j) = s.normal(c++);
      y[i] = s.uniform(c++) < 0.5 ? 1.0 : 0.0;
    }
    for (Eigen::Index j = 0; j < m; ++j) theta[j] = s.normal(c++);
    Vector g;
    bce_objective(x, y, theta, 0.0, &g);
    Vector fd(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      Vector a = theta, b = theta;
      a[j] += kFdStep;
      b[j] -= kFdStep;
      fd[j] = (bce_objective(x, y, a) - bce_objective(x, y, b)) / (2 * kFdStep);
    }
    worst = std::max(worst, (g - fd).norm() / std::max(g.norm(), 1e-12));
  }
  o.check(worst <= kGradRelTol,
          fmt("max relative error |g - fd| / |g| = %.3e over 100 instances (tol %.0e)", worst, kGradRelTol));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
  }
  const std::size_t threads = resolve_threads(std::nullopt);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"orthogonality, decomposition, pinsker, monotone losses", [] { return criterion1(); }},
      {"lower-bound closed forms", [] { return criterion2(); }},
      {"upper-bound scaling M/sqrt(D)", [&] { return criterion3(threads); }},
      {"lower-bound scaling C/(p+1)", [&] { return criterion4(threads); }},
      {"end-of-pass logit structure", [&] { return criterion5(threads); }},
      {"solver gradient check", [] { return criterion6(); }},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<std::size_t>(only) != i + 1) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("CRITERION %zu %s: %s (%.1f s)\n", i + 1, out.passed ? "PASS" : "FAIL", criteria[i].first.c_str(),
                secs);
    for (const auto& l : out.lines) std::printf("%s\n", l.c_str());
    all = all && out.passed;
  }
  return all ? 0 : 1;
}
