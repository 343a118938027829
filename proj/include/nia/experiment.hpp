#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "nia/agent_graph.hpp"
#include "nia/info_metrics.hpp"
#include "nia/instance_lab.hpp"
#include "nia/io.hpp"
#include "nia/parallel.hpp"
#include "nia/protocol.hpp"

namespace nia {

using json = nlohmann::json;

struct InstanceConfig {
  std::string kind = "hard";  // hard | custom-graph-file
  std::size_t k = 4;
  std::size_t n = 1000;
  std::vector<std::uint64_t> seeds{0};
  std::optional<std::string> dataset_file;  // NIA1 dataset used instead of generating
};

struct GraphConfig {
  std::optional<std::size_t> cyclic_path_depth;
  std::optional<std::string> file;
  std::optional<std::size_t> coverage_window;
};

struct ScanConfig {
  std::vector<std::size_t> depths;
  std::vector<std::size_t> windows;
  std::vector<std::size_t> passes;
};

/// Parameters of the lemma verification suites.
struct VerifyConfig {
  std::size_t k = 4;
  std::size_t n = 100000;
  std::size_t depth = 16;
  std::uint64_t seed = 1;
  std::size_t perturbations = 20;
  double perturbation_scale = 0.1;
  std::size_t pinsker_pairs = 10000;
  std::size_t mc_samples = 1000000;
  double noise_scale = 0.8;
  std::vector<std::size_t> scaling_passes{1, 2, 4, 8, 16, 64};
  std::vector<std::size_t> coefficient_passes{2, 3, 4, 5, 6};
  std::vector<double> coefficient_scales{0.3, 0.7, 1.0};
};

struct ExperimentConfig {
  InstanceConfig instance;
  GraphConfig graph;
  FitOptions solver;
  bool solver_given = false;  // a "solver" block overrides the verify defaults
  ScanConfig scan;
  std::string output_dir = "nia_out";
  std::size_t parallel_replicates = 1;
  bool dump_logits = false;
  VerifyConfig verify;
  json source = json::object();

  /// FNV-1a of the canonical JSON form of the effective configuration.
  [[nodiscard]] std::string hash() const { return fnv1a_hex(to_json().dump()); }

  [[nodiscard]] json to_json() const {
    json inst = {{"kind", instance.kind}, {"k", instance.k}, {"n", instance.n}, {"seeds", instance.seeds}};
    if (instance.dataset_file) inst["dataset_file"] = *instance.dataset_file;
    json graph_j = json::object();
    if (graph.cyclic_path_depth) graph_j["cyclic_path_depth"] = *graph.cyclic_path_depth;
    if (graph.file) graph_j["file"] = *graph.file;
    if (graph.coverage_window) graph_j["coverage_window"] = *graph.coverage_window;
    return {{"instance", inst},
            {"graph", graph_j},
            {"solver",
             {{"grad_tol", solver.grad_tol},
              {"max_iters", solver.max_iters},
              {"ridge", solver.ridge},
              {"intercept", solver.intercept},
              {"backtrack", solver.backtrack},
              {"initial_step", solver.initial_step}}},
            {"scan", {{"depths", scan.depths}, {"windows", scan.windows}, {"passes", scan.passes}}},
            {"parallel_replicates", parallel_replicates},
            {"dump_logits", dump_logits}};
  }
};

namespace detail {

inline void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw InvalidConfig(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw InvalidConfig("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read_opt(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).get<T>();
}

template <class T>
void read_grid(const json& obj, const char* key, std::vector<T>& target, const std::string& where) {
  if (!obj.contains(key)) return;
  target = obj.at(key).get<std::vector<T>>();
  if (target.empty()) throw InvalidConfig(where + "." + key + " must be non-empty");
}

}  // namespace detail

/// Parses a configuration; unknown keys anywhere are rejected.
inline ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir = {}) {
  using detail::check_keys;
  using detail::read_opt;
  ExperimentConfig cfg;
  cfg.source = j;
  try {
    check_keys(j, {"instance", "graph", "solver", "scan", "output_dir", "parallel_replicates", "dump_logits", "verify"},
               "config");
    if (j.contains("instance")) {
      const auto& o = j.at("instance");
      check_keys(o, {"kind", "k", "n", "seeds", "dataset_file"}, "instance");
      read_opt(o, "kind", cfg.instance.kind);
      read_opt(o, "k", cfg.instance.k);
      read_opt(o, "n", cfg.instance.n);
      detail::read_grid(o, "seeds", cfg.instance.seeds, "instance");
      if (o.contains("dataset_file")) cfg.instance.dataset_file = o.at("dataset_file").get<std::string>();
    }
    if (j.contains("graph")) {
      const auto& o = j.at("graph");
      check_keys(o, {"cyclic_path_depth", "file", "coverage_window"}, "graph");
      if (o.contains("cyclic_path_depth")) cfg.graph.cyclic_path_depth = o.at("cyclic_path_depth").get<std::size_t>();
      if (o.contains("file")) cfg.graph.file = o.at("file").get<std::string>();
      if (o.contains("coverage_window")) cfg.graph.coverage_window = o.at("coverage_window").get<std::size_t>();
    }
    if (j.contains("solver")) {
      const auto& o = j.at("solver");
      check_keys(o, {"grad_tol", "max_iters", "ridge", "intercept", "backtrack", "initial_step"}, "solver");
      read_opt(o, "grad_tol", cfg.solver.grad_tol);
      read_opt(o, "max_iters", cfg.solver.max_iters);
      read_opt(o, "ridge", cfg.solver.ridge);
      read_opt(o, "intercept", cfg.solver.intercept);
      read_opt(o, "backtrack", cfg.solver.backtrack);
      read_opt(o, "initial_step", cfg.solver.initial_step);
      cfg.solver_given = true;
    }
    if (j.contains("scan")) {
      const auto& o = j.at("scan");
      check_keys(o, {"depths", "windows", "passes"}, "scan");
      detail::read_grid(o, "depths", cfg.scan.depths, "scan");
      detail::read_grid(o, "windows", cfg.scan.windows, "scan");
      detail::read_grid(o, "passes", cfg.scan.passes, "scan");
    }
    read_opt(j, "output_dir", cfg.output_dir);
    read_opt(j, "parallel_replicates", cfg.parallel_replicates);
    read_opt(j, "dump_logits", cfg.dump_logits);
    if (j.contains("verify")) {
      const auto& o = j.at("verify");
      check_keys(o,
                 {"k", "n", "depth", "seed", "perturbations", "perturbation_scale", "pinsker_pairs", "mc_samples",
                  "noise_scale", "scaling_passes", "coefficient_passes", "coefficient_scales"},
                 "verify");
      auto& v = cfg.verify;
      read_opt(o, "k", v.k);
      read_opt(o, "n", v.n);
      read_opt(o, "depth", v.depth);
      read_opt(o, "seed", v.seed);
      read_opt(o, "perturbations", v.perturbations);
      read_opt(o, "perturbation_scale", v.perturbation_scale);
      read_opt(o, "pinsker_pairs", v.pinsker_pairs);
      read_opt(o, "mc_samples", v.mc_samples);
      read_opt(o, "noise_scale", v.noise_scale);
      detail::read_grid(o, "scaling_passes", v.scaling_passes, "verify");
      detail::read_grid(o, "coefficient_passes", v.coefficient_passes, "verify");
      detail::read_grid(o, "coefficient_scales", v.coefficient_scales, "verify");
    }
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("malformed config: ") + e.what());
  }

  auto resolve = [&](std::string& p) {
    if (!base_dir.empty() && std::filesystem::path(p).is_relative()) p = (base_dir / p).string();
  };
  if (cfg.instance.dataset_file) resolve(*cfg.instance.dataset_file);
  if (cfg.graph.file) resolve(*cfg.graph.file);

  if (cfg.instance.kind != "hard" && cfg.instance.kind != "custom-graph-file") {
    throw InvalidConfig("instance.kind must be 'hard' or 'custom-graph-file'");
  }
  if (cfg.instance.k < 2) throw InvalidConfig("instance.k must be >= 2 (got " + std::to_string(cfg.instance.k) + ")");
  if (cfg.instance.n < 1) throw InvalidConfig("instance.n must be >= 1");
  if (std::set<std::uint64_t>(cfg.instance.seeds.begin(), cfg.instance.seeds.end()).size() != cfg.instance.seeds.size()) {
    throw InvalidConfig("instance.seeds must be distinct");
  }
  if (cfg.instance.kind == "custom-graph-file" && !cfg.graph.file) {
    throw InvalidConfig("instance.kind 'custom-graph-file' requires graph.file");
  }
  if (cfg.graph.file && cfg.graph.cyclic_path_depth) {
    throw InvalidConfig("graph.file and graph.cyclic_path_depth are mutually exclusive");
  }
  if (cfg.graph.cyclic_path_depth && *cfg.graph.cyclic_path_depth < 1) {
    throw InvalidConfig("graph.cyclic_path_depth must be >= 1");
  }
  for (const auto* f : {&cfg.instance.dataset_file, &cfg.graph.file}) {
    if (*f && !std::filesystem::exists(**f)) throw InvalidConfig("referenced file does not exist: " + **f);
  }
  if (cfg.parallel_replicates < 1) throw InvalidConfig("parallel_replicates must be >= 1");
  try {
    cfg.solver.validate();
  } catch (const DomainError& e) {
    throw InvalidConfig(e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InvalidConfig("cannot parse " + path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

/// Dataset for one replicate: the configured file, or a fresh hard instance.
inline Dataset resolve_dataset(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.instance.dataset_file) return decode_dataset(read_file(*cfg.instance.dataset_file));
  return generate_hard_instance({cfg.instance.k, cfg.instance.n, seed});
}

inline AgentGraph resolve_graph(const ExperimentConfig& cfg, const Dataset& ds) {
  if (cfg.graph.file) return load_graph(*cfg.graph.file);
  return cyclic_path_assignment(ds.d(), cfg.graph.cyclic_path_depth.value_or(ds.d()));
}

// ---------------------------------------------------------------------------
// generate

struct GeneratedFile {
  std::filesystem::path data;
  std::filesystem::path sidecar;
  std::string checksum;
};

inline std::vector<GeneratedFile> cmd_generate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                               std::size_t threads = 1) {
  if (cfg.instance.kind != "hard") throw InvalidConfig("generate only produces hard instances");
  std::vector<GeneratedFile> files(cfg.instance.seeds.size());
  parallel_for(files.size(), threads, [&](std::size_t i) {
    const std::uint64_t seed = cfg.instance.seeds[i];
    const Dataset ds = generate_hard_instance({cfg.instance.k, cfg.instance.n, seed});
    const std::string bytes = encode_dataset(ds);
    const std::string stem = "dataset_k" + std::to_string(cfg.instance.k) + "_n" + std::to_string(cfg.instance.n) +
                             "_seed" + std::to_string(seed);
    GeneratedFile f{out_dir / (stem + ".nia"), out_dir / (stem + ".json"), fnv1a_hex(bytes)};
    const json sidecar = {{"format", "NIA1"},
                          {"kind", "hard"},
                          {"k", cfg.instance.k},
                          {"n", cfg.instance.n},
                          {"seed", seed},
                          {"bytes", bytes.size()},
                          {"checksum_fnv1a64", f.checksum},
                          {"label_mean", ds.labels.mean()},
                          {"config_hash", cfg.hash()}};
    write_file_atomic(f.data, bytes);
    write_file_atomic(f.sidecar, sidecar.dump(2) + "\n");
    files[i] = std::move(f);
  });
  return files;
}

// ---------------------------------------------------------------------------
// run

struct RunReport {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t agents = 0;
  double global_loss = 0.0;
  bool global_converged = false;
  bool all_converged = false;
  AgentId final_agent = 0;
  double sink_loss = 0.0;
  double excess = 0.0;
  std::map<AgentId, double> sink_excess;  // every sink of the DAG
  double max_edge_loss_increase = 0.0;
  bool is_path = false;
  std::optional<std::size_t> window;
  bool covered = false;
  std::optional<std::size_t> first_violation;
  std::optional<StableBlock> block;
  std::optional<TheoryReport> theory;
  std::optional<double> residual_alignment_measured;
  std::optional<bool> bound_satisfied;

  [[nodiscard]] json to_json() const {
    json j = {{"seed", seed},
              {"n", n},
              {"d", d},
              {"agents", agents},
              {"global_loss", global_loss},
              {"global_converged", global_converged},
              {"all_agents_converged", all_converged},
              {"final_agent", final_agent},
              {"sink_loss", sink_loss},
              {"excess", excess},
              {"max_edge_loss_increase", max_edge_loss_increase},
              {"is_path", is_path},
              {"coverage", covered}};
    json sinks = json::array();
    for (const auto& [id, ex] : sink_excess) sinks.push_back({{"agent", id}, {"excess", ex}});
    j["sinks"] = sinks;
    if (window) j["coverage_window"] = *window;
    if (first_violation) j["first_violating_window"] = *first_violation;
    if (block) {
      j["stable_block"] = {{"block", block->block},     {"first", block->first}, {"last", block->last},
                           {"drop", block->drop},       {"num_blocks", block->num_blocks}};
    }
    if (theory) {
      j["theory"] = {{"B_X", theory->b_x},
                     {"B_g", theory->b_g},
                     {"M", theory->window},
                     {"D", theory->depth},
                     {"epsilon", theory->epsilon},
                     {"rhs_residual_bound", theory->rhs_residual_bound},
                     {"rhs_convergence_bound", theory->rhs_convergence_bound}};
    }
    if (residual_alignment_measured) j["residual_alignment_measured"] = *residual_alignment_measured;
    if (bound_satisfied) j["upper_bound_satisfied"] = *bound_satisfied;
    return j;
  }
};

/// Single replicate: protocol, global fit, coverage, stable block and bounds.
inline RunReport run_replicate(const Dataset& ds, const AgentGraph& graph, const FitOptions& opts,
                               std::optional<std::size_t> window, ProtocolTrace* trace_out = nullptr) {
  ProtocolTrace trace = run_protocol(ds, graph, opts);
  const FitResult global = fit_global(ds, opts);
  const Vector global_logits = predict_logits(global, ds.features);

  RunReport r;
  r.n = ds.n();
  r.d = ds.d();
  r.agents = graph.num_agents();
  r.global_loss = global.loss;
  r.global_converged = global.converged;
  r.all_converged = trace.all_converged();
  r.final_agent = trace.last_agent();
  r.sink_loss = trace.loss(r.final_agent);
  r.excess = sink_excess_loss(trace, global).value;
  for (AgentId s : graph.sinks()) r.sink_excess[s] = sink_excess_loss(trace, global, s).value;
  r.max_edge_loss_increase = max_edge_loss_increase(trace, graph);
  r.is_path = graph.is_path();

  if (r.is_path) {
    r.window = window ? window : minimal_coverage_window(graph, ds.d());
    if (r.window && *r.window <= graph.num_agents()) {
      const CoverageResult cov = check_m_coverage(graph, *r.window, ds.d());
      r.covered = cov.covered;
      r.first_violation = cov.first_violation;
      const Vector losses = trace.losses_in_order();
      r.block = stable_block(losses, *r.window);
      if (r.covered) {
        const double b_x = feature_scale_bound(ds.features);
        const double b_g = global.weights.lpNorm<1>();
        r.theory = TheoryReport::make(b_g, b_x, *r.window, graph.num_agents(), r.block->drop);
        const AgentId block_end = trace.order[r.block->last - 1];
        r.residual_alignment_measured = residual_alignment(trace.logits(block_end), ds.labels, global_logits);
        r.bound_satisfied = r.excess <= r.theory->rhs_convergence_bound;
      }
    }
  }
  if (trace_out) *trace_out = std::move(trace);
  return r;
}

/// Runs every seed and writes trace_seed<s>.csv, report_seed<s>.json and,
/// when requested, logits_seed<s>.bin. Bound violations are reported in
/// the JSON, never raised.
inline std::vector<RunReport> cmd_run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                      std::size_t threads = 1) {
  std::vector<RunReport> reports(cfg.instance.seeds.size());
  const std::string hash = cfg.hash();
  parallel_for(reports.size(), threads, [&](std::size_t i) {
    const std::uint64_t seed = cfg.instance.seeds[i];
    const Dataset ds = resolve_dataset(cfg, seed);
    const AgentGraph graph = resolve_graph(cfg, ds);
    ProtocolTrace trace;
    RunReport r = run_replicate(ds, graph, cfg.solver, cfg.graph.coverage_window, &trace);
    r.seed = seed;
    const std::string tag = "_seed" + std::to_string(seed);
    write_file_atomic(out_dir / ("trace" + tag + ".csv"), trace_to_csv(trace));
    json report = r.to_json();
    report["config_hash"] = hash;
    write_file_atomic(out_dir / ("report" + tag + ".json"), report.dump(2) + "\n");
    if (cfg.dump_logits) write_file_atomic(out_dir / ("logits" + tag + ".bin"), encode_logits(trace));
    reports[i] = std::move(r);
  });
  return reports;
}

// ---------------------------------------------------------------------------
// scan

struct ScanRow {
  std::string config_hash;
  std::size_t k = 0;
  std::size_t depth = 0;
  std::size_t window = 0;
  std::size_t passes = 0;  // completed passes floor(D / k)
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double sink_loss = 0.0;
  double global_loss = 0.0;
  double excess = 0.0;
  double upper_bound = std::numeric_limits<double>::quiet_NaN();
  double lower_shape = std::numeric_limits<double>::quiet_NaN();
  std::string errors;
};

struct ScanSummary {
  std::size_t depth = 0;
  std::size_t window = 0;
  std::size_t passes = 0;
  std::size_t replicates = 0;
  double mean_excess = 0.0;
  double se_excess = 0.0;
  double mean_upper_bound = 0.0;
  double lower_shape = std::numeric_limits<double>::quiet_NaN();
};

/// Depth grid: scan.depths plus k * p for every p in scan.passes.
inline std::vector<std::size_t> scan_depths(const ExperimentConfig& cfg) {
  std::set<std::size_t> out(cfg.scan.depths.begin(), cfg.scan.depths.end());
  for (std::size_t p : cfg.scan.passes) out.insert(cfg.instance.k * p);
  if (out.empty()) throw InvalidConfig("scan needs scan.depths or scan.passes");
  if (*out.begin() < 1) throw InvalidConfig("scan depths must be >= 1");
  return {out.begin(), out.end()};
}

/// For each seed: one dataset, one global fit, and one protocol run over the
/// cyclic path of the largest depth. Agent D of that path is computed
/// exactly as the sink of the depth-D path (the protocol only looks
/// backwards), so every grid depth is read off the same trace.
inline std::vector<ScanRow> run_scan(const ExperimentConfig& cfg, std::size_t threads = 1) {
  if (cfg.instance.kind != "hard" || cfg.graph.file) throw InvalidConfig("scan runs on cyclic hard-instance paths");
  const std::vector<std::size_t> depths = scan_depths(cfg);
  const std::vector<std::size_t> windows = cfg.scan.windows.empty() ? std::vector<std::size_t>{cfg.instance.k}
                                                                    : cfg.scan.windows;
  const std::size_t k = cfg.instance.k;
  const std::string hash = cfg.hash();
  std::vector<std::vector<ScanRow>> per_seed(cfg.instance.seeds.size());

  parallel_for(per_seed.size(), threads, [&](std::size_t i) {
    const std::uint64_t seed = cfg.instance.seeds[i];
    const Dataset ds = generate_hard_instance({k, cfg.instance.n, seed});
    const FitResult global = fit_global(ds, cfg.solver);
    const double b_x = feature_scale_bound(ds.features);
    const double b_p = global.weights.lpNorm<1>();
    const AgentGraph longest = cyclic_path_assignment(k, depths.back());
    const ProtocolTrace trace = run_protocol(ds, longest, cfg.solver);

    for (std::size_t depth : depths) {
      std::size_t unconverged = 0;
      for (AgentId id = 1; id <= depth; ++id) unconverged += trace.model(id).converged ? 0 : 1;
      const AgentGraph path = cyclic_path_assignment(k, depth);
      for (std::size_t window : windows) {
        ScanRow row;
        row.config_hash = hash;
        row.k = k;
        row.depth = depth;
        row.window = window;
        row.passes = depth / k;
        row.seed = seed;
        row.n = ds.n();
        row.sink_loss = trace.loss(depth);
        row.global_loss = global.loss;
        row.excess = row.sink_loss - row.global_loss;
        std::vector<std::string> errs;
        if (!global.converged) errs.push_back("global_unconverged");
        if (unconverged) errs.push_back("unconverged_agents=" + std::to_string(unconverged));
        if (window < 1 || window > depth) {
          errs.push_back("window_exceeds_depth");
        } else if (!check_m_coverage(path, window, k).covered) {
          errs.push_back("coverage=false");
        } else {
          row.upper_bound = convergence_bound_rhs(b_p, b_x, window, depth);
        }
        if (row.passes >= 1) row.lower_shape = predicted_excess_curve(k, {row.passes}).front();
        for (std::size_t e = 0; e < errs.size(); ++e) row.errors += (e ? ";" : "") + errs[e];
        per_seed[i].push_back(std::move(row));
      }
    }
  });

  std::vector<ScanRow> rows;
  for (auto& block : per_seed) {
    for (auto& r : block) rows.push_back(std::move(r));
  }
  return rows;
}

/// Seed averages per (D, M) with the standard error of the mean.
inline std::vector<ScanSummary> summarize_scan(const std::vector<ScanRow>& rows) {
  std::map<std::pair<std::size_t, std::size_t>, std::vector<const ScanRow*>> groups;
  for (const auto& r : rows) groups[{r.depth, r.window}].push_back(&r);
  std::vector<ScanSummary> out;
  for (const auto& [key, members] : groups) {
    ScanSummary s;
    s.depth = key.first;
    s.window = key.second;
    s.passes = members.front()->passes;
    s.lower_shape = members.front()->lower_shape;
    s.replicates = members.size();
    double sum = 0.0;
    double bound = 0.0;
    for (const auto* r : members) {
      sum += r->excess;
      bound += r->upper_bound;
    }
    s.mean_excess = sum / static_cast<double>(members.size());
    s.mean_upper_bound = bound / static_cast<double>(members.size());
    if (members.size() > 1) {
      double ss = 0.0;
      for (const auto* r : members) ss += (r->excess - s.mean_excess) * (r->excess - s.mean_excess);
      s.se_excess = std::sqrt(ss / static_cast<double>(members.size() - 1) / static_cast<double>(members.size()));
    }
    out.push_back(s);
  }
  return out;
}

inline std::string scan_rows_csv(const std::vector<ScanRow>& rows) {
  CsvWriter csv({"config_hash", "k", "D", "M", "p", "seed", "n", "sink_loss", "global_loss", "excess",
                 "upper_bound", "lower_shape", "errors"});
  for (const auto& r : rows) {
    csv.row({r.config_hash, std::to_string(r.k), std::to_string(r.depth), std::to_string(r.window),
             std::to_string(r.passes), std::to_string(r.seed), std::to_string(r.n), format_real(r.sink_loss),
             format_real(r.global_loss), format_real(r.excess), std::isnan(r.upper_bound) ? "" : format_real(r.upper_bound),
             std::isnan(r.lower_shape) ? "" : format_real(r.lower_shape), r.errors});
  }
  return csv.str();
}

inline std::string scan_summary_csv(const std::vector<ScanSummary>& summary) {
  CsvWriter csv({"D", "M", "p", "replicates", "mean_excess", "se_excess", "mean_upper_bound", "lower_shape"});
  for (const auto& s : summary) {
    csv.row({std::to_string(s.depth), std::to_string(s.window), std::to_string(s.passes),
             std::to_string(s.replicates), format_real(s.mean_excess), format_real(s.se_excess),
             std::isnan(s.mean_upper_bound) ? "" : format_real(s.mean_upper_bound),
             std::isnan(s.lower_shape) ? "" : format_real(s.lower_shape)});
  }
  return csv.str();
}

inline std::vector<ScanRow> cmd_scan(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                     std::size_t threads = 1) {
  std::vector<ScanRow> rows = run_scan(cfg, threads);
  write_file_atomic(out_dir / "scan.csv", scan_rows_csv(rows));
  write_file_atomic(out_dir / "scan_summary.csv", scan_summary_csv(summarize_scan(rows)));
  return rows;
}

}  // namespace nia
