#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nia/agent_graph.hpp"
#include "nia/dataset.hpp"
#include "nia/logistic.hpp"

namespace nia {

/// Local feature weights w and parent-logit weights v of one agent.
struct AgentModel {
  AgentId id = 0;
  Vector w;  // over S_i in ascending feature order
  Vector v;  // over parents in declared order
  double intercept = 0.0;
  double loss = 0.0;
  double grad_norm = 0.0;
  bool converged = false;
  FitStatus status = FitStatus::MaxIterations;

  [[nodiscard]] double l1_weight_norm() const {
    return w.lpNorm<1>() + v.lpNorm<1>() + std::abs(intercept);
  }
};

/// Result of one sequential pass over the DAG. Slots are indexed by
/// agent id - 1; `order` records the topological order that was used.
struct ProtocolTrace {
  std::vector<std::optional<AgentModel>> models;
  std::vector<std::optional<Vector>> logit_columns;
  std::vector<double> losses;
  std::vector<AgentId> order;

  explicit ProtocolTrace(std::size_t num_agents = 0)
      : models(num_agents), logit_columns(num_agents), losses(num_agents, 0.0) {}

  [[nodiscard]] bool has(AgentId id) const {
    return id >= 1 && id <= models.size() && models[id - 1].has_value();
  }
  [[nodiscard]] const AgentModel& model(AgentId id) const { return models.at(id - 1).value(); }
  [[nodiscard]] const Vector& logits(AgentId id) const { return logit_columns.at(id - 1).value(); }
  [[nodiscard]] double loss(AgentId id) const { return losses.at(id - 1); }

  [[nodiscard]] bool all_converged() const {
    for (const auto& m : models) {
      if (m && !m->converged) return false;
    }
    return true;
  }

  /// Losses in protocol (topological) order.
  [[nodiscard]] Vector losses_in_order() const {
    Vector out(static_cast<Eigen::Index>(order.size()));
    for (std::size_t i = 0; i < order.size(); ++i) out[static_cast<Eigen::Index>(i)] = loss(order[i]);
    return out;
  }

  /// Final agent in the topological order.
  [[nodiscard]] AgentId last_agent() const { return order.back(); }
};

/// Columns: x_l for l in S_i ascending, then z_j for each parent in
/// declared order.
inline Matrix agent_design(const Dataset& dataset, const AgentGraph& graph, AgentId id,
                           const ProtocolTrace& trace) {
  const auto& features = graph.features(id);
  const auto& parents = graph.parents(id);
  const auto n = static_cast<Eigen::Index>(dataset.n());
  Matrix design(n, static_cast<Eigen::Index>(features.size() + parents.size()));
  Eigen::Index col = 0;
  for (std::size_t l : features) design.col(col++) = dataset.column(l);
  for (AgentId parent : parents) {
    if (!trace.has(parent) || !trace.logit_columns[parent - 1]) {
      throw MissingParent("agent " + std::to_string(id) + " needs logits of parent " +
                          std::to_string(parent));
    }
    design.col(col++) = trace.logits(parent);
  }
  return design;
}

/// Runs every agent in topological order: fit on its design, publish the
/// logit column. Unconverged fits are recorded and used downstream.
inline ProtocolTrace run_protocol(const Dataset& dataset, const AgentGraph& graph,
                                  const FitOptions& opts = {}) {
  if (graph.num_features() > dataset.d()) {
    throw DimensionMismatch("graph uses " + std::to_string(graph.num_features()) +
                            " features but dataset has " + std::to_string(dataset.d()));
  }
  ProtocolTrace trace(graph.num_agents());
  trace.order = graph.topo_order();
  for (AgentId id : trace.order) {
    const Matrix design = agent_design(dataset, graph, id, trace);
    const FitResult fit = fit_logistic(design, dataset.labels, opts);
    const auto local = static_cast<Eigen::Index>(graph.features(id).size());

    AgentModel model;
    model.id = id;
    model.w = fit.weights.head(local);
    model.v = fit.weights.tail(fit.weights.size() - local);
    model.intercept = fit.intercept;
    model.loss = fit.loss;
    model.grad_norm = fit.grad_norm;
    model.converged = fit.converged;
    model.status = fit.status;

    trace.logit_columns[id - 1] = predict_logits(fit, design);
    trace.losses[id - 1] = fit.loss;
    trace.models[id - 1] = std::move(model);
  }
  return trace;
}

/// Largest loss increase across any edge (child loss minus parent loss).
/// Checking edges covers every directed path.
inline double max_edge_loss_increase(const ProtocolTrace& trace, const AgentGraph& graph) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& [parent, child] : graph.edges()) {
    worst = std::max(worst, trace.loss(child) - trace.loss(parent));
  }
  return graph.edges().empty() ? 0.0 : worst;
}

struct ExcessLoss {
  double value = 0.0;
  bool both_converged = true;  // false carries a NotConverged warning
};

/// L(p_D) - L(p*) for an agent (default: last in topological order) against
/// a global fit over all d features.
inline ExcessLoss sink_excess_loss(const ProtocolTrace& trace, const FitResult& global_fit,
                                   std::optional<AgentId> agent = std::nullopt) {
  const AgentId id = agent.value_or(trace.last_agent());
  return {trace.loss(id) - global_fit.loss, trace.model(id).converged && global_fit.converged};
}

/// Logistic fit on every feature column of the dataset.
inline FitResult fit_global(const Dataset& dataset, const FitOptions& opts = {}) {
  return fit_logistic(dataset.features, dataset.labels, opts);
}

}  // namespace nia
