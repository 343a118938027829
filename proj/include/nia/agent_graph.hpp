#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nia/errors.hpp"

namespace nia {

/// 1-based agent identifier.
using AgentId = std::size_t;
/// 1-based feature index set; kept sorted and duplicate free.
using FeatureSet = std::set<std::size_t>;
using Edge = std::pair<AgentId, AgentId>;  // (parent, child)

/// Immutable agent DAG with feature assignments and a deterministic
/// topological order (ties broken by ascending id).
class AgentGraph {
 public:
  [[nodiscard]] std::size_t num_agents() const { return feature_sets_.size(); }
  [[nodiscard]] std::size_t num_features() const { return d_; }

  [[nodiscard]] const FeatureSet& features(AgentId id) const { return feature_sets_.at(check(id)); }
  [[nodiscard]] const std::vector<AgentId>& parents(AgentId id) const { return parents_.at(check(id)); }
  [[nodiscard]] const std::vector<AgentId>& children(AgentId id) const { return children_.at(check(id)); }
  [[nodiscard]] const std::vector<AgentId>& topo_order() const { return topo_order_; }

  /// Position of an agent within topo_order (0-based).
  [[nodiscard]] std::size_t topo_position(AgentId id) const { return topo_pos_.at(check(id)); }

  [[nodiscard]] std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (AgentId child = 1; child <= num_agents(); ++child) {
      for (AgentId parent : parents_[child - 1]) out.emplace_back(parent, child);
    }
    return out;
  }

  /// Agents without children, in topological order.
  [[nodiscard]] std::vector<AgentId> sinks() const {
    std::vector<AgentId> out;
    for (AgentId id : topo_order_) {
      if (children_[id - 1].empty()) out.push_back(id);
    }
    return out;
  }

  /// True when the graph is a single chain: one source, every other agent
  /// has exactly one parent and no agent has more than one child.
  [[nodiscard]] bool is_path() const {
    std::size_t sources = 0;
    for (std::size_t i = 0; i < num_agents(); ++i) {
      if (parents_[i].empty()) {
        ++sources;
      } else if (parents_[i].size() != 1) {
        return false;
      }
      if (children_[i].size() > 1) return false;
    }
    return sources == 1;
  }

  friend AgentGraph build_agent_graph(const std::vector<Edge>& edges,
                                      const std::vector<FeatureSet>& feature_sets, std::size_t d);

 private:
  std::size_t check(AgentId id) const {
    if (id < 1 || id > num_agents()) {
      throw IndexOutOfRange("agent id " + std::to_string(id) + " outside 1.." +
                            std::to_string(num_agents()));
    }
    return id - 1;
  }

  std::size_t d_ = 0;
  std::vector<FeatureSet> feature_sets_;
  std::vector<std::vector<AgentId>> parents_;
  std::vector<std::vector<AgentId>> children_;
  std::vector<AgentId> topo_order_;
  std::vector<std::size_t> topo_pos_;
};

/// Validates ids and feature indices, then orders agents with Kahn's
/// algorithm using a min-heap so ready agents leave in ascending id order.
/// Parents keep the order in which their edges were listed.
inline AgentGraph build_agent_graph(const std::vector<Edge>& edges,
                                    const std::vector<FeatureSet>& feature_sets, std::size_t d) {
  AgentGraph g;
  const std::size_t n = feature_sets.size();
  g.d_ = d;
  g.feature_sets_ = feature_sets;
  g.parents_.assign(n, {});
  g.children_.assign(n, {});

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l : feature_sets[i]) {
      if (l < 1 || l > d) {
        throw IndexOutOfRange("agent " + std::to_string(i + 1) + " has feature " +
                              std::to_string(l) + " outside 1.." + std::to_string(d));
      }
    }
  }
  for (const auto& [parent, child] : edges) {
    if (parent < 1 || parent > n || child < 1 || child > n) {
      throw IndexOutOfRange("edge (" + std::to_string(parent) + "," + std::to_string(child) +
                            ") references an agent outside 1.." + std::to_string(n));
    }
    if (parent == child) throw CycleDetected("self loop at agent " + std::to_string(parent));
    auto& ps = g.parents_[child - 1];
    if (std::find(ps.begin(), ps.end(), parent) != ps.end()) continue;  // duplicate edge
    ps.push_back(parent);
    g.children_[parent - 1].push_back(child);
  }

  std::vector<std::size_t> indegree(n);
  for (std::size_t i = 0; i < n; ++i) indegree[i] = g.parents_[i].size();
  std::priority_queue<AgentId, std::vector<AgentId>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(i + 1);
  }
  while (!ready.empty()) {
    AgentId id = ready.top();
    ready.pop();
    g.topo_order_.push_back(id);
    for (AgentId child : g.children_[id - 1]) {
      if (--indegree[child - 1] == 0) ready.push(child);
    }
  }
  if (g.topo_order_.size() != n) {
    throw CycleDetected("edge relation contains a cycle (" +
                        std::to_string(n - g.topo_order_.size()) + " agents unordered)");
  }
  g.topo_pos_.assign(n, 0);
  for (std::size_t pos = 0; pos < n; ++pos) g.topo_pos_[g.topo_order_[pos] - 1] = pos;
  return g;
}

struct CoverageResult {
  bool covered = false;
  /// 1-based start (in path order) of the first window missing a feature.
  std::optional<std::size_t> first_violation;
};

/// M-coverage on a path: every window of M consecutive agents must jointly
/// observe all features 1..d.
inline CoverageResult check_m_coverage(const AgentGraph& graph, std::size_t window, std::size_t d) {
  if (!graph.is_path()) throw NotAPath("coverage is only defined on a simple path");
  const auto& order = graph.topo_order();
  if (window < 1 || window > order.size()) {
    throw InvalidDimension("window " + std::to_string(window) + " outside 1.." +
                           std::to_string(order.size()));
  }
  // Sliding count of how many agents in the window observe each feature.
  std::vector<std::size_t> count(d + 1, 0);
  std::size_t distinct = 0;
  auto add = [&](AgentId id, int sign) {
    for (std::size_t l : graph.features(id)) {
      if (l > d) continue;
      if (sign > 0) {
        if (count[l]++ == 0) ++distinct;
      } else {
        if (--count[l] == 0) --distinct;
      }
    }
  };
  for (std::size_t i = 0; i < window; ++i) add(order[i], +1);
  for (std::size_t start = 0;; ++start) {
    if (distinct != d) return {false, start + 1};
    if (start + window >= order.size()) break;
    add(order[start], -1);
    add(order[start + window], +1);
  }
  return {true, std::nullopt};
}

/// Smallest window for which the path is covered, if any.
inline std::optional<std::size_t> minimal_coverage_window(const AgentGraph& graph, std::size_t d) {
  const std::size_t len = graph.topo_order().size();
  for (std::size_t m = 1; m <= len; ++m) {
    if (check_m_coverage(graph, m, d).covered) return m;
  }
  return std::nullopt;
}

/// Path A_1 -> ... -> A_D where agent i observes feature ((i-1) mod k) + 1.
inline AgentGraph cyclic_path_assignment(std::size_t k, std::size_t depth) {
  if (k < 2) throw InvalidDimension("cyclic assignment needs k >= 2, got " + std::to_string(k));
  if (depth < 1) throw InvalidDimension("path depth must be at least 1");
  std::vector<FeatureSet> sets(depth);
  std::vector<Edge> edges;
  for (std::size_t i = 1; i <= depth; ++i) {
    sets[i - 1] = {((i - 1) % k) + 1};
    if (i > 1) edges.emplace_back(i - 1, i);
  }
  return build_agent_graph(edges, sets, k);
}

}  // namespace nia
