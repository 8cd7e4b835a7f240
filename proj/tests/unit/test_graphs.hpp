#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "bisg/attack_graph.hpp"

namespace bisg::testing {

// vs -> v1 -> {v2, v3} -> v4 -> v5, target v5.
inline AttackGraph fig4a(double s12 = 1.0) {
  std::vector<Node> nodes = {{"vs", "", NodeKind::kSource},
                             {"v1", "", NodeKind::kIntermediate},
                             {"v2", "", NodeKind::kIntermediate},
                             {"v3", "", NodeKind::kIntermediate},
                             {"v4", "", NodeKind::kIntermediate},
                             {"v5", "", NodeKind::kCritical}};
  std::vector<Edge> edges = {{"vs", "v1", 1.0, 1.0, ""},  {"v1", "v2", 1.0, s12, ""},
                             {"v1", "v3", 1.0, 1.0, ""},  {"v2", "v4", 1.0, 1.0, ""},
                             {"v3", "v4", 1.0, 1.0, ""},  {"v4", "v5", 1.0, 1.0, ""}};
  return AttackGraph(nodes, edges, {"vs"}, {{"v5", 1.0, {"D1"}}});
}

// Cross-over graph: v1 -> {v2, v3}, v2 -> v3, {v2, v3} -> v4.
inline AttackGraph fig4b() {
  std::vector<Node> nodes = {{"v1", "", NodeKind::kSource},
                             {"v2", "", NodeKind::kIntermediate},
                             {"v3", "", NodeKind::kIntermediate},
                             {"v4", "", NodeKind::kCritical}};
  std::vector<Edge> edges = {{"v1", "v2", 1.0, 1.0, ""}, {"v1", "v3", 1.0, 1.0, ""},
                             {"v2", "v3", 1.0, 1.0, ""}, {"v2", "v4", 1.0, 1.0, ""},
                             {"v3", "v4", 1.0, 1.0, ""}};
  return AttackGraph(nodes, edges, {"v1"}, {{"v4", 1.0, {"D1"}}});
}

// Random DAG on n nodes: edges only go from lower to higher index. Node 0
// (and sometimes 1) is a source; the last two nodes are critical.
inline AttackGraph random_dag(std::mt19937_64& rng, int n, double density = 0.4,
                              bool two_sources = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Node> nodes;
  for (int i = 0; i < n; ++i) {
    nodes.push_back({"n" + std::to_string(100 + i), "", NodeKind::kIntermediate});
  }
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    bool has_out = false;
    for (int j = i + 1; j < n; ++j) {
      if (u(rng) < density || (j == i + 1 && !has_out && u(rng) < 0.7)) {
        edges.push_back({nodes[i].id, nodes[j].id, 0.05 + 0.95 * u(rng),
                         1.0 + 2.0 * u(rng), ""});
        has_out = true;
      }
    }
  }
  // Guarantee reachability of the targets from node 0.
  edges.push_back({nodes[0].id, nodes[n - 2].id, 0.1, 1.0, ""});
  edges.push_back({nodes[n - 2].id, nodes[n - 1].id, 0.5, 1.0, ""});
  std::vector<std::string> sources = {nodes[0].id};
  if (two_sources) sources.push_back(nodes[1].id);
  for (auto& s : sources) {
    for (auto& node : nodes) {
      if (node.id == s) node.kind = NodeKind::kSource;
    }
  }
  nodes[n - 2].kind = NodeKind::kCritical;
  nodes[n - 1].kind = NodeKind::kCritical;
  std::vector<CriticalAsset> critical = {{nodes[n - 2].id, 1.0 + u(rng), {"D1"}},
                                         {nodes[n - 1].id, 1.0 + u(rng), {"D1"}}};
  // Deduplicate edges that the reachability patches may have repeated.
  std::vector<Edge> unique;
  for (const auto& e : edges) {
    if (std::none_of(unique.begin(), unique.end(), [&](const Edge& x) {
          return x.from == e.from && x.to == e.to;
        })) {
      unique.push_back(e);
    }
  }
  return AttackGraph(nodes, unique, sources, critical);
}

}  // namespace bisg::testing
