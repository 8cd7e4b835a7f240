#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bisg {

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NodeKind { kIntermediate, kSource, kCritical };

struct Node {
  std::string id;
  std::string label;
  NodeKind kind = NodeKind::kIntermediate;
};

struct Edge {
  std::string from;
  std::string to;
  double p0 = 1.0;
  double s = 1.0;
  // Free-text provenance annotation carried through serialization.
  std::string note;
};

struct CriticalAsset {
  std::string node;
  double loss = 1.0;
  std::vector<std::string> owners;
};

using NodeIndex = std::size_t;
using EdgeIndex = std::size_t;
inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

// Sequence of edge indices from a source to a target.
using EdgePath = std::vector<EdgeIndex>;

std::string edge_key(const std::string& from, const std::string& to);

// Immutable attack graph. Construction indexes the data but never throws on
// invariant violations: those are reported by validate_graph(). Operations
// that need a well-formed DAG call require_valid() first.
class AttackGraph {
 public:
  AttackGraph() = default;
  AttackGraph(std::vector<Node> nodes, std::vector<Edge> edges,
              std::vector<std::string> sources,
              std::vector<CriticalAsset> critical_assets);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::string>& sources() const { return sources_; }
  const std::vector<CriticalAsset>& critical_assets() const { return critical_; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  std::optional<NodeIndex> find_node(const std::string& id) const;
  NodeIndex node_index(const std::string& id) const;  // throws GraphError
  std::optional<EdgeIndex> find_edge(const std::string& from,
                                     const std::string& to) const;
  EdgeIndex edge_index(const std::string& key) const;  // "from->to"
  std::string edge_key(EdgeIndex e) const;

  NodeIndex edge_from(EdgeIndex e) const { return edge_from_[e]; }
  NodeIndex edge_to(EdgeIndex e) const { return edge_to_[e]; }
  const std::vector<EdgeIndex>& out_edges(NodeIndex v) const { return out_[v]; }
  const std::vector<EdgeIndex>& in_edges(NodeIndex v) const { return in_[v]; }
  const std::vector<NodeIndex>& source_indices() const { return source_idx_; }
  bool is_source(NodeIndex v) const { return is_source_[v]; }

  // -ln p0 per edge, p0 clamped to [1e-300, 1].
  double base_log_odds(EdgeIndex e) const { return neg_log_p0_[e]; }

  bool acyclic() const { return acyclic_; }
  bool endpoints_resolved() const { return endpoints_ok_; }
  // Topological order; empty when the graph has a cycle.
  const std::vector<NodeIndex>& topo_order() const { return topo_; }

  void require_valid() const;

  // Node-id sequence of a path, source first.
  std::vector<std::string> path_nodes(const EdgePath& path) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::string> sources_;
  std::vector<CriticalAsset> critical_;

  std::map<std::string, NodeIndex> node_by_id_;
  std::map<std::string, EdgeIndex> edge_by_key_;
  std::vector<NodeIndex> edge_from_;
  std::vector<NodeIndex> edge_to_;
  std::vector<std::vector<EdgeIndex>> out_;
  std::vector<std::vector<EdgeIndex>> in_;
  std::vector<NodeIndex> source_idx_;
  std::vector<bool> is_source_;
  std::vector<double> neg_log_p0_;
  std::vector<NodeIndex> topo_;
  bool acyclic_ = true;
  bool endpoints_ok_ = true;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_graph(const AttackGraph& graph);

// All simple source->target paths, ordered lexicographically by node-id
// sequence. Empty when source == target.
std::vector<EdgePath> enumerate_paths(const AttackGraph& graph,
                                      const std::string& source,
                                      const std::string& target);

struct VulnerablePath {
  EdgePath path;
  double probability = 0.0;
};

// Max-product path from any source to `target`. Empty path and probability 0
// when the target is unreachable.
VulnerablePath most_vulnerable_path(const AttackGraph& graph,
                                    std::span<const double> edge_probs,
                                    const std::string& target);

// Shortest-path tree over non-negative edge lengths from every source, in
// topological order. Near-ties (relative 1e-12) go to the lexicographically
// smallest node-id sequence.
struct PathTree {
  std::vector<double> dist;         // +inf when unreachable
  std::vector<EdgeIndex> pred;      // kNoIndex at sources / unreachable
  std::vector<NodeIndex> pred_node;
  EdgePath path_to(NodeIndex v) const;
};

PathTree shortest_path_tree(const AttackGraph& graph,
                            std::span<const double> lengths,
                            bool lexicographic_ties = true);

using EdgeCut = std::vector<EdgeIndex>;

struct MinCutOptions {
  std::size_t limit = 16;
  // Edges that may be cut; empty means every edge.
  std::vector<bool> cuttable;
};

struct MinCutResult {
  std::size_t size = 0;
  std::vector<EdgeCut> cuts;  // each sorted; list sorted lexicographically
  bool truncated = false;     // enumeration hit the limit
};

// All minimum-cardinality edge cuts separating `sources` from `targets`.
// Throws GraphError when no target is reachable or when no finite cut
// exists under the cuttable mask.
MinCutResult min_edge_cut(const AttackGraph& graph,
                          std::span<const NodeIndex> sources,
                          std::span<const NodeIndex> targets,
                          const MinCutOptions& options = {});

std::vector<EdgeCut> min_edge_cut(const AttackGraph& graph,
                                  const std::string& source,
                                  const std::string& target,
                                  std::size_t limit = 16);

// ---- k-hop dependence -------------------------------------------------------

struct KHopSpec {
  std::map<std::string, int> depth;                  // node id -> k (default 1)
  std::map<std::string, double> probability_override;  // derived edge key -> p
};

// Original edge key -> derived edge keys in the transformed graph.
using EdgeMirrorMap = std::map<std::string, std::vector<std::string>>;

struct KHopResult {
  AttackGraph graph;
  EdgeMirrorMap mirror;
};

KHopResult khop_transform(const AttackGraph& graph, const KHopSpec& spec);

}  // namespace bisg
