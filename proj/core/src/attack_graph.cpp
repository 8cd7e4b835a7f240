#include "bisg/attack_graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace bisg {

namespace {

constexpr double kMinProbability = 1e-300;

bool near_equal(double a, double b) {
  if (a == b) return true;
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= 1e-12 * scale;
}

}  // namespace

std::string edge_key(const std::string& from, const std::string& to) {
  return from + "->" + to;
}

AttackGraph::AttackGraph(std::vector<Node> nodes, std::vector<Edge> edges,
                         std::vector<std::string> sources,
                         std::vector<CriticalAsset> critical_assets)
    : nodes_(std::move(nodes)),
      edges_(std::move(edges)),
      sources_(std::move(sources)),
      critical_(std::move(critical_assets)) {
  for (NodeIndex v = 0; v < nodes_.size(); ++v) {
    node_by_id_.emplace(nodes_[v].id, v);  // first wins; duplicates reported
  }
  out_.resize(nodes_.size());
  in_.resize(nodes_.size());
  is_source_.assign(nodes_.size(), false);
  edge_from_.resize(edges_.size(), kNoIndex);
  edge_to_.resize(edges_.size(), kNoIndex);
  neg_log_p0_.resize(edges_.size(), 0.0);

  for (EdgeIndex e = 0; e < edges_.size(); ++e) {
    const auto& edge = edges_[e];
    edge_by_key_.emplace(bisg::edge_key(edge.from, edge.to), e);
    auto from = find_node(edge.from);
    auto to = find_node(edge.to);
    const double p = std::clamp(edge.p0, kMinProbability, 1.0);
    neg_log_p0_[e] = -std::log(p);
    if (!from || !to) {
      endpoints_ok_ = false;
      continue;
    }
    edge_from_[e] = *from;
    edge_to_[e] = *to;
    out_[*from].push_back(e);
    in_[*to].push_back(e);
  }
  // Successors in ascending id order make DFS enumeration lexicographic.
  auto by_target = [this](EdgeIndex a, EdgeIndex b) {
    return nodes_[edge_to_[a]].id < nodes_[edge_to_[b]].id;
  };
  for (auto& list : out_) std::sort(list.begin(), list.end(), by_target);

  for (const auto& s : sources_) {
    if (auto v = find_node(s)) {
      if (!is_source_[*v]) source_idx_.push_back(*v);
      is_source_[*v] = true;
    }
  }

  // Kahn's algorithm, smallest id first for a deterministic order.
  std::vector<std::size_t> indegree(nodes_.size(), 0);
  for (EdgeIndex e = 0; e < edges_.size(); ++e) {
    if (edge_to_[e] != kNoIndex) ++indegree[edge_to_[e]];
  }
  std::set<std::pair<std::string, NodeIndex>> ready;
  for (NodeIndex v = 0; v < nodes_.size(); ++v) {
    if (indegree[v] == 0) ready.emplace(nodes_[v].id, v);
  }
  while (!ready.empty()) {
    const NodeIndex v = ready.begin()->second;
    ready.erase(ready.begin());
    topo_.push_back(v);
    for (EdgeIndex e : out_[v]) {
      if (--indegree[edge_to_[e]] == 0) {
        ready.emplace(nodes_[edge_to_[e]].id, edge_to_[e]);
      }
    }
  }
  if (topo_.size() != nodes_.size()) {
    acyclic_ = false;
    topo_.clear();
  }
}

std::optional<NodeIndex> AttackGraph::find_node(const std::string& id) const {
  auto it = node_by_id_.find(id);
  if (it == node_by_id_.end()) return std::nullopt;
  return it->second;
}

NodeIndex AttackGraph::node_index(const std::string& id) const {
  auto v = find_node(id);
  if (!v) throw GraphError("unknown node id '" + id + "'");
  return *v;
}

std::optional<EdgeIndex> AttackGraph::find_edge(const std::string& from,
                                                const std::string& to) const {
  auto it = edge_by_key_.find(bisg::edge_key(from, to));
  if (it == edge_by_key_.end()) return std::nullopt;
  return it->second;
}

EdgeIndex AttackGraph::edge_index(const std::string& key) const {
  auto it = edge_by_key_.find(key);
  if (it == edge_by_key_.end()) throw GraphError("unknown edge '" + key + "'");
  return it->second;
}

std::string AttackGraph::edge_key(EdgeIndex e) const {
  return bisg::edge_key(edges_[e].from, edges_[e].to);
}

void AttackGraph::require_valid() const {
  auto report = validate_graph(*this);
  if (!report.ok()) {
    std::string msg = "invalid attack graph:";
    for (const auto& v : report.violations) msg += " " + v + ";";
    throw GraphError(msg);
  }
}

std::vector<std::string> AttackGraph::path_nodes(const EdgePath& path) const {
  std::vector<std::string> ids;
  if (path.empty()) return ids;
  ids.push_back(nodes_[edge_from_[path.front()]].id);
  for (EdgeIndex e : path) ids.push_back(nodes_[edge_to_[e]].id);
  return ids;
}

ValidationReport validate_graph(const AttackGraph& graph) {
  ValidationReport report;
  auto& out = report.violations;

  std::set<std::string> seen;
  for (const auto& node : graph.nodes()) {
    if (node.id.empty()) out.push_back("empty node id");
    if (!seen.insert(node.id).second) {
      out.push_back("duplicate node id '" + node.id + "'");
    }
  }

  std::set<std::string> edge_seen;
  for (const auto& edge : graph.edges()) {
    const std::string key = edge_key(edge.from, edge.to);
    if (!graph.find_node(edge.from) || !graph.find_node(edge.to)) {
      out.push_back("edge endpoint missing: " + key);
    }
    if (edge.from == edge.to) out.push_back("self-loop: " + key);
    if (!edge_seen.insert(key).second) out.push_back("duplicate edge: " + key);
    if (!(edge.p0 > 0.0 && edge.p0 <= 1.0)) {
      out.push_back("edge probability outside (0,1]: " + key);
    }
    if (!(edge.s >= 1.0) || !std::isfinite(edge.s)) {
      out.push_back("edge sensitivity below 1: " + key);
    }
  }

  if (graph.sources().empty()) out.push_back("no source nodes");
  for (const auto& s : graph.sources()) {
    if (!graph.find_node(s)) out.push_back("unknown source '" + s + "'");
  }

  if (!graph.acyclic()) out.push_back("cycle detected");

  std::set<std::string> critical_seen;
  for (const auto& asset : graph.critical_assets()) {
    if (!graph.find_node(asset.node)) {
      out.push_back("unknown critical asset '" + asset.node + "'");
      continue;
    }
    if (!critical_seen.insert(asset.node).second) {
      out.push_back("duplicate critical asset '" + asset.node + "'");
    }
    if (!(asset.loss >= 0.0) || !std::isfinite(asset.loss)) {
      out.push_back("critical asset loss not finite and nonnegative: " +
                    asset.node);
    }
    if (asset.owners.empty()) {
      out.push_back("critical asset without owners: " + asset.node);
    }
  }

  if (graph.endpoints_resolved()) {
    // Reachability over edges regardless of cycles.
    std::vector<bool> reached(graph.node_count(), false);
    std::vector<NodeIndex> stack(graph.source_indices().begin(),
                                 graph.source_indices().end());
    for (NodeIndex v : stack) reached[v] = true;
    while (!stack.empty()) {
      const NodeIndex v = stack.back();
      stack.pop_back();
      for (EdgeIndex e : graph.out_edges(v)) {
        const NodeIndex w = graph.edge_to(e);
        if (!reached[w]) {
          reached[w] = true;
          stack.push_back(w);
        }
      }
    }
    for (const auto& asset : graph.critical_assets()) {
      auto v = graph.find_node(asset.node);
      if (v && !reached[*v]) {
        out.push_back("unreachable critical asset '" + asset.node + "'");
      }
    }
  }
  return report;
}

std::vector<EdgePath> enumerate_paths(const AttackGraph& graph,
                                      const std::string& source,
                                      const std::string& target) {
  const NodeIndex s = graph.node_index(source);
  const NodeIndex t = graph.node_index(target);
  graph.require_valid();
  std::vector<EdgePath> paths;
  if (s == t) return paths;

  EdgePath current;
  std::function<void(NodeIndex)> dfs = [&](NodeIndex v) {
    if (v == t) {
      paths.push_back(current);
      return;
    }
    for (EdgeIndex e : graph.out_edges(v)) {
      current.push_back(e);
      dfs(graph.edge_to(e));
      current.pop_back();
    }
  };
  dfs(s);
  return paths;
}

EdgePath PathTree::path_to(NodeIndex v) const {
  EdgePath path;
  if (v >= dist.size() || !std::isfinite(dist[v])) return path;
  while (pred[v] != kNoIndex) {
    path.push_back(pred[v]);
    v = pred_node[v];
  }
  std::reverse(path.begin(), path.end());
  return path;
}

namespace {

EdgePath walk_back(const AttackGraph& graph, const std::vector<EdgeIndex>& pred,
                   NodeIndex v) {
  EdgePath path;
  while (pred[v] != kNoIndex) {
    path.push_back(pred[v]);
    v = graph.edge_from(pred[v]);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// Lexicographic comparison of the node-id sequences of two candidate paths,
// each given as (prefix path to a node) + one final edge.
bool lexicographically_less(const AttackGraph& graph,
                            const std::vector<EdgeIndex>& pred, EdgeIndex a,
                            EdgeIndex b) {
  auto seq = [&](EdgeIndex last) {
    EdgePath p = walk_back(graph, pred, graph.edge_from(last));
    p.push_back(last);
    return graph.path_nodes(p);
  };
  return seq(a) < seq(b);
}

}  // namespace

PathTree shortest_path_tree(const AttackGraph& graph,
                            std::span<const double> lengths,
                            bool lexicographic_ties) {
  if (lengths.size() != graph.edge_count()) {
    throw GraphError("edge length vector has wrong size");
  }
  if (!graph.acyclic()) throw GraphError("cycle detected");
  const double inf = std::numeric_limits<double>::infinity();
  PathTree tree;
  tree.dist.assign(graph.node_count(), inf);
  tree.pred.assign(graph.node_count(), kNoIndex);
  tree.pred_node.assign(graph.node_count(), kNoIndex);
  for (NodeIndex s : graph.source_indices()) tree.dist[s] = 0.0;

  for (NodeIndex v : graph.topo_order()) {
    if (graph.is_source(v)) continue;  // attacks start here at no cost
    double best = inf;
    EdgeIndex best_edge = kNoIndex;
    for (EdgeIndex e : graph.in_edges(v)) {
      const double du = tree.dist[graph.edge_from(e)];
      if (!std::isfinite(du)) continue;
      const double cand = du + lengths[e];
      if (best_edge == kNoIndex) {
        best = cand;
        best_edge = e;
      } else if (near_equal(cand, best)) {
        if (lexicographic_ties &&
            lexicographically_less(graph, tree.pred, e, best_edge)) {
          best = std::min(best, cand);
          best_edge = e;
        }
      } else if (cand < best) {
        best = cand;
        best_edge = e;
      }
    }
    tree.dist[v] = best;
    tree.pred[v] = best_edge;
    if (best_edge != kNoIndex) tree.pred_node[v] = graph.edge_from(best_edge);
  }
  return tree;
}

VulnerablePath most_vulnerable_path(const AttackGraph& graph,
                                    std::span<const double> edge_probs,
                                    const std::string& target) {
  if (!graph.endpoints_resolved() || !graph.acyclic()) {
    throw GraphError("attack graph has dangling edges or a cycle");
  }
  if (edge_probs.size() != graph.edge_count()) {
    throw GraphError("missing edge probability");
  }
  std::vector<double> lengths(graph.edge_count());
  for (EdgeIndex e = 0; e < lengths.size(); ++e) {
    const double p = edge_probs[e];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw GraphError("edge probability outside [0,1] on " + graph.edge_key(e));
    }
    lengths[e] = -std::log(std::max(p, kMinProbability));
  }
  const NodeIndex t = graph.node_index(target);
  auto tree = shortest_path_tree(graph, lengths);
  VulnerablePath result;
  if (!std::isfinite(tree.dist[t]) || graph.is_source(t)) return result;
  result.path = walk_back(graph, tree.pred, t);
  double prob = 1.0;
  for (EdgeIndex e : result.path) prob *= edge_probs[e];
  result.probability = prob;
  return result;
}

// ---- min cut ----------------------------------------------------------------

namespace {

struct FlowNetwork {
  struct Arc {
    std::size_t to;
    double cap;
    std::size_t rev;
    EdgeIndex edge;  // kNoIndex for super arcs and reverse arcs
  };
  std::vector<std::vector<Arc>> adj;

  explicit FlowNetwork(std::size_t n) : adj(n) {}

  void add(std::size_t u, std::size_t v, double cap, EdgeIndex edge) {
    adj[u].push_back({v, cap, adj[v].size(), edge});
    adj[v].push_back({u, 0.0, adj[u].size() - 1, kNoIndex});
  }

  double max_flow(std::size_t s, std::size_t t, double infinity) {
    double flow = 0.0;
    while (true) {
      std::vector<std::pair<std::size_t, std::size_t>> parent(
          adj.size(), {kNoIndex, kNoIndex});
      std::vector<std::size_t> queue{s};
      parent[s] = {s, 0};
      for (std::size_t head = 0; head < queue.size() && parent[t].first == kNoIndex;
           ++head) {
        const std::size_t u = queue[head];
        for (std::size_t i = 0; i < adj[u].size(); ++i) {
          const auto& arc = adj[u][i];
          if (arc.cap > 1e-12 && parent[arc.to].first == kNoIndex) {
            parent[arc.to] = {u, i};
            queue.push_back(arc.to);
          }
        }
      }
      if (parent[t].first == kNoIndex) return flow;
      double push = infinity;
      for (std::size_t v = t; v != s; v = parent[v].first) {
        push = std::min(push, adj[parent[v].first][parent[v].second].cap);
      }
      for (std::size_t v = t; v != s; v = parent[v].first) {
        auto& arc = adj[parent[v].first][parent[v].second];
        arc.cap -= push;
        adj[v][arc.rev].cap += push;
      }
      flow += push;
      if (flow >= infinity) return flow;
    }
  }
};

}  // namespace

MinCutResult min_edge_cut(const AttackGraph& graph,
                          std::span<const NodeIndex> sources,
                          std::span<const NodeIndex> targets,
                          const MinCutOptions& options) {
  graph.require_valid();
  const std::size_t n = graph.node_count();
  const std::size_t super_s = n;
  const std::size_t super_t = n + 1;
  const double big = static_cast<double>(graph.edge_count() + 1);
  const double infinity = big * big;

  FlowNetwork net(n + 2);
  for (EdgeIndex e = 0; e < graph.edge_count(); ++e) {
    const bool cuttable = options.cuttable.empty() || options.cuttable[e];
    net.add(graph.edge_from(e), graph.edge_to(e), cuttable ? 1.0 : big, e);
  }
  for (NodeIndex s : sources) net.add(super_s, s, big, kNoIndex);
  for (NodeIndex t : targets) net.add(t, super_t, big, kNoIndex);

  const double flow = net.max_flow(super_s, super_t, infinity);
  if (flow < 0.5) throw GraphError("unreachable target");
  if (flow >= big - 0.5) throw GraphError("no finite edge cut");

  MinCutResult result;
  result.size = static_cast<std::size_t>(std::llround(flow));

  // Residual graph and its strongly connected components (Tarjan).
  const std::size_t m = n + 2;
  std::vector<std::vector<std::size_t>> res(m);
  for (std::size_t u = 0; u < m; ++u) {
    for (const auto& arc : net.adj[u]) {
      if (arc.cap > 1e-9) res[u].push_back(arc.to);
    }
  }
  std::vector<std::size_t> comp(m, kNoIndex), low(m), order(m, kNoIndex);
  std::vector<bool> on_stack(m, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0, ncomp = 0;
  std::function<void(std::size_t)> strongconnect = [&](std::size_t v) {
    order[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : res[v]) {
      if (order[w] == kNoIndex) {
        strongconnect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], order[w]);
      }
    }
    if (low[v] == order[v]) {
      while (true) {
        const std::size_t w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = ncomp;
        if (w == v) break;
      }
      ++ncomp;
    }
  };
  for (std::size_t v = 0; v < m; ++v) {
    if (order[v] == kNoIndex) strongconnect(v);
  }

  std::vector<std::set<std::size_t>> succ(ncomp), pred(ncomp);
  for (std::size_t u = 0; u < m; ++u) {
    for (std::size_t w : res[u]) {
      if (comp[u] != comp[w]) {
        succ[comp[u]].insert(comp[w]);
        pred[comp[w]].insert(comp[u]);
      }
    }
  }

  enum class State { kFree, kIn, kOut };
  std::vector<State> state(ncomp, State::kFree);

  // Marks c and everything reachable (dir = succ) or reaching (dir = pred).
  auto mark = [&](std::vector<State>& st, std::size_t c, State value,
                  const std::vector<std::set<std::size_t>>& dir) {
    std::vector<std::size_t> todo{c};
    while (!todo.empty()) {
      const std::size_t x = todo.back();
      todo.pop_back();
      if (st[x] == value) continue;
      if (st[x] != State::kFree) return false;
      st[x] = value;
      for (std::size_t y : dir[x]) todo.push_back(y);
    }
    return true;
  };
  if (!mark(state, comp[super_s], State::kIn, succ) ||
      !mark(state, comp[super_t], State::kOut, pred)) {
    throw GraphError("min-cut residual closure failed");
  }

  std::set<EdgeCut> found;
  bool stopped = false;
  std::function<void(std::vector<State>&)> enumerate =
      [&](std::vector<State>& st) {
        if (stopped) return;
        std::size_t pick = kNoIndex;
        for (std::size_t c = 0; c < ncomp; ++c) {
          if (st[c] == State::kFree) {
            pick = c;
            break;
          }
        }
        if (pick == kNoIndex) {
          EdgeCut cut;
          for (EdgeIndex e = 0; e < graph.edge_count(); ++e) {
            const bool u_in = st[comp[graph.edge_from(e)]] == State::kIn;
            const bool v_in = st[comp[graph.edge_to(e)]] == State::kIn;
            if (u_in && !v_in) cut.push_back(e);
          }
          found.insert(cut);
          if (found.size() >= options.limit) stopped = true;
          return;
        }
        {
          auto next = st;
          if (mark(next, pick, State::kIn, succ)) enumerate(next);
        }
        if (stopped) return;
        {
          auto next = st;
          if (mark(next, pick, State::kOut, pred)) enumerate(next);
        }
      };
  enumerate(state);
  result.truncated = stopped;

  auto key_seq = [&](const EdgeCut& cut) {
    std::vector<std::string> keys;
    for (EdgeIndex e : cut) keys.push_back(graph.edge_key(e));
    std::sort(keys.begin(), keys.end());
    return keys;
  };
  for (EdgeCut cut : found) {
    std::sort(cut.begin(), cut.end(), [&](EdgeIndex a, EdgeIndex b) {
      return graph.edge_key(a) < graph.edge_key(b);
    });
    result.cuts.push_back(std::move(cut));
  }
  std::sort(result.cuts.begin(), result.cuts.end(),
            [&](const EdgeCut& a, const EdgeCut& b) {
              return key_seq(a) < key_seq(b);
            });
  return result;
}

std::vector<EdgeCut> min_edge_cut(const AttackGraph& graph,
                                  const std::string& source,
                                  const std::string& target,
                                  std::size_t limit) {
  const NodeIndex s = graph.node_index(source);
  const NodeIndex t = graph.node_index(target);
  if (s == t) throw GraphError("unreachable target");
  const NodeIndex src[] = {s};
  const NodeIndex dst[] = {t};
  MinCutOptions options;
  options.limit = limit;
  return min_edge_cut(graph, src, dst, options).cuts;
}

// ---- k-hop ------------------------------------------------------------------

KHopResult khop_transform(const AttackGraph& graph, const KHopSpec& spec) {
  graph.require_valid();
  const std::size_t n = graph.node_count();

  std::vector<int> depth(n, 1);
  for (const auto& [id, k] : spec.depth) {
    if (k < 1) throw GraphError("k-hop depth must be >= 1 at '" + id + "'");
    depth[graph.node_index(id)] = k;
  }

  // history[v]: number of trailing edges a virtual copy of v must remember.
  std::vector<int> history(n, 0);
  const auto& topo = graph.topo_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const NodeIndex u = *it;
    int h = 0;
    for (EdgeIndex e : graph.out_edges(u)) {
      const NodeIndex w = graph.edge_to(e);
      h = std::max({h, depth[w] - 1, history[w] - 1});
    }
    history[u] = h;
  }

  // Distinct histories per node, built forward.
  using History = std::vector<EdgeIndex>;
  std::vector<std::vector<History>> copies(n);
  auto seq_of = [&](const History& h) { return graph.path_nodes(h); };
  for (NodeIndex v : topo) {
    std::set<History> hs;
    if (graph.is_source(v) || graph.in_edges(v).empty()) hs.insert(History{});
    for (EdgeIndex e : graph.in_edges(v)) {
      const NodeIndex u = graph.edge_from(e);
      for (const auto& hu : copies[u]) {
        History hv = hu;
        hv.push_back(e);
        const auto keep = static_cast<std::size_t>(history[v]);
        if (hv.size() > keep) hv.erase(hv.begin(), hv.end() - keep);
        hs.insert(std::move(hv));
      }
    }
    std::vector<History> list(hs.begin(), hs.end());
    std::sort(list.begin(), list.end(), [&](const History& a, const History& b) {
      return seq_of(a) < seq_of(b);
    });
    copies[v] = std::move(list);
  }

  auto copy_id = [&](NodeIndex v, std::size_t i) {
    const std::string& base = graph.nodes()[v].id;
    if (copies[v].size() == 1) return base;
    const std::string suffix =
        i < 26 ? std::string(1, static_cast<char>('a' + i)) : std::to_string(i);
    return base + "^" + suffix;
  };

  std::set<std::string> critical_ids;
  for (const auto& a : graph.critical_assets()) critical_ids.insert(a.node);

  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<std::string> sources;
  EdgeMirrorMap mirror;
  std::set<std::string> derived_keys;

  for (NodeIndex v : topo) {
    const Node& orig = graph.nodes()[v];
    const bool split = copies[v].size() > 1;
    for (std::size_t i = 0; i < copies[v].size(); ++i) {
      Node node = orig;
      node.id = copy_id(v, i);
      if (split && critical_ids.count(orig.id)) node.kind = NodeKind::kIntermediate;
      nodes.push_back(node);
      if (graph.is_source(v) && copies[v][i].empty()) sources.push_back(node.id);
    }
    if (split && critical_ids.count(orig.id)) {
      // Split critical assets are re-joined through certain (p = 1) edges so
      // the asset keeps a single node.
      nodes.push_back(orig);
      for (std::size_t i = 0; i < copies[v].size(); ++i) {
        edges.push_back({copy_id(v, i), orig.id, 1.0, 1.0, "k-hop join"});
      }
    }
  }

  // Derived edges: (u, hu) -> (v, hv) for every original edge u->v.
  for (EdgeIndex e = 0; e < graph.edge_count(); ++e) {
    const NodeIndex u = graph.edge_from(e);
    const NodeIndex v = graph.edge_to(e);
    const Edge& orig = graph.edges()[e];
    auto& derived = mirror[graph.edge_key(e)];
    for (std::size_t i = 0; i < copies[u].size(); ++i) {
      History hv = copies[u][i];
      hv.push_back(e);
      const auto keep = static_cast<std::size_t>(history[v]);
      if (hv.size() > keep) hv.erase(hv.begin(), hv.end() - keep);
      auto it = std::find(copies[v].begin(), copies[v].end(), hv);
      const std::size_t j = static_cast<std::size_t>(it - copies[v].begin());
      Edge edge = orig;
      edge.from = copy_id(u, i);
      edge.to = copy_id(v, j);
      const std::string key = bisg::edge_key(edge.from, edge.to);
      if (auto ov = spec.probability_override.find(key);
          ov != spec.probability_override.end()) {
        edge.p0 = ov->second;
      }
      derived.push_back(key);
      derived_keys.insert(key);
      edges.push_back(std::move(edge));
    }
  }
  for (const auto& [key, p] : spec.probability_override) {
    if (!derived_keys.count(key)) {
      throw GraphError("k-hop override references unknown derived edge '" +
                       key + "'");
    }
    if (!(p > 0.0 && p <= 1.0)) {
      throw GraphError("k-hop override outside (0,1] on '" + key + "'");
    }
  }

  KHopResult result{AttackGraph(std::move(nodes), std::move(edges),
                                std::move(sources),
                                graph.critical_assets()),
                    std::move(mirror)};
  return result;
}

}  // namespace bisg
