#include "savi/graph.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <queue>

#include <fmt/format.h>

namespace savi {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

NodeId parse_id(std::string_view token) {
  token = trim(token);
  NodeId value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
    throw GraphError(fmt::format("invalid node id '{}'", token));
  }
  return value;
}

// Finds one edge on a cycle among `remaining` nodes (all of which have unresolved in-degree).
Edge find_cycle_edge(const LatentDag& dag, const std::vector<bool>& remaining) {
  const int n = static_cast<int>(remaining.size());
  std::vector<int> color(n, 0);  // 0 white, 1 on stack, 2 done
  Edge found{-1, -1};
  std::function<bool(NodeId)> dfs = [&](NodeId u) {
    color[u] = 1;
    for (NodeId v : dag.children(u)) {
      if (!remaining[v]) continue;
      if (color[v] == 1) {
        found = {u, v};
        return true;
      }
      if (color[v] == 0 && dfs(v)) return true;
    }
    color[u] = 2;
    return false;
  };
  for (NodeId u = 0; u < n; ++u) {
    if (remaining[u] && color[u] == 0 && dfs(u)) break;
  }
  return found;
}

}  // namespace

LatentDag::LatentDag(std::vector<int> dims, std::vector<Edge> edges) {
  const int n = static_cast<int>(dims.size());
  dims_.reserve(n + 1);
  for (int d : dims) {
    if (d <= 0) throw GraphError(fmt::format("node dimension must be positive, got {}", d));
    dims_.push_back(d);
  }
  children_.assign(n + 1, {});
  parents_.assign(n + 1, {});
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (const Edge& e : edges) {
    if (e.parent < 1 || e.parent > n || e.child < 1 || e.child > n) {
      throw GraphError(fmt::format("edge {}>{} references a node outside [1, {}]", e.parent,
                                   e.child, n));
    }
    if (e.parent == e.child) throw GraphError(fmt::format("self edge on node {}", e.parent));
    children_[e.parent].push_back(e.child);
    parents_[e.child].push_back(e.parent);
  }
  for (auto& c : children_) std::sort(c.begin(), c.end());
  for (auto& p : parents_) std::sort(p.begin(), p.end());
  edges_ = std::move(edges);
}

bool LatentDag::is_valid(NodeId id) const {
  if (id == kRoot) return has_root_;
  return id >= 1 && id <= node_count();
}

int LatentDag::dim(NodeId id) const {
  if (!is_valid(id)) throw GraphError(fmt::format("unknown node {}", id));
  return dims_[id];
}

int LatentDag::total_dim() const {
  int total = 0;
  for (int d : dims_) total += d;
  return total;
}

const std::vector<NodeId>& LatentDag::children(NodeId id) const {
  if (!is_valid(id)) throw GraphError(fmt::format("unknown node {}", id));
  return children_[id];
}

const std::vector<NodeId>& LatentDag::parents(NodeId id) const {
  if (!is_valid(id)) throw GraphError(fmt::format("unknown node {}", id));
  return parents_[id];
}

bool LatentDag::has_edge(NodeId parent, NodeId child) const {
  if (!is_valid(parent) || !is_valid(child)) return false;
  const auto& c = children_[parent];
  return std::binary_search(c.begin(), c.end(), child);
}

std::vector<NodeId> LatentDag::nodes() const {
  std::vector<NodeId> out;
  if (has_root_) out.push_back(kRoot);
  for (NodeId i = 1; i <= node_count(); ++i) out.push_back(i);
  return out;
}

std::vector<NodeId> topo_sort(const LatentDag& dag) {
  const int slots = dag.node_count() + 1;
  std::vector<int> indegree(slots, 0);
  std::vector<bool> present(slots, false);
  for (NodeId id : dag.nodes()) {
    present[id] = true;
    indegree[id] = static_cast<int>(dag.parents(id).size());
  }

  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (NodeId id : dag.nodes()) {
    if (indegree[id] == 0) ready.push(id);
  }
  std::vector<NodeId> order;
  order.reserve(slots);
  while (!ready.empty()) {
    NodeId u = ready.top();
    ready.pop();
    order.push_back(u);
    for (NodeId v : dag.children(u)) {
      if (--indegree[v] == 0) ready.push(v);
    }
  }

  if (order.size() != dag.nodes().size()) {
    std::vector<bool> remaining(slots, false);
    for (NodeId id : dag.nodes()) remaining[id] = indegree[id] > 0;
    Edge e = find_cycle_edge(dag, remaining);
    throw CycleError(e, fmt::format("graph contains a cycle through edge {}>{}", e.parent, e.child));
  }
  return order;
}

LatentDag add_virtual_root(const LatentDag& dag) {
  if (dag.has_root()) throw GraphError("graph already has a virtual root");
  LatentDag out = dag;
  out.has_root_ = true;
  for (NodeId id = 1; id <= dag.node_count(); ++id) {
    if (dag.parents(id).empty()) {
      out.children_[kRoot].push_back(id);
      out.parents_[id].push_back(kRoot);
    }
  }
  return out;
}

std::vector<NodeId> descendants(const LatentDag& dag, NodeId id) {
  std::vector<bool> seen(dag.node_count() + 1, false);
  std::vector<NodeId> stack(dag.children(id).begin(), dag.children(id).end());
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    if (seen[u]) continue;
    seen[u] = true;
    for (NodeId v : dag.children(u)) stack.push_back(v);
  }
  std::vector<NodeId> out;
  for (NodeId u = 0; u < static_cast<NodeId>(seen.size()); ++u) {
    if (seen[u]) out.push_back(u);
  }
  return out;
}

std::vector<Edge> parse_edges(std::string_view text) {
  std::vector<Edge> edges;
  text = trim(text);
  if (text.empty()) return edges;
  while (true) {
    const auto comma = text.find(',');
    std::string_view item = trim(text.substr(0, comma));
    const auto arrow = item.find('>');
    if (arrow == std::string_view::npos) {
      throw GraphError(fmt::format("edge '{}' is not of the form parent>child", item));
    }
    edges.push_back({parse_id(item.substr(0, arrow)), parse_id(item.substr(arrow + 1))});
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return edges;
}

std::string format_edges(const std::vector<Edge>& edges) {
  std::string out;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (k) out += ',';
    out += fmt::format("{}>{}", edges[k].parent, edges[k].child);
  }
  return out;
}

LatentDag make_chain(int n, int dim) {
  std::vector<Edge> edges;
  for (NodeId i = 1; i < n; ++i) edges.push_back({i, i + 1});
  return LatentDag(std::vector<int>(n, dim), edges);
}

LatentDag make_edgeless(int n, int dim) { return LatentDag(std::vector<int>(n, dim), {}); }

LatentDag make_complete(const std::vector<int>& dims) {
  std::vector<Edge> edges;
  const int n = static_cast<int>(dims.size());
  for (NodeId i = 1; i <= n; ++i) {
    for (NodeId j = i + 1; j <= n; ++j) edges.push_back({i, j});
  }
  return LatentDag(dims, edges);
}

}  // namespace savi
