#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace savi {

/// Dense node index. User latents occupy [1, N]; 0 is the virtual root.
using NodeId = int;

inline constexpr NodeId kRoot = 0;

struct Edge {
  NodeId parent;
  NodeId child;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class CycleError : public std::runtime_error {
 public:
  CycleError(Edge edge, const std::string& what) : std::runtime_error(what), edge_(edge) {}
  Edge edge() const { return edge_; }

 private:
  Edge edge_;
};

class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/**
 * Dependency graph over latent parameter blocks.
 *
 * Edge (i, j) means the posterior of latent j conditions on latent i. Nodes are
 * numbered 1..N; slot 0 exists only after add_virtual_root() and carries no
 * value (dimension 0). Immutable after construction.
 */
class LatentDag {
 public:
  LatentDag() = default;

  /// `dims[k]` is the dimension of node k + 1.
  LatentDag(std::vector<int> dims, std::vector<Edge> edges);

  /// Number of user latents N (excludes the virtual root).
  int node_count() const { return static_cast<int>(dims_.size()) - 1; }
  bool has_root() const { return has_root_; }

  int dim(NodeId id) const;
  int total_dim() const;
  const std::vector<Edge>& edges() const { return edges_; }

  /// Ascending ids.
  const std::vector<NodeId>& children(NodeId id) const;
  const std::vector<NodeId>& parents(NodeId id) const;

  bool is_valid(NodeId id) const;
  bool has_edge(NodeId parent, NodeId child) const;

  /// User node ids 1..N, plus 0 first when the root is present.
  std::vector<NodeId> nodes() const;

 private:
  friend LatentDag add_virtual_root(const LatentDag& dag);

  std::vector<int> dims_{0};  // index 0 reserved for the root
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> children_{{}};
  std::vector<std::vector<NodeId>> parents_{{}};
  bool has_root_ = false;
};

/// Topological order with ascending-id tie breaking (Kahn's algorithm over a min-heap).
/// Throws CycleError naming one edge that lies on a directed cycle.
std::vector<NodeId> topo_sort(const LatentDag& dag);

/// Returns a copy with node 0 added as the parent of every in-degree-0 node.
LatentDag add_virtual_root(const LatentDag& dag);

/// All nodes reachable from `id` through child edges, ascending.
std::vector<NodeId> descendants(const LatentDag& dag, NodeId id);

/// Parses "1>2,2>3". Whitespace around tokens is ignored; empty input gives no edges.
std::vector<Edge> parse_edges(std::string_view text);
std::string format_edges(const std::vector<Edge>& edges);

/// Common shapes used by tests and configs.
LatentDag make_chain(int n, int dim);
LatentDag make_edgeless(int n, int dim);
/// Every earlier node is a parent of every later node.
LatentDag make_complete(const std::vector<int>& dims);

}  // namespace savi
