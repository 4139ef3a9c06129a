#pragma once

#include <compare>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bethe {

/// Undirected edge with u < v.
struct Edge {
  int u = 0;
  int v = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Simple undirected graph. Edges are stored with u < v and sorted
/// lexicographically; that order is the index contract for every
/// edge-aligned vector elsewhere in the library.
class Graph {
 public:
  Graph() = default;

  /// Canonicalizes (swaps to u < v, sorts) and validates: rejects self-loops,
  /// duplicate edges and out-of-range endpoints.
  static Graph from_edges(int num_nodes, std::vector<Edge> edges);

  int num_nodes() const noexcept { return num_nodes_; }
  int num_edges() const noexcept { return static_cast<int>(edges_.size()); }

  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(int e) const { return edges_.at(static_cast<std::size_t>(e)); }

  int degree(int i) const { return degrees_.at(static_cast<std::size_t>(i)); }
  std::span<const int> degrees() const noexcept { return degrees_; }

  /// Neighbor node ids of i, in increasing order.
  std::span<const int> neighbors(int i) const;
  /// Edge ids incident to i, aligned with neighbors(i).
  std::span<const int> incident_edges(int i) const;

  /// Edge id of {a, b}, or -1.
  int find_edge(int a, int b) const;

  bool is_connected() const;
  /// Connected and N_E = N_V - 1.
  bool is_tree() const;

  bool operator==(const Graph& other) const {
    return num_nodes_ == other.num_nodes_ && edges_ == other.edges_;
  }

 private:
  int num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> degrees_;
  // CSR adjacency
  std::vector<int> offsets_;
  std::vector<int> adj_nodes_;
  std::vector<int> adj_edges_;
};

/// rows x cols grid with wrap-around in both directions; rows, cols >= 3.
Graph torus(int rows, int cols);
/// n >= 3.
Graph cycle(int n);
/// Path on n >= 2 nodes.
Graph chain(int n);
/// n >= 2.
Graph complete(int n);

/// Parses `{"num_nodes": N, "edges": [[i, j], ...]}`. `source` names the input
/// in error messages.
Graph parse_graph(std::string_view text, std::string_view source = "<graph>");
Graph load_graph(const std::string& path);
std::string graph_to_json(const Graph& g);

/// `torus:RxC`, `cycle:N`, `chain:N`, `complete:N` or `file:PATH`.
Graph graph_from_spec(std::string_view spec);

}  // namespace bethe
