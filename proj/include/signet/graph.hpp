#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "signet/common.hpp"
#include "signet/sparse.hpp"

namespace signet {

struct SignedEdge {
  NodeId src = 0;
  NodeId dst = 0;
  Sign sign = 1;

  friend bool operator==(const SignedEdge&, const SignedEdge&) = default;
};

struct EdgeQuery {
  NodeId i = 0;
  NodeId j = 0;

  friend bool operator==(const EdgeQuery&, const EdgeQuery&) = default;
};

/// Immutable sparse signed graph.
///
/// Edges are kept in canonical order: sorted by (src, dst), and for undirected
/// graphs each edge is stored once with src < dst. The forward CSR index holds
/// every arc (both orientations of an undirected edge); the reverse index holds
/// in-arcs and coincides with the forward index when the graph is undirected.
/// Every arc carries the id of the canonical edge it came from.
class SignedGraph {
public:
  SignedGraph() = default;

  /// Validates and canonicalises `edges`. Duplicates with equal sign are
  /// merged; self-loops, out-of-range ids and conflicting duplicates throw.
  /// `labels` maps internal ids to external ids; defaults to decimal ids.
  SignedGraph(NodeId n, std::vector<SignedEdge> edges, bool directed, std::vector<std::string> labels = {});

  NodeId num_nodes() const noexcept { return n_; }
  bool directed() const noexcept { return directed_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::size_t num_arcs() const noexcept { return out_targets_.size(); }
  std::span<const SignedEdge> edges() const noexcept { return edges_; }

  std::size_t out_degree(NodeId u) const { return out_offsets_[u + 1] - out_offsets_[u]; }
  std::span<const NodeId> out_neighbors(NodeId u) const { return row(out_targets_, out_offsets_, u); }
  std::span<const Sign> out_signs(NodeId u) const { return row(out_signs_, out_offsets_, u); }
  std::span<const std::uint32_t> out_edge_ids(NodeId u) const { return row(out_ids_, out_offsets_, u); }

  std::size_t in_degree(NodeId u) const;
  std::span<const NodeId> in_neighbors(NodeId u) const;
  std::span<const Sign> in_signs(NodeId u) const;

  std::span<const std::size_t> out_offsets() const noexcept { return out_offsets_; }
  std::span<const NodeId> out_targets() const noexcept { return out_targets_; }
  std::span<const Sign> arc_signs() const noexcept { return out_signs_; }

  /// Sign of arc u -> v, or 0 when unobserved.
  Sign sign(NodeId u, NodeId v) const;

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(NodeId u) const { return labels_.at(u); }
  std::optional<NodeId> find_label(std::string_view label) const;

private:
  template <class T>
  static std::span<const T> row(const std::vector<T>& data, const std::vector<std::size_t>& off, NodeId u) {
    return std::span<const T>(data.data() + off[u], off[u + 1] - off[u]);
  }
  void build_index();

  NodeId n_ = 0;
  bool directed_ = false;
  std::vector<SignedEdge> edges_;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<NodeId> out_targets_;
  std::vector<Sign> out_signs_;
  std::vector<std::uint32_t> out_ids_;
  std::vector<std::size_t> in_offsets_{0};
  std::vector<NodeId> in_sources_;
  std::vector<Sign> in_signs_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> label_index_;
};

/// Positive and negative edge patterns as 0/1 matrices; pos - neg is the
/// signed adjacency.
struct SignedSplit {
  SparseMatrix pos;
  SparseMatrix neg;
};

/// Parses "src dst sign" lines. `known_labels` pre-registers external ids so
/// isolated nodes (e.g. from a ground-truth file) keep their position.
SignedGraph parse_edgelist(std::istream& in, bool directed, const std::vector<std::string>& known_labels = {});
SignedGraph load_edgelist(const std::string& path, bool directed,
                          const std::vector<std::string>& known_labels = {});

/// Writes "src<TAB>dst<TAB>sign" in canonical edge order using external ids.
void write_edgelist(const SignedGraph& g, std::ostream& out);
void write_edgelist(const SignedGraph& g, const std::string& path);

/// Undirected graph with entries sign(A_ij + A_ji); reciprocal arcs of
/// opposite sign cancel and are dropped.
SignedGraph symmetrize(const SignedGraph& g);

/// Number of common neighbours of i and j (any sign; either direction for directed graphs).
std::size_t embeddedness(const SignedGraph& g, EdgeQuery q);

SignedSplit split_pos_neg(const SignedGraph& g);

/// Signed adjacency as a real CSR matrix (every arc, values +-1).
SparseMatrix adjacency_matrix(const SignedGraph& g);

/// Copy of g without the canonical edges listed in `edge_ids`.
SignedGraph remove_edges(const SignedGraph& g, std::span<const std::size_t> edge_ids);

/// Same topology as g with canonical edge e given sign signs[e].
SignedGraph with_signs(const SignedGraph& g, std::span<const Sign> signs);

}  // namespace signet
