#include "signet/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace signet {

namespace {

std::uint64_t pair_key(NodeId a, NodeId b) { return (std::uint64_t{a} << 32) | b; }

void sort_edges(std::vector<SignedEdge>& edges) {
  std::sort(edges.begin(), edges.end(), [](const SignedEdge& a, const SignedEdge& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
  });
}

}  // namespace

SignedGraph::SignedGraph(NodeId n, std::vector<SignedEdge> edges, bool directed, std::vector<std::string> labels)
    : n_(n), directed_(directed), labels_(std::move(labels)) {
  if (n == 0) throw Error("graph: node count must be at least 1");
  if (labels_.empty()) {
    labels_.reserve(n);
    for (NodeId u = 0; u < n; ++u) labels_.push_back(std::to_string(u));
  } else if (labels_.size() != n) {
    throw Error("graph: label table size does not match node count");
  }
  for (auto& e : edges) {
    if (e.src >= n || e.dst >= n) throw Error("graph: node id out of range");
    if (e.src == e.dst) throw Error("graph: self-loop at node " + std::to_string(e.src));
    if (e.sign != 1 && e.sign != -1) throw Error("graph: sign must be +1 or -1");
    if (!directed && e.src > e.dst) std::swap(e.src, e.dst);
  }
  sort_edges(edges);
  edges_.reserve(edges.size());
  for (const auto& e : edges) {
    if (!edges_.empty() && edges_.back().src == e.src && edges_.back().dst == e.dst) {
      if (edges_.back().sign != e.sign)
        throw Error("graph: conflicting signs for edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) + ")");
      continue;
    }
    edges_.push_back(e);
  }
  build_index();
}

void SignedGraph::build_index() {
  const std::size_t arcs = directed_ ? edges_.size() : 2 * edges_.size();
  out_offsets_.assign(n_ + 1, 0);
  for (const auto& e : edges_) {
    ++out_offsets_[e.src + 1];
    if (!directed_) ++out_offsets_[e.dst + 1];
  }
  for (NodeId u = 0; u < n_; ++u) out_offsets_[u + 1] += out_offsets_[u];
  out_targets_.resize(arcs);
  out_signs_.resize(arcs);
  out_ids_.resize(arcs);
  std::vector<std::size_t> cursor(out_offsets_.begin(), out_offsets_.end() - 1);
  auto place = [&](NodeId s, NodeId d, Sign sg, std::uint32_t id) {
    const std::size_t p = cursor[s]++;
    out_targets_[p] = d;
    out_signs_[p] = sg;
    out_ids_[p] = id;
  };
  for (std::uint32_t id = 0; id < edges_.size(); ++id) {
    const auto& e = edges_[id];
    place(e.src, e.dst, e.sign, id);
    if (!directed_) place(e.dst, e.src, e.sign, id);
  }
  // Rows are filled in edge order; undirected rows need sorting by target.
  if (!directed_) {
    std::vector<std::size_t> perm;
    for (NodeId u = 0; u < n_; ++u) {
      const std::size_t b = out_offsets_[u], len = out_offsets_[u + 1] - b;
      perm.resize(len);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::sort(perm.begin(), perm.end(), [&](std::size_t x, std::size_t y) {
        return out_targets_[b + x] < out_targets_[b + y];
      });
      std::vector<NodeId> t(len);
      std::vector<Sign> s(len);
      std::vector<std::uint32_t> ids(len);
      for (std::size_t k = 0; k < len; ++k) {
        t[k] = out_targets_[b + perm[k]];
        s[k] = out_signs_[b + perm[k]];
        ids[k] = out_ids_[b + perm[k]];
      }
      std::copy(t.begin(), t.end(), out_targets_.begin() + static_cast<std::ptrdiff_t>(b));
      std::copy(s.begin(), s.end(), out_signs_.begin() + static_cast<std::ptrdiff_t>(b));
      std::copy(ids.begin(), ids.end(), out_ids_.begin() + static_cast<std::ptrdiff_t>(b));
    }
  } else {
    in_offsets_.assign(n_ + 1, 0);
    for (const auto& e : edges_) ++in_offsets_[e.dst + 1];
    for (NodeId u = 0; u < n_; ++u) in_offsets_[u + 1] += in_offsets_[u];
    in_sources_.resize(edges_.size());
    in_signs_.resize(edges_.size());
    std::vector<std::size_t> in_cursor(in_offsets_.begin(), in_offsets_.end() - 1);
    // edges_ is sorted by src, so each in-row ends up sorted by source.
    for (const auto& e : edges_) {
      const std::size_t p = in_cursor[e.dst]++;
      in_sources_[p] = e.src;
      in_signs_[p] = e.sign;
    }
  }
  label_index_.clear();
  label_index_.reserve(labels_.size());
  for (NodeId u = 0; u < n_; ++u) {
    if (!label_index_.emplace(labels_[u], u).second) throw Error("graph: duplicate node label '" + labels_[u] + "'");
  }
}

std::size_t SignedGraph::in_degree(NodeId u) const {
  return directed_ ? in_offsets_[u + 1] - in_offsets_[u] : out_degree(u);
}

std::span<const NodeId> SignedGraph::in_neighbors(NodeId u) const {
  return directed_ ? row(in_sources_, in_offsets_, u) : out_neighbors(u);
}

std::span<const Sign> SignedGraph::in_signs(NodeId u) const {
  return directed_ ? row(in_signs_, in_offsets_, u) : out_signs(u);
}

Sign SignedGraph::sign(NodeId u, NodeId v) const {
  const auto nb = out_neighbors(u);
  const auto it = std::lower_bound(nb.begin(), nb.end(), v);
  if (it == nb.end() || *it != v) return 0;
  return out_signs(u)[static_cast<std::size_t>(it - nb.begin())];
}

std::optional<NodeId> SignedGraph::find_label(std::string_view label) const {
  const auto it = label_index_.find(std::string(label));
  if (it == label_index_.end()) return std::nullopt;
  return it->second;
}

SignedGraph parse_edgelist(std::istream& in, bool directed, const std::vector<std::string>& known_labels) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, NodeId> ids;
  auto intern = [&](const std::string& s) {
    auto [it, inserted] = ids.emplace(s, static_cast<NodeId>(labels.size()));
    if (inserted) labels.push_back(s);
    return it->second;
  };
  for (const auto& l : known_labels) intern(l);

  struct Seen {
    Sign sign;
    std::size_t line;
  };
  std::unordered_map<std::uint64_t, Seen> seen;
  std::vector<SignedEdge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string a, b, s, extra;
    if (!(ss >> a)) continue;
    if (!(ss >> b >> s) || (ss >> extra))
      throw ParseError("malformed line " + std::to_string(lineno) + ": expected 'src dst sign'");
    Sign sg;
    if (s == "1" || s == "+1") {
      sg = 1;
    } else if (s == "-1") {
      sg = -1;
    } else {
      throw ParseError("malformed line " + std::to_string(lineno) + ": sign must be 1, +1 or -1");
    }
    if (a == b) throw ParseError("self-loop at line " + std::to_string(lineno));
    NodeId u = intern(a), v = intern(b);
    NodeId ku = u, kv = v;
    if (!directed && ku > kv) std::swap(ku, kv);
    auto [it, inserted] = seen.emplace(pair_key(ku, kv), Seen{sg, lineno});
    if (!inserted) {
      if (it->second.sign != sg)
        throw ParseError("conflicting duplicate sign for edge (" + a + ", " + b + ") at line " +
                         std::to_string(lineno) + " (first seen at line " + std::to_string(it->second.line) + ")");
      continue;
    }
    edges.push_back({u, v, sg});
  }
  if (edges.empty()) throw ParseError("no edges");
  const auto n = static_cast<NodeId>(labels.size());
  return SignedGraph(n, std::move(edges), directed, std::move(labels));
}

SignedGraph load_edgelist(const std::string& path, bool directed, const std::vector<std::string>& known_labels) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open edge list '" + path + "'");
  return parse_edgelist(in, directed, known_labels);
}

void write_edgelist(const SignedGraph& g, std::ostream& out) {
  for (const auto& e : g.edges())
    out << g.label(e.src) << '\t' << g.label(e.dst) << '\t' << static_cast<int>(e.sign) << '\n';
}

void write_edgelist(const SignedGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write edge list '" + path + "'");
  write_edgelist(g, out);
}

SignedGraph symmetrize(const SignedGraph& g) {
  if (!g.directed()) return g;
  std::vector<SignedEdge> out;
  out.reserve(g.num_edges());
  for (const auto& e : g.edges()) {
    const Sign back = g.sign(e.dst, e.src);
    if (back != 0 && e.src > e.dst) continue;  // pair handled from the lower endpoint
    const int sum = e.sign + back;
    if (sum == 0) continue;
    out.push_back({std::min(e.src, e.dst), std::max(e.src, e.dst), sum > 0 ? Sign{1} : Sign{-1}});
  }
  return SignedGraph(g.num_nodes(), std::move(out), false, g.labels());
}

std::size_t embeddedness(const SignedGraph& g, EdgeQuery q) {
  if (q.i >= g.num_nodes() || q.j >= g.num_nodes()) throw Error("embeddedness: node id out of range");
  std::vector<NodeId> ua, ub;
  auto neighbours = [&](NodeId u, std::vector<NodeId>& buf) -> std::span<const NodeId> {
    if (!g.directed()) return g.out_neighbors(u);
    const auto o = g.out_neighbors(u);
    const auto i = g.in_neighbors(u);
    buf.clear();
    std::set_union(o.begin(), o.end(), i.begin(), i.end(), std::back_inserter(buf));
    return buf;
  };
  const auto a = neighbours(q.i, ua);
  const auto b = neighbours(q.j, ub);
  std::size_t count = 0;
  std::size_t x = 0, y = 0;
  while (x < a.size() && y < b.size()) {
    if (a[x] < b[y]) {
      ++x;
    } else if (a[x] > b[y]) {
      ++y;
    } else {
      ++count;
      ++x;
      ++y;
    }
  }
  return count;
}

SignedSplit split_pos_neg(const SignedGraph& g) {
  SignedSplit s;
  for (SparseMatrix* m : {&s.pos, &s.neg}) {
    m->rows = m->cols = g.num_nodes();
    m->offsets.assign(g.num_nodes() + 1, 0);
  }
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    const auto nb = g.out_neighbors(u);
    const auto sg = g.out_signs(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      SparseMatrix& m = sg[k] > 0 ? s.pos : s.neg;
      m.indices.push_back(nb[k]);
      m.values.push_back(1.0);
    }
    s.pos.offsets[u + 1] = s.pos.indices.size();
    s.neg.offsets[u + 1] = s.neg.indices.size();
  }
  return s;
}

SparseMatrix adjacency_matrix(const SignedGraph& g) {
  SparseMatrix m;
  m.rows = m.cols = g.num_nodes();
  m.offsets.assign(g.out_offsets().begin(), g.out_offsets().end());
  m.indices.assign(g.out_targets().begin(), g.out_targets().end());
  m.values.resize(g.num_arcs());
  const auto signs = g.arc_signs();
  for (std::size_t p = 0; p < signs.size(); ++p) m.values[p] = signs[p];
  return m;
}

SignedGraph remove_edges(const SignedGraph& g, std::span<const std::size_t> edge_ids) {
  std::vector<char> drop(g.num_edges(), 0);
  for (auto id : edge_ids) {
    if (id >= g.num_edges()) throw Error("remove_edges: edge id out of range");
    drop[id] = 1;
  }
  std::vector<SignedEdge> keep;
  keep.reserve(g.num_edges() - std::min(edge_ids.size(), g.num_edges()));
  for (std::size_t e = 0; e < g.num_edges(); ++e)
    if (!drop[e]) keep.push_back(g.edges()[e]);
  return SignedGraph(g.num_nodes(), std::move(keep), g.directed(), g.labels());
}

SignedGraph with_signs(const SignedGraph& g, std::span<const Sign> signs) {
  if (signs.size() != g.num_edges()) throw Error("with_signs: one sign per edge required");
  std::vector<SignedEdge> edges(g.edges().begin(), g.edges().end());
  for (std::size_t e = 0; e < edges.size(); ++e) edges[e].sign = signs[e];
  return SignedGraph(g.num_nodes(), std::move(edges), g.directed(), g.labels());
}

}  // namespace signet
