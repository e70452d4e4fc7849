#include "signet/hoc.hpp"

#include <algorithm>
#include <optional>
#include <utility>

#include "signet/parallel.hpp"

namespace signet {

namespace {

using SparseVec = std::vector<std::pair<NodeId, double>>;

struct Layout {
  int types = 4;  // factor alphabet size
  int p_min = 2;
  int p_max = 2;
  bool reduced = false;
  std::vector<std::size_t> offset;               // column offset per walk length p
  std::vector<std::vector<std::size_t>> column;  // reduced: code -> local column
  std::size_t width = 0;
};

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

std::size_t reverse_code(std::size_t code, int p) {
  std::size_t r = 0;
  for (int d = 0; d < p; ++d) {
    r = r * 2 + (code & 1);
    code >>= 1;
  }
  return r;
}

void check_spec(const FeatureSpec& spec) {
  if (spec.max_order < 3) throw Error("hoc: max_order must be at least 3");
  if (spec.max_order > 5 && !spec.allow_high_order)
    throw Error("hoc: max_order " + std::to_string(spec.max_order) +
                " exceeds the cost guard of 5 (set allow_high_order to override)");
  if (spec.max_order > 10) throw Error("hoc: max_order above 10 is not supported");
}

Layout make_layout(const FeatureSpec& spec) {
  check_spec(spec);
  Layout l;
  l.reduced = spec.variant == FeatureVariant::reduced;
  l.types = l.reduced ? 2 : 4;
  l.p_max = spec.max_order - 1;
  l.p_min = spec.include_all_lower_orders ? 2 : l.p_max;
  l.offset.assign(static_cast<std::size_t>(l.p_max) + 1, 0);
  l.column.resize(static_cast<std::size_t>(l.p_max) + 1);
  for (int p = l.p_min; p <= l.p_max; ++p) {
    l.offset[p] = l.width;
    const std::size_t codes = ipow(static_cast<std::size_t>(l.types), p);
    if (!l.reduced) {
      l.width += codes;
      continue;
    }
    auto& col = l.column[p];
    col.assign(codes, 0);
    std::size_t next = 0;
    for (std::size_t c = 0; c < codes; ++c) {
      const std::size_t r = reverse_code(c, p);
      if (c <= r) {
        col[c] = next;
        col[r] = next;
        ++next;
      }
    }
    l.width += next;
  }
  return l;
}

std::string factor_name(int type, bool reduced) {
  if (reduced) return type == 0 ? "A+" : "A-";
  static const char* names[] = {"A+", "A+^T", "A-", "A-^T"};
  return names[type];
}

std::string describe(std::size_t code, int p, int types, bool reduced) {
  std::vector<int> f(static_cast<std::size_t>(p));
  for (int d = p - 1; d >= 0; --d) {
    f[d] = static_cast<int>(code % types);
    code /= types;
  }
  std::string s;
  for (int d = 0; d < p; ++d) {
    if (d) s += ' ';
    s += factor_name(f[d], reduced);
  }
  return s;
}

struct Mask {
  bool active = false;
  bool both = false;
  NodeId a = 0, b = 0;
  bool hit(NodeId u, NodeId w) const {
    return active && ((u == a && w == b) || (both && u == b && w == a));
  }
};

struct Workspace {
  explicit Workspace(std::size_t n) : acc(n, 0.0), seen(n, 0) {}
  std::vector<double> acc;
  std::vector<char> seen;
  std::vector<NodeId> touched;
  std::vector<std::vector<SparseVec>> left, right;

  void add(NodeId v, double x) {
    if (!seen[v]) {
      seen[v] = 1;
      touched.push_back(v);
    }
    acc[v] += x;
  }
  void flush(SparseVec& out) {
    out.clear();
    std::sort(touched.begin(), touched.end());
    for (NodeId v : touched) {
      out.emplace_back(v, acc[v]);
      acc[v] = 0.0;
      seen[v] = 0;
    }
    touched.clear();
  }
};

class Extractor {
public:
  Extractor(const SignedGraph& g, const Layout& layout) : g_(g), l_(layout) {}

  void row(EdgeQuery q, const Mask& mask, Workspace& ws, double* out) const {
    const int a_max = (l_.p_max + 1) / 2;
    const int b_max = l_.p_max / 2;
    grow(ws.left, q.i, a_max, mask, ws, true);
    grow(ws.right, q.j, b_max, mask, ws, false);
    std::fill(out, out + l_.width, 0.0);
    for (int p = l_.p_min; p <= l_.p_max; ++p) {
      const int a = (p + 1) / 2;
      const int b = p - a;
      const auto& lv = ws.left[a];
      const auto& rv = ws.right[b];
      for (std::size_t cl = 0; cl < lv.size(); ++cl) {
        if (lv[cl].empty()) continue;
        for (const auto& [v, x] : lv[cl]) ws.acc[v] = x;
        for (std::size_t cr = 0; cr < rv.size(); ++cr) {
          double dot = 0.0;
          for (const auto& [v, y] : rv[cr]) dot += ws.acc[v] * y;
          if (dot == 0.0) continue;
          const std::size_t code = cl * rv.size() + cr;
          if (!l_.reduced) {
            out[l_.offset[p] + code] = dot;
          } else {
            // Palindromic patterns are their own reversal and count once.
            out[l_.offset[p] + l_.column[p][code]] += dot;
          }
        }
        for (const auto& [v, x] : lv[cl]) ws.acc[v] = 0.0;
      }
    }
  }

private:
  int sign_index(Sign s) const { return s > 0 ? 0 : 1; }

  // Left: x^T M_type. Right: M_type y. Both walk typed arcs of g.
  void step(const SparseVec& x, int type, bool left, const Mask& mask, Workspace& ws, SparseVec& out) const {
    const int want = l_.reduced ? type : type / 2;
    const bool transposed = !l_.reduced && (type % 2 == 1);
    // Left plain and right transposed follow out-arcs of the support node.
    const bool use_out = left != transposed;
    for (const auto& [u, val] : x) {
      const auto nbrs = use_out ? g_.out_neighbors(u) : g_.in_neighbors(u);
      const auto signs = use_out ? g_.out_signs(u) : g_.in_signs(u);
      for (std::size_t e = 0; e < nbrs.size(); ++e) {
        if (sign_index(signs[e]) != want) continue;
        const NodeId w = nbrs[e];
        if (use_out ? mask.hit(u, w) : mask.hit(w, u)) continue;
        ws.add(w, val);
      }
    }
    ws.flush(out);
  }

  void grow(std::vector<std::vector<SparseVec>>& levels, NodeId start, int depth, const Mask& mask, Workspace& ws,
            bool left) const {
    levels.resize(static_cast<std::size_t>(depth) + 1);
    levels[0].resize(1);
    levels[0][0].assign(1, {start, 1.0});
    const auto t = static_cast<std::size_t>(l_.types);
    for (int d = 1; d <= depth; ++d) {
      auto& prev = levels[d - 1];
      auto& cur = levels[d];
      cur.resize(prev.size() * t);
      for (std::size_t c = 0; c < prev.size(); ++c) {
        for (std::size_t type = 0; type < t; ++type) {
          // Left codes append the new factor; right codes prepend it.
          const std::size_t code = left ? c * t + type : type * prev.size() + c;
          step(prev[c], static_cast<int>(type), left, mask, ws, cur[code]);
        }
      }
    }
  }

  const SignedGraph& g_;
  const Layout& l_;
};

}  // namespace

std::vector<std::string> feature_columns(const FeatureSpec& spec) {
  const Layout l = make_layout(spec);
  std::vector<std::string> cols(l.width);
  for (int p = l.p_min; p <= l.p_max; ++p) {
    const std::size_t codes = ipow(static_cast<std::size_t>(l.types), p);
    for (std::size_t c = 0; c < codes; ++c) {
      if (!l.reduced) {
        cols[l.offset[p] + c] = describe(c, p, l.types, false);
      } else if (c <= reverse_code(c, p)) {
        cols[l.offset[p] + l.column[p][c]] = describe(c, p, l.types, true);
      }
    }
  }
  return cols;
}

FeatureMatrix extract_features(const SignedGraph& g, const FeatureSpec& spec, std::span<const EdgeQuery> queries,
                               bool mask_observed) {
  const Layout layout = make_layout(spec);
  for (const auto& q : queries) {
    if (q.i >= g.num_nodes() || q.j >= g.num_nodes()) throw Error("hoc: query node out of range");
    if (q.i == q.j) throw Error("hoc: query endpoints must differ");
  }
  std::optional<SignedGraph> sym;
  if (layout.reduced && g.directed()) sym = symmetrize(g);
  const SignedGraph& work = sym ? *sym : g;
  // Length-2 walks never traverse the query edge itself.
  const bool need_mask = mask_observed && layout.p_max >= 3;

  FeatureMatrix fm;
  fm.spec = spec;
  fm.queries.assign(queries.begin(), queries.end());
  fm.columns = feature_columns(spec);
  fm.values = DenseFactor::Zero(static_cast<Eigen::Index>(queries.size()), static_cast<Eigen::Index>(layout.width));

  const Extractor ex(work, layout);
  parallel_ranges(queries.size(), 256, [&](std::size_t begin, std::size_t end) {
    Workspace ws(work.num_nodes());
    for (std::size_t r = begin; r < end; ++r) {
      const EdgeQuery q = queries[r];
      Mask mask;
      if (need_mask && work.sign(q.i, q.j) != 0) {
        mask.active = true;
        mask.both = !work.directed();
        mask.a = q.i;
        mask.b = q.j;
      }
      ex.row(q, mask, ws, fm.values.row(static_cast<Eigen::Index>(r)).data());
    }
  });
  return fm;
}

}  // namespace signet
