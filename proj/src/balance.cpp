#include "signet/balance.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>

#include "signet/parallel.hpp"

namespace signet {

namespace {

void require_undirected(const SignedGraph& g, const char* what) {
  if (g.directed()) throw Error(std::string(what) + ": graph must be undirected (symmetrize first)");
}

// Index of the unordered wedge-type pair in the 4-cycle table. Wedge types:
// 0 (+,+), 1 (-,+), 2 (+,-), 3 (-,-) as (sign at the low end, sign at the far end).
int square_pattern(int t1, int t2) {
  const auto neg = [](int t) { return (t & 1) + (t >> 1); };
  const int k = neg(t1) + neg(t2);
  if (k == 0) return 0;
  if (k == 1) return 1;
  if (k == 3) return 4;
  if (k == 4) return 5;
  return (t1 == 1 && t2 == 2) || (t1 == 2 && t2 == 1) ? 3 : 2;
}

}  // namespace

const std::array<std::string, 4>& PatternCensus::triangle_names() {
  static const std::array<std::string, 4> n{"+++", "++-", "+--", "---"};
  return n;
}

const std::array<std::string, 6>& PatternCensus::square_names() {
  static const std::array<std::string, 6> n{"++++", "+++-", "++--", "+-+-", "+---", "----"};
  return n;
}

BalanceResult is_balanced(const SignedGraph& g) {
  require_undirected(g, "is_balanced");
  const NodeId n = g.num_nodes();
  BalanceResult r;
  r.side.assign(n, -1);
  std::vector<NodeId> parent(n, 0);
  std::vector<std::size_t> depth(n, 0);
  std::vector<std::pair<NodeId, std::size_t>> stack;
  for (NodeId root = 0; root < n; ++root) {
    if (r.side[root] >= 0) continue;
    r.side[root] = 0;
    parent[root] = root;
    stack.push_back({root, 0});
    while (!stack.empty()) {
      auto& [u, pos] = stack.back();
      const auto nb = g.out_neighbors(u);
      if (pos == nb.size()) {
        stack.pop_back();
        continue;
      }
      const NodeId w = nb[pos];
      const int want = r.side[u] ^ (g.out_signs(u)[pos] < 0 ? 1 : 0);
      ++pos;
      if (r.side[w] < 0) {
        r.side[w] = want;
        parent[w] = u;
        depth[w] = depth[u] + 1;
        stack.push_back({w, 0});
      } else if (r.side[w] != want) {
        // Tree paths from u and w up to their common ancestor plus edge (u, w).
        NodeId a = u, b = w;
        std::vector<NodeId> up, down;
        while (depth[a] > depth[b]) up.push_back(a), a = parent[a];
        while (depth[b] > depth[a]) down.push_back(b), b = parent[b];
        while (a != b) {
          up.push_back(a);
          down.push_back(b);
          a = parent[a];
          b = parent[b];
        }
        up.push_back(a);
        r.cycle = std::move(up);
        r.cycle.insert(r.cycle.end(), down.rbegin(), down.rend());
        r.balanced = false;
        r.side.clear();
        return r;
      }
    }
  }
  return r;
}

PatternCensus census(const SignedGraph& g, std::uint64_t max_wedges) {
  require_undirected(g, "census");
  const NodeId n = g.num_nodes();
  PatternCensus c;

  if (max_wedges > 0) {
    std::uint64_t work = 0;
    for (NodeId m = 0; m < n; ++m)
      for (NodeId a : g.out_neighbors(m))
        if (a > m) work += g.out_degree(a);
    if (work > max_wedges)
      throw Error("census: 4-cycle scan needs " + std::to_string(work) + " wedge steps, above the cap of " +
                  std::to_string(max_wedges));
  }

  std::vector<PatternCensus> part(4 * static_cast<std::size_t>(thread_count()));
  std::atomic<std::size_t> next_part{0};
  parallel_ranges(n, 64, [&](std::size_t begin, std::size_t end) {
    PatternCensus& pc = part[next_part.fetch_add(1)];
    std::vector<std::array<std::uint64_t, 4>> wedge(n);
    std::vector<NodeId> touched;
    for (auto m = static_cast<NodeId>(begin); m < end; ++m) {
      const auto nm = g.out_neighbors(m);
      const auto sm = g.out_signs(m);
      for (std::size_t x = 0; x < nm.size(); ++x) {
        const NodeId a = nm[x];
        if (a <= m) continue;
        const auto na = g.out_neighbors(a);
        const auto sa = g.out_signs(a);
        // Triangles m < a < w by merging the higher neighbours of m and a.
        std::size_t p = x + 1, q = 0;
        while (p < nm.size() && q < na.size()) {
          if (nm[p] < na[q]) {
            ++p;
          } else if (na[q] < nm[p]) {
            ++q;
          } else {
            if (na[q] > a) {
              const int neg = (sm[x] < 0) + (sm[p] < 0) + (sa[q] < 0);
              ++pc.triangles[neg];
            }
            ++p;
            ++q;
          }
        }
        for (std::size_t y = 0; y < na.size(); ++y) {
          const NodeId v = na[y];
          if (v <= m) continue;
          const int type = (sm[x] < 0 ? 1 : 0) | (sa[y] < 0 ? 2 : 0);
          auto& slot = wedge[v];
          if (slot[0] + slot[1] + slot[2] + slot[3] == 0) touched.push_back(v);
          ++slot[type];
        }
      }
      for (NodeId v : touched) {
        auto& w = wedge[v];
        for (int t1 = 0; t1 < 4; ++t1) {
          if (w[t1] >= 2) pc.squares[square_pattern(t1, t1)] += w[t1] * (w[t1] - 1) / 2;
          for (int t2 = t1 + 1; t2 < 4; ++t2) pc.squares[square_pattern(t1, t2)] += w[t1] * w[t2];
        }
        w = {};
      }
      touched.clear();
    }
  });
  for (const auto& pc : part) {
    for (int i = 0; i < 4; ++i) c.triangles[i] += pc.triangles[i];
    for (int i = 0; i < 6; ++i) c.squares[i] += pc.squares[i];
  }
  for (auto t : c.triangles) c.total3 += t;
  for (auto s : c.squares) c.total4 += s;
  return c;
}

SurpriseReport surprise(const SignedGraph& g, int shuffles, std::uint64_t seed, std::uint64_t max_wedges) {
  require_undirected(g, "surprise");
  if (shuffles < 1) throw Error("surprise: shuffle count must be at least 1");
  const PatternCensus obs = census(g, max_wedges);
  if (obs.total3 == 0 && obs.total4 == 0) throw Error("surprise: graph has no triangles and no 4-cycles");

  std::vector<Sign> base(g.num_edges());
  for (std::size_t e = 0; e < base.size(); ++e) base[e] = g.edges()[e].sign;
  std::vector<PatternCensus> shuffled(static_cast<std::size_t>(shuffles));
  parallel_for(shuffled.size(), [&](std::size_t r) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * (r + 1));
    auto signs = base;
    std::shuffle(signs.begin(), signs.end(), rng);
    shuffled[r] = census(with_signs(g, signs), 0);
  });

  SurpriseReport rep;
  rep.shuffles = shuffles;
  rep.seed = seed;
  const auto add = [&](int order, const std::string& name, std::uint64_t count, double total, double p0) {
    SurpriseRow row;
    row.order = order;
    row.pattern = name;
    row.count = count;
    row.p = total > 0 ? static_cast<double>(count) / total : 0.0;
    row.p0 = p0;
    const double num = total * (row.p - row.p0);
    const double den = std::sqrt(total * row.p0 * (1.0 - row.p0));
    row.s = num == 0.0 ? 0.0 : num / den;
    rep.rows.push_back(row);
  };
  const auto mean_p = [&](auto pick) {
    double s = 0.0;
    for (const auto& pc : shuffled) s += pick(pc);
    return s / static_cast<double>(shuffled.size());
  };
  const auto frac = [](std::uint64_t k, std::uint64_t t) { return t ? static_cast<double>(k) / t : 0.0; };

  if (obs.total3 > 0) {
    const double d = static_cast<double>(obs.total3);
    for (int i = 0; i < 4; ++i)
      add(3, PatternCensus::triangle_names()[i], obs.triangles[i], d,
          mean_p([&](const PatternCensus& pc) { return frac(pc.triangles[i], pc.total3); }));
    add(3, "balanced", obs.triangles[0] + obs.triangles[2], d, mean_p([&](const PatternCensus& pc) {
          return frac(pc.triangles[0] + pc.triangles[2], pc.total3);
        }));
  }
  if (obs.total4 > 0) {
    const double d = static_cast<double>(obs.total4);
    for (int i = 0; i < 6; ++i)
      add(4, PatternCensus::square_names()[i], obs.squares[i], d,
          mean_p([&](const PatternCensus& pc) { return frac(pc.squares[i], pc.total4); }));
    const auto bal = [](const PatternCensus& pc) {
      return pc.squares[0] + pc.squares[2] + pc.squares[3] + pc.squares[5];
    };
    add(4, "balanced", bal(obs), d, mean_p([&](const PatternCensus& pc) { return frac(bal(pc), pc.total4); }));
  }
  return rep;
}

}  // namespace signet
