#include "signet/clustering.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "signet/linalg.hpp"

namespace signet {

namespace {

ClusterAssignment best_kmeans(const DenseFactor& rows, int k, std::uint64_t seed, int restarts) {
  if (restarts < 1) throw Error("kmeans restarts must be at least 1");
  KMeansResult best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    auto res = kmeans(rows, k, seed + static_cast<std::uint64_t>(r) * 7919);
    if (res.objective < best_obj) {
      best_obj = res.objective;
      best = std::move(res);
    }
  }
  return ClusterAssignment{k, std::move(best.assignment)};
}

void check_k(const SignedGraph& g, int k) {
  if (g.directed()) throw Error("clustering: graph must be undirected (symmetrize first)");
  if (k < 2) throw Error("clustering: k must be at least 2");
  if (static_cast<std::size_t>(k) > g.num_nodes()) throw Error("clustering: k exceeds the number of nodes");
}

std::uint64_t pairs(std::uint64_t c) { return c * (c - (c > 0)) / 2; }

}  // namespace

SparseMatrix signed_laplacian(const SignedGraph& g) {
  const NodeId n = g.num_nodes();
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(g.num_arcs() + n);
  for (NodeId u = 0; u < n; ++u) {
    const auto nb = g.out_neighbors(u);
    const auto sg = g.out_signs(u);
    t.push_back({u, u, static_cast<double>(nb.size())});
    for (std::size_t e = 0; e < nb.size(); ++e) t.push_back({u, nb[e], -static_cast<double>(sg[e])});
  }
  return SparseMatrix::from_triplets(n, n, std::move(t), true);
}

ClusterAssignment cluster_spectral_signed(const SignedGraph& g, int k, std::uint64_t seed, SpectrumEnd end,
                                          int restarts) {
  check_k(g, k);
  const SparseMatrix lap = signed_laplacian(g);
  EigOptions opts;
  opts.seed = seed;
  const auto eig = topk_eig_sym(make_operator(lap), static_cast<std::size_t>(k),
                                end == SpectrumEnd::smallest ? EigenTarget::smallest_algebraic
                                                             : EigenTarget::largest_algebraic,
                                opts);
  return best_kmeans(eig.vectors, k, seed, restarts);
}

ClusterAssignment mc_cluster(const SignedGraph& g, int k, std::uint64_t seed, const McClusterOptions& opts) {
  check_k(g, k);
  FactorPair f;
  if (opts.method == CompletionMethod::svp) {
    SvpConfig cfg = opts.svp;
    cfg.rank = k;
    cfg.seed = seed;
    f = svp_complete(g, cfg).factors;
  } else {
    AlsConfig cfg = opts.als;
    cfg.rank = k;
    cfg.seed = seed;
    cfg.record_objective = false;
    f = mf_als(g, cfg).factors;
  }
  const NodeId n = g.num_nodes();
  LinearOperator op;
  op.rows = op.cols = n;
  op.apply = [&f](std::span<const double> x, std::span<double> y) {
    Eigen::Map<const Eigen::VectorXd> xm(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::Map<Eigen::VectorXd> ym(y.data(), static_cast<Eigen::Index>(y.size()));
    ym.noalias() = 0.5 * (f.w * (f.h.transpose() * xm));
    ym.noalias() += 0.5 * (f.h * (f.w.transpose() * xm));
  };
  op.apply_transpose = op.apply;
  EigOptions eo;
  eo.seed = seed;
  eo.tol = 1e-10;
  const auto eig = topk_eig_sym(op, static_cast<std::size_t>(k), EigenTarget::largest_magnitude, eo);
  return best_kmeans(eig.vectors, k, seed, opts.restarts);
}

std::uint64_t agreement(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error("agreement: assignments have different sizes");
  std::map<int, std::uint64_t> ca, cb;
  std::map<std::pair<int, int>, std::uint64_t> cab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++ca[a[i]];
    ++cb[b[i]];
    ++cab[{a[i], b[i]}];
  }
  std::uint64_t same_a = 0, same_b = 0, same_both = 0;
  for (const auto& [_, c] : ca) same_a += pairs(c);
  for (const auto& [_, c] : cb) same_b += pairs(c);
  for (const auto& [_, c] : cab) same_both += pairs(c);
  const std::uint64_t total = pairs(a.size());
  return total - same_a - same_b + 2 * same_both;
}

std::uint64_t agreement(const ClusterAssignment& a, const GroundTruth& gt) {
  if (a.cluster.size() != gt.n) throw Error("agreement: assignment size does not match ground truth");
  return agreement(std::span<const int>(a.cluster), std::span<const int>(gt.assignment));
}

}  // namespace signet
