#include "signet/lowrank.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "signet/linalg.hpp"
#include "signet/parallel.hpp"
#include "signet/sparse.hpp"

namespace signet {

namespace {

void check_rank(const SignedGraph& g, int k) {
  if (k < 1) throw Error("rank k must be at least 1");
  if (static_cast<std::size_t>(k) > g.num_nodes()) throw Error("rank k exceeds the number of nodes");
  if (g.num_arcs() == 0) throw Error("observed set is empty");
}

// Source node of every arc in CSR order.
std::vector<NodeId> arc_sources(const SignedGraph& g) {
  std::vector<NodeId> src(g.num_arcs());
  const auto off = g.out_offsets();
  for (NodeId u = 0; u < g.num_nodes(); ++u)
    for (std::size_t p = off[u]; p < off[u + 1]; ++p) src[p] = u;
  return src;
}

FactorPair random_factors(NodeId n, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double r = 1.0 / std::sqrt(static_cast<double>(k));
  std::uniform_real_distribution<double> u(-r, r);
  FactorPair f;
  f.w.resize(n, k);
  f.h.resize(n, k);
  for (Eigen::Index i = 0; i < f.w.size(); ++i) f.w.data()[i] = u(rng);
  for (Eigen::Index i = 0; i < f.h.size(); ++i) f.h.data()[i] = u(rng);
  return f;
}

// Ridge solve for every row of `target` against the rows of `other` listed
// in its adjacency (out-arcs when rows index W, in-arcs when they index H).
void als_half_sweep(const SignedGraph& g, bool rows_are_sources, const DenseFactor& other, DenseFactor& target,
                    double lambda) {
  const auto k = other.cols();
  const NodeId n = g.num_nodes();
  constexpr NodeId chunk = 256;
  const std::size_t chunks = (n + chunk - 1) / chunk;
  parallel_for(chunks, [&](std::size_t c) {
    Eigen::MatrixXd gram(k, k), hn;
    Eigen::VectorXd rhs(k), a;
    const NodeId end = std::min<NodeId>(n, static_cast<NodeId>((c + 1) * chunk));
    for (NodeId i = static_cast<NodeId>(c * chunk); i < end; ++i) {
      const auto nbrs = rows_are_sources ? g.out_neighbors(i) : g.in_neighbors(i);
      const auto signs = rows_are_sources ? g.out_signs(i) : g.in_signs(i);
      if (nbrs.empty()) {
        target.row(i).setZero();
        continue;
      }
      const auto d = static_cast<Eigen::Index>(nbrs.size());
      hn.resize(d, k);
      a.resize(d);
      for (Eigen::Index e = 0; e < d; ++e) {
        hn.row(e) = other.row(nbrs[e]);
        a[e] = signs[e];
      }
      gram.noalias() = hn.transpose() * hn;
      gram.diagonal().array() += lambda;
      rhs.noalias() = hn.transpose() * a;
      target.row(i) = gram.llt().solve(rhs).transpose();
    }
  });
}

}  // namespace

double loss_value(LossKind kind, double x, double y) {
  switch (kind) {
    case LossKind::squared:
      return (x - y) * (x - y);
    case LossKind::sigmoid:
      return 1.0 / (1.0 + std::exp(x * y));
    case LossKind::square_hinge: {
      const double m = std::max(0.0, 1.0 - x * y);
      return m * m;
    }
  }
  return 0.0;
}

double loss_derivative(LossKind kind, double x, double y) {
  switch (kind) {
    case LossKind::squared:
      return -2.0 * (x - y);
    case LossKind::sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(x * y));
      return -x * s * (1.0 - s);
    }
    case LossKind::square_hinge:
      return -2.0 * x * std::max(0.0, 1.0 - x * y);
  }
  return 0.0;
}

SvpResult svp_complete(const SignedGraph& g, const SvpConfig& cfg) {
  check_rank(g, cfg.rank);
  if (cfg.tol <= 0.0) throw Error("svp: tolerance must be positive");
  if (cfg.max_iter < 1) throw Error("svp: max_iter must be at least 1");
  const NodeId n = g.num_nodes();
  const double omega = static_cast<double>(g.num_arcs());
  const double eta = cfg.step ? *cfg.step : static_cast<double>(n) * static_cast<double>(n) / (2.0 * omega);
  if (!(eta > 0.0)) throw Error("svp: step size must be positive");

  const auto src = arc_sources(g);
  const auto dst = g.out_targets();
  const auto sgn = g.arc_signs();
  SparseMatrix resid = adjacency_matrix(g);
  for (auto& v : resid.values) v = -v;

  SvpResult out;
  out.factors.w = DenseFactor::Zero(n, 0);
  out.factors.h = DenseFactor::Zero(n, 0);
  for (int t = 0;; ++t) {
    double r2 = 0.0;
    for (double v : resid.values) r2 += v * v;
    out.residual.push_back(r2);
    out.iterations = t;
    if (r2 > 10.0 * out.residual.front())
      throw ConvergenceError("svp: step size too large (residual grew tenfold by iteration " + std::to_string(t) + ")",
                             r2);
    if (r2 <= cfg.tol) {
      out.converged = true;
      break;
    }
    if (t == cfg.max_iter) break;

    const DenseFactor& w = out.factors.w;
    const DenseFactor& h = out.factors.h;
    LinearOperator op;
    op.rows = op.cols = n;
    op.apply = [&](std::span<const double> x, std::span<double> y) {
      spmv(resid, x, y);
      Eigen::Map<Eigen::VectorXd> ym(y.data(), static_cast<Eigen::Index>(y.size()));
      ym *= -eta;
      if (w.cols() > 0) {
        Eigen::Map<const Eigen::VectorXd> xm(x.data(), static_cast<Eigen::Index>(x.size()));
        ym.noalias() += w * (h.transpose() * xm);
      }
    };
    op.apply_transpose = [&](std::span<const double> x, std::span<double> y) {
      spmv_transpose(resid, x, y);
      Eigen::Map<Eigen::VectorXd> ym(y.data(), static_cast<Eigen::Index>(y.size()));
      ym *= -eta;
      if (w.cols() > 0) {
        Eigen::Map<const Eigen::VectorXd> xm(x.data(), static_cast<Eigen::Index>(x.size()));
        ym.noalias() += h * (w.transpose() * xm);
      }
    };
    EigOptions opts;
    opts.tol = cfg.svd_tol;
    opts.seed = cfg.seed + static_cast<std::uint64_t>(t);
    SvdResult svd;
    try {
      svd = topk_svd(op, static_cast<std::size_t>(cfg.rank), opts);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("svp: truncated SVD did not converge at iteration " + std::to_string(t + 1) + ": " +
                                 e.what(),
                             e.achieved());
    }
    DenseFactor nw = svd.u * svd.sigma.asDiagonal();
    out.factors.w = std::move(nw);
    out.factors.h = svd.v;
    for (std::size_t p = 0; p < resid.values.size(); ++p)
      resid.values[p] = out.factors.score(src[p], dst[p]) - sgn[p];
  }
  return out;
}

double mf_objective(const SignedGraph& g, const FactorPair& f, double lambda, LossKind loss) {
  const auto off = g.out_offsets();
  const auto dst = g.out_targets();
  const auto sgn = g.arc_signs();
  double total = 0.0;
  for (NodeId u = 0; u < g.num_nodes(); ++u)
    for (std::size_t p = off[u]; p < off[u + 1]; ++p) total += loss_value(loss, sgn[p], f.score(u, dst[p]));
  return total + lambda * (f.w.squaredNorm() + f.h.squaredNorm());
}

MfResult mf_als(const SignedGraph& g, const AlsConfig& cfg) {
  check_rank(g, cfg.rank);
  if (!(cfg.lambda > 0.0)) throw Error("als: lambda must be positive");
  if (cfg.sweeps < 0) throw Error("als: sweeps must be non-negative");
  MfResult out;
  out.factors = random_factors(g.num_nodes(), cfg.rank, cfg.seed);
  if (cfg.record_objective) out.objective.push_back(mf_objective(g, out.factors, cfg.lambda, LossKind::squared));
  for (int s = 0; s < cfg.sweeps; ++s) {
    als_half_sweep(g, true, out.factors.h, out.factors.w, cfg.lambda);
    if (cfg.record_objective) out.objective.push_back(mf_objective(g, out.factors, cfg.lambda, LossKind::squared));
    als_half_sweep(g, false, out.factors.w, out.factors.h, cfg.lambda);
    if (cfg.record_objective) out.objective.push_back(mf_objective(g, out.factors, cfg.lambda, LossKind::squared));
  }
  return out;
}

MfResult mf_sgd(const SignedGraph& g, const SgdConfig& cfg) {
  check_rank(g, cfg.rank);
  if (cfg.lambda < 0.0) throw Error("sgd: lambda must be non-negative");
  if (!(cfg.step > 0.0)) throw Error("sgd: step size must be positive");
  if (cfg.epochs < 0) throw Error("sgd: epochs must be non-negative");
  MfResult out;
  FactorPair& f = out.factors;
  f = random_factors(g.num_nodes(), cfg.rank, cfg.seed);
  const double initial = mf_objective(g, f, cfg.lambda, cfg.loss);
  out.objective.push_back(initial);

  const auto src = arc_sources(g);
  const auto dst = g.out_targets();
  const auto sgn = g.arc_signs();
  std::vector<std::size_t> order(g.num_arcs());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed ^ 0x5bd1e995ULL);
  Eigen::RowVectorXd wi, hj;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double eta = cfg.step / std::sqrt(static_cast<double>(epoch));
    for (std::size_t p : order) {
      const NodeId i = src[p], j = dst[p];
      wi = f.w.row(i);
      hj = f.h.row(j);
      const double d = loss_derivative(cfg.loss, sgn[p], wi.dot(hj));
      f.w.row(i) -= eta * (d * hj + cfg.lambda * wi);
      f.h.row(j) -= eta * (d * wi + cfg.lambda * hj);
    }
    const double obj = mf_objective(g, f, cfg.lambda, cfg.loss);
    out.objective.push_back(obj);
    if (!std::isfinite(obj) || obj > 10.0 * initial)
      throw ConvergenceError("sgd: step size too large (objective " + std::to_string(obj) + " after epoch " +
                                 std::to_string(epoch) + ", initial " + std::to_string(initial) + ")",
                             obj);
  }
  return out;
}

Sign predict_lr(const FactorPair& f, EdgeQuery q) {
  if (q.i >= f.num_nodes() || q.j >= f.num_nodes()) throw Error("predict_lr: node id out of range");
  return sign_of(f.score(q.i, q.j));
}

double relative_error_omega(const FactorPair& f, const SignedGraph& g) {
  if (g.num_arcs() == 0) throw Error("err_omega: observed set is empty");
  const auto off = g.out_offsets();
  const auto dst = g.out_targets();
  const auto sgn = g.arc_signs();
  double num = 0.0;
  for (NodeId u = 0; u < g.num_nodes(); ++u)
    for (std::size_t p = off[u]; p < off[u + 1]; ++p) {
      const double r = f.score(u, dst[p]) - sgn[p];
      num += r * r;
    }
  return std::sqrt(num / static_cast<double>(g.num_arcs()));
}

double relative_error_omega(const Eigen::MatrixXd& x, const SignedGraph& g) {
  if (g.num_arcs() == 0) throw Error("err_omega: observed set is empty");
  if (static_cast<std::size_t>(x.rows()) != g.num_nodes() || x.rows() != x.cols())
    throw Error("err_omega: matrix size mismatch");
  const auto off = g.out_offsets();
  const auto dst = g.out_targets();
  const auto sgn = g.arc_signs();
  double num = 0.0;
  for (NodeId u = 0; u < g.num_nodes(); ++u)
    for (std::size_t p = off[u]; p < off[u + 1]; ++p) {
      const double r = x(u, dst[p]) - sgn[p];
      num += r * r;
    }
  return std::sqrt(num / static_cast<double>(g.num_arcs()));
}

void write_factors(const FactorPair& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  const std::uint64_t n = static_cast<std::uint64_t>(f.w.rows());
  const std::uint64_t k = static_cast<std::uint64_t>(f.w.cols());
  if (f.h.rows() != f.w.rows() || f.h.cols() != f.w.cols()) throw Error("write_factors: W and H shapes differ");
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&k), sizeof k);
  out.write(reinterpret_cast<const char*>(f.w.data()), static_cast<std::streamsize>(n * k * sizeof(double)));
  out.write(reinterpret_cast<const char*>(f.h.data()), static_cast<std::streamsize>(n * k * sizeof(double)));
  if (!out) throw Error("write failed: " + path);
}

FactorPair read_factors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::uint64_t n = 0, k = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&k), sizeof k);
  if (!in || n == 0 || k == 0 || n > (1ULL << 32) || k > 4096) throw ParseError(path + ": bad factor header");
  FactorPair f;
  f.w.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  f.h.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  in.read(reinterpret_cast<char*>(f.w.data()), static_cast<std::streamsize>(n * k * sizeof(double)));
  in.read(reinterpret_cast<char*>(f.h.data()), static_cast<std::streamsize>(n * k * sizeof(double)));
  if (!in) throw ParseError(path + ": truncated factor file");
  return f;
}

}  // namespace signet
