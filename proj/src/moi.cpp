#include "signet/moi.hpp"

#include <cmath>
#include <string>

#include "signet/linalg.hpp"

namespace signet {

namespace {

void check_query(const SignedGraph& g, EdgeQuery q) {
  if (q.i >= g.num_nodes() || q.j >= g.num_nodes()) throw Error("moi: node id out of range");
  if (q.i == q.j) throw Error("moi: query endpoints must differ");
}

// y = A x with entries (i, j) and (j, i) treated as zero.
void masked_spmv(const SparseMatrix& a, const std::vector<double>& x, std::vector<double>& y, const EdgeQuery* mask) {
  spmv(a, x, y);
  if (mask) {
    y[mask->i] -= a.at(mask->i, mask->j) * x[mask->j];
    y[mask->j] -= a.at(mask->j, mask->i) * x[mask->i];
  }
}

}  // namespace

MoiScorer::MoiScorer(const SignedGraph& g, MoiSpec spec) : g_(&g), spec_(spec), adj_(adjacency_matrix(g)) {
  if (g.directed()) throw Error("moi: graph must be undirected (symmetrize first)");
  if (spec_.order != kInfiniteOrder && (spec_.order < 3 || spec_.order > 10))
    throw Error("moi: order must be in 3..10 or infinite, got " + std::to_string(spec_.order));
  if (spec_.order == kInfiniteOrder && !(spec_.katz_tol > 0.0)) throw Error("katz: tolerance must be positive");
  if (spec_.beta) {
    if (!(*spec_.beta > 0.0 && *spec_.beta < 1.0)) throw Error("moi: beta must lie in (0, 1)");
    beta_ = *spec_.beta;
  } else {
    const double s = sigma();
    beta_ = s > 0.0 ? kDefaultRelativeBeta / s : kDefaultRelativeBeta;
  }
  if (spec_.order == kInfiniteOrder && beta_ * sigma() >= 1.0)
    throw Error("katz: beta = " + std::to_string(beta_) + " violates beta < 1/||A||_2 = " +
                std::to_string(1.0 / sigma()) + " (series diverges)");
}

double MoiScorer::sigma() const {
  if (sigma_ < 0.0) sigma_ = spectral_norm_est(adj_, 1e-10, 7);
  return sigma_;
}

void MoiScorer::propagate(NodeId i, const EdgeQuery* mask, std::vector<double>& out) const {
  const std::size_t n = g_->num_nodes();
  std::vector<double> x(n, 0.0), y(n, 0.0);
  x[i] = 1.0;
  out.assign(n, 0.0);
  if (spec_.order != kInfiniteOrder) {
    // Term for cycle length t uses power t-1, weighted beta^(t-1).
    double weight = beta_;
    for (int power = 1; power <= spec_.order - 1; ++power) {
      masked_spmv(adj_, x, y, mask);
      std::swap(x, y);
      if (power >= 2)
        for (std::size_t v = 0; v < n; ++v) out[v] += weight * x[v];
      weight *= beta_;
    }
    return;
  }
  // Katz: x holds (beta A)^p e_i. Removing one symmetric +-1 pair can raise the
  // norm by at most 1, which the tail bound accounts for when it stays < 1.
  double rho = beta_ * sigma() * (1.0 + 1e-8);
  if (mask && beta_ * (sigma() + 1.0) < 1.0) rho = beta_ * (sigma() + 1.0);
  double tail = rho;  // rho^p
  for (int power = 1; power < 100000; ++power) {
    masked_spmv(adj_, x, y, mask);
    for (std::size_t v = 0; v < n; ++v) x[v] = beta_ * y[v];
    if (power >= 2)
      for (std::size_t v = 0; v < n; ++v) out[v] += x[v];
    tail *= rho;
    if (power >= 2 && tail / (1.0 - rho) < spec_.katz_tol) return;
  }
}

double MoiScorer::score(EdgeQuery q, bool mask_edge) const {
  check_query(*g_, q);
  std::vector<double> out;
  propagate(q.i, mask_edge ? &q : nullptr, out);
  return out[q.j];
}

std::vector<double> MoiScorer::source_scores(NodeId i) const {
  if (i >= g_->num_nodes()) throw Error("moi: node id out of range");
  std::vector<double> out;
  propagate(i, nullptr, out);
  return out;
}

std::vector<double> moi_walk_terms(const SignedGraph& g, EdgeQuery q, int order, bool mask_edge) {
  if (g.directed()) throw Error("moi: graph must be undirected (symmetrize first)");
  check_query(g, q);
  if (order < 3 || order > 10) throw Error("moi: order must be in 3..10");
  const auto adj = adjacency_matrix(g);
  const std::size_t n = g.num_nodes();
  std::vector<double> x(n, 0.0), y(n, 0.0), terms;
  x[q.i] = 1.0;
  for (int power = 1; power <= order - 1; ++power) {
    masked_spmv(adj, x, y, mask_edge ? &q : nullptr);
    std::swap(x, y);
    if (power >= 2) terms.push_back(x[q.j]);
  }
  return terms;
}

double moi_score(const SignedGraph& g, const MoiSpec& spec, EdgeQuery q, bool mask_edge) {
  return MoiScorer(g, spec).score(q, mask_edge);
}

double katz_score(const SignedGraph& g, double beta, EdgeQuery q, double tol, bool mask_edge) {
  if (!(tol > 0.0)) throw Error("katz: tolerance must be positive");
  MoiSpec spec;
  spec.order = kInfiniteOrder;
  spec.beta = beta;
  spec.katz_tol = tol;
  return MoiScorer(g, spec).score(q, mask_edge);
}

Sign predict_sign_moi(const SignedGraph& g, const MoiSpec& spec, EdgeQuery q) {
  return sign_of(moi_score(g, spec, q, false));
}

}  // namespace signet
