#pragma once

#include <optional>
#include <vector>

#include "signet/graph.hpp"

namespace signet {

/// Order value selecting the infinite-order (Katz) measure.
inline constexpr int kInfiniteOrder = 0;
/// Default decay relative to the spectral norm: beta = 0.15 / ||A||_2.
inline constexpr double kDefaultRelativeBeta = 0.15;

/// Measure-of-imbalance predictor settings. Cycle length t is weighted by
/// beta^(t-1); order 3..10, or kInfiniteOrder.
struct MoiSpec {
  int order = 3;
  std::optional<double> beta;  ///< absolute decay in (0, 1); unset = 0.15 / ||A||_2
  double katz_tol = 1e-12;     ///< truncation tolerance for the infinite order
};

/// Scores queries on one undirected graph, caching the spectral norm.
///
/// The score of (i, j) is sum_{t=3..order} beta^(t-1) (A^(t-1))_ij, obtained
/// from order-2 sparse mat-vecs started at the indicator of i. With
/// mask_edge the entry (i, j) is zeroed in both directions first.
class MoiScorer {
public:
  MoiScorer(const SignedGraph& g, MoiSpec spec);

  int order() const noexcept { return spec_.order; }
  double beta() const noexcept { return beta_; }
  /// Spectral-norm estimate of A (computed lazily for explicit beta).
  double sigma() const;

  double score(EdgeQuery q, bool mask_edge) const;
  /// Unmasked scores of (i, j) for every j.
  std::vector<double> source_scores(NodeId i) const;

private:
  void propagate(NodeId i, const EdgeQuery* mask, std::vector<double>& out) const;

  const SignedGraph* g_;
  MoiSpec spec_;
  SparseMatrix adj_;
  double beta_ = 0.0;
  mutable double sigma_ = -1.0;
};

/// Per-length walk terms (A^(t-1))_ij for t = 3..order.
std::vector<double> moi_walk_terms(const SignedGraph& g, EdgeQuery q, int order, bool mask_edge);

double moi_score(const SignedGraph& g, const MoiSpec& spec, EdgeQuery q, bool mask_edge);

/// ((I - beta A)^-1 - I - beta A)_ij by the truncated Neumann series.
/// Requires beta * ||A||_2 < 1.
double katz_score(const SignedGraph& g, double beta, EdgeQuery q, double tol, bool mask_edge);

/// sign of the unmasked MOI score; a zero score predicts +1.
Sign predict_sign_moi(const SignedGraph& g, const MoiSpec& spec, EdgeQuery q);

}  // namespace signet
