#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "signet/common.hpp"
#include "signet/graph.hpp"

namespace signet {

/// Completed matrix X = W H^T held in factored form.
struct FactorPair {
  DenseFactor w;
  DenseFactor h;

  int rank() const noexcept { return static_cast<int>(w.cols()); }
  NodeId num_nodes() const noexcept { return static_cast<NodeId>(w.rows()); }
  double score(NodeId i, NodeId j) const { return w.row(i).dot(h.row(j)); }
};

enum class LossKind { squared, sigmoid, square_hinge };

/// loss(x, y) for label x and score y.
double loss_value(LossKind kind, double x, double y);
/// d loss(x, y) / dy.
double loss_derivative(LossKind kind, double x, double y);

struct SvpConfig {
  int rank = 1;
  std::optional<double> step;  ///< unset: n^2 / (2 |Omega|)
  double tol = 1e-3;           ///< on ||P(X) - A||_F^2
  int max_iter = 100;
  double svd_tol = 1e-9;
  std::uint64_t seed = 1;
};

struct SvpResult {
  FactorPair factors;  ///< W = U Sigma, H = V
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual;  ///< ||P(X_t) - A||_F^2 for t = 0, 1, ...
};

/// Singular value projection: X <- rank-k SVD of X - eta (P(X) - A), X_0 = 0.
/// Throws ConvergenceError once the residual exceeds ten times its initial value.
SvpResult svp_complete(const SignedGraph& g, const SvpConfig& cfg);

struct AlsConfig {
  int rank = 1;
  double lambda = 0.1;
  int sweeps = 10;  ///< each sweep updates W then H
  std::uint64_t seed = 1;
  bool record_objective = true;
};

struct MfResult {
  FactorPair factors;
  std::vector<double> objective;  ///< initial value, then one per half-sweep (ALS) or epoch (SGD)
};

/// sum_Omega (A_ij - w_i . h_j)^2 + lambda ||W||_F^2 + lambda ||H||_F^2 by
/// exact alternating ridge solves.
MfResult mf_als(const SignedGraph& g, const AlsConfig& cfg);

struct SgdConfig {
  int rank = 1;
  double lambda = 0.1;
  double step = 0.05;  ///< decays as step / sqrt(epoch)
  LossKind loss = LossKind::sigmoid;
  int epochs = 50;
  std::uint64_t seed = 1;
};

/// Stochastic gradient on sum_Omega loss(A_ij, w_i . h_j) + lambda (||W||^2 + ||H||^2),
/// one seeded permutation of the observed arcs per epoch.
MfResult mf_sgd(const SignedGraph& g, const SgdConfig& cfg);

double mf_objective(const SignedGraph& g, const FactorPair& f, double lambda, LossKind loss);

Sign predict_lr(const FactorPair& f, EdgeQuery q);

/// ||P(X - A)||_F / ||P(A)||_F over the observed arcs.
double relative_error_omega(const FactorPair& f, const SignedGraph& g);
double relative_error_omega(const Eigen::MatrixXd& x, const SignedGraph& g);

/// Binary layout: uint64 n, uint64 k, then W and H as row-major doubles.
void write_factors(const FactorPair& f, const std::string& path);
FactorPair read_factors(const std::string& path);

}  // namespace signet
