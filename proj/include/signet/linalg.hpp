#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "signet/common.hpp"
#include "signet/sparse.hpp"

namespace signet {

/// Matrix-free operator. `apply` computes y = M x; `apply_transpose`
/// (optional) computes y = M^T x.
struct LinearOperator {
  using Apply = std::function<void(std::span<const double>, std::span<double>)>;

  std::size_t rows = 0;
  std::size_t cols = 0;
  Apply apply;
  Apply apply_transpose;
};

LinearOperator make_operator(const SparseMatrix& m);
/// Dense operator; the matrix is captured by value.
LinearOperator make_operator(Eigen::MatrixXd m);

enum class EigenTarget { largest_algebraic, smallest_algebraic, largest_magnitude };

struct EigOptions {
  double tol = 1e-8;
  /// Cap on operator applications; 0 selects 300 * k.
  std::size_t max_iter = 0;
  std::uint64_t seed = 1;
};

struct EigResult {
  Eigen::VectorXd values;  ///< ordered by the requested target
  DenseFactor vectors;     ///< n x k, orthonormal columns
  std::size_t matvecs = 0;
  double max_residual = 0.0;  ///< max ||M v - lambda v|| over returned pairs
};

/// k extreme eigenpairs of a symmetric operator by thick-restart Lanczos
/// with full reorthogonalisation. Throws ConvergenceError when the
/// residual bound tol * ||M|| is not met within the iteration cap.
EigResult topk_eig_sym(const LinearOperator& op, std::size_t k, EigenTarget target, const EigOptions& opts = {});

struct SvdResult {
  DenseFactor u;  ///< rows x k
  Eigen::VectorXd sigma;  ///< non-negative, non-increasing
  DenseFactor v;  ///< cols x k
  std::size_t matvecs = 0;
};

/// Top-k singular triplets, computed as the largest eigenpairs of the
/// augmented operator [[0, M], [M^T, 0]] so small singular values keep full
/// absolute accuracy. Requires apply_transpose.
SvdResult topk_svd(const LinearOperator& op, std::size_t k, const EigOptions& opts = {});

/// ||M||_2 by power iteration on M^T M.
double spectral_norm_est(const LinearOperator& op, double tol = 1e-8, std::uint64_t seed = 1,
                         std::size_t max_iter = 10000);
double spectral_norm_est(const SparseMatrix& m, double tol = 1e-8, std::uint64_t seed = 1);

/// Number of singular values above rel_tol * sigma_1 among the top k_max.
std::size_t numerical_rank(const LinearOperator& op, std::size_t k_max, double rel_tol = 1e-10,
                           std::uint64_t seed = 1);

struct KMeansResult {
  std::vector<int> assignment;
  double objective = 0.0;
  std::vector<double> history;  ///< objective after seeding and after each Lloyd step
  int iterations = 0;
};

/// Lloyd's k-means with k-means++ seeding. Ties go to the lowest cluster id.
/// Throws when k exceeds the number of distinct rows.
KMeansResult kmeans(const DenseFactor& points, int k, std::uint64_t seed, int max_iter = 100);

}  // namespace signet
