#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace signet {

/// Compressed-sparse-row real matrix. Column indices are strictly increasing
/// within each row.
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return indices.size(); }

  /// Checks the CSR invariants; throws signet::Error on violation.
  void validate() const;

  /// Entry lookup by binary search; 0 when absent.
  double at(std::size_t r, std::size_t c) const;

  struct Triplet {
    std::uint32_t row;
    std::uint32_t col;
    double value;
  };
  /// Duplicates are summed. Explicit zeros are kept only if keep_zeros.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets,
                                    bool keep_zeros = false);
  static SparseMatrix identity(std::size_t n);
};

/// y = m * x, row-major summation order.
std::vector<double> spmv(const SparseMatrix& m, std::span<const double> x);
void spmv(const SparseMatrix& m, std::span<const double> x, std::span<double> y);

/// y = m^T * x.
void spmv_transpose(const SparseMatrix& m, std::span<const double> x, std::span<double> y);

SparseMatrix transpose(const SparseMatrix& m);

/// Gustavson row-by-row product a * b.
SparseMatrix spgemm(const SparseMatrix& a, const SparseMatrix& b);

SparseMatrix subtract(const SparseMatrix& a, const SparseMatrix& b);

}  // namespace signet
