#include "signet/sparse.hpp"

#include <algorithm>
#include <string>

#include "signet/common.hpp"

namespace signet {

void SparseMatrix::validate() const {
  if (offsets.size() != rows + 1) throw Error("csr: offsets length must be rows + 1");
  if (offsets.front() != 0 || offsets.back() != indices.size())
    throw Error("csr: offsets must start at 0 and end at nnz");
  if (values.size() != indices.size()) throw Error("csr: values and indices differ in length");
  for (std::size_t r = 0; r < rows; ++r) {
    if (offsets[r] > offsets[r + 1]) throw Error("csr: offsets decrease at row " + std::to_string(r));
    for (std::size_t p = offsets[r]; p < offsets[r + 1]; ++p) {
      if (indices[p] >= cols) throw Error("csr: column index out of range in row " + std::to_string(r));
      if (p > offsets[r] && indices[p] <= indices[p - 1])
        throw Error("csr: column indices not strictly increasing in row " + std::to_string(r));
    }
  }
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  const auto first = indices.begin() + static_cast<std::ptrdiff_t>(offsets[r]);
  const auto last = indices.begin() + static_cast<std::ptrdiff_t>(offsets[r + 1]);
  const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(c));
  if (it == last || *it != c) return 0.0;
  return values[static_cast<std::size_t>(it - indices.begin())];
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets,
                                         bool keep_zeros) {
  for (const auto& t : triplets)
    if (t.row >= rows || t.col >= cols) throw Error("csr: triplet out of range");
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.offsets.assign(rows + 1, 0);
  std::size_t i = 0;
  while (i < triplets.size()) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < triplets.size() && triplets[j].row == triplets[i].row && triplets[j].col == triplets[i].col)
      sum += triplets[j++].value;
    if (sum != 0.0 || keep_zeros) {
      m.indices.push_back(triplets[i].col);
      m.values.push_back(sum);
      ++m.offsets[triplets[i].row + 1];
    }
    i = j;
  }
  for (std::size_t r = 0; r < rows; ++r) m.offsets[r + 1] += m.offsets[r];
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  SparseMatrix m;
  m.rows = m.cols = n;
  m.offsets.resize(n + 1);
  m.indices.resize(n);
  m.values.assign(n, 1.0);
  for (std::size_t i = 0; i <= n; ++i) m.offsets[i] = i;
  for (std::size_t i = 0; i < n; ++i) m.indices[i] = static_cast<std::uint32_t>(i);
  return m;
}

void spmv(const SparseMatrix& m, std::span<const double> x, std::span<double> y) {
  if (x.size() != m.cols || y.size() != m.rows)
    throw Error("spmv: dimension mismatch (" + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                " times " + std::to_string(x.size()) + ")");
  for (std::size_t r = 0; r < m.rows; ++r) {
    double acc = 0.0;
    for (std::size_t p = m.offsets[r]; p < m.offsets[r + 1]; ++p) acc += m.values[p] * x[m.indices[p]];
    y[r] = acc;
  }
}

std::vector<double> spmv(const SparseMatrix& m, std::span<const double> x) {
  std::vector<double> y(m.rows);
  spmv(m, x, y);
  return y;
}

void spmv_transpose(const SparseMatrix& m, std::span<const double> x, std::span<double> y) {
  if (x.size() != m.rows || y.size() != m.cols) throw Error("spmv_transpose: dimension mismatch");
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    for (std::size_t p = m.offsets[r]; p < m.offsets[r + 1]; ++p) y[m.indices[p]] += m.values[p] * xr;
  }
}

SparseMatrix transpose(const SparseMatrix& m) {
  SparseMatrix t;
  t.rows = m.cols;
  t.cols = m.rows;
  t.offsets.assign(t.rows + 1, 0);
  t.indices.resize(m.nnz());
  t.values.resize(m.nnz());
  for (auto c : m.indices) ++t.offsets[c + 1];
  for (std::size_t r = 0; r < t.rows; ++r) t.offsets[r + 1] += t.offsets[r];
  std::vector<std::size_t> cursor(t.offsets.begin(), t.offsets.end() - 1);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t p = m.offsets[r]; p < m.offsets[r + 1]; ++p) {
      const std::size_t q = cursor[m.indices[p]]++;
      t.indices[q] = static_cast<std::uint32_t>(r);
      t.values[q] = m.values[p];
    }
  }
  return t;
}

SparseMatrix spgemm(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols != b.rows) throw Error("spgemm: dimension mismatch");
  SparseMatrix c;
  c.rows = a.rows;
  c.cols = b.cols;
  c.offsets.assign(a.rows + 1, 0);
  std::vector<double> acc(b.cols, 0.0);
  std::vector<char> used(b.cols, 0);
  std::vector<std::uint32_t> touched;
  for (std::size_t r = 0; r < a.rows; ++r) {
    touched.clear();
    for (std::size_t p = a.offsets[r]; p < a.offsets[r + 1]; ++p) {
      const double av = a.values[p];
      const std::size_t k = a.indices[p];
      for (std::size_t q = b.offsets[k]; q < b.offsets[k + 1]; ++q) {
        const auto col = b.indices[q];
        if (!used[col]) {
          used[col] = 1;
          touched.push_back(col);
        }
        acc[col] += av * b.values[q];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (auto col : touched) {
      if (acc[col] != 0.0) {
        c.indices.push_back(col);
        c.values.push_back(acc[col]);
      }
      acc[col] = 0.0;
      used[col] = 0;
    }
    c.offsets[r + 1] = c.indices.size();
  }
  return c;
}

SparseMatrix subtract(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw Error("subtract: dimension mismatch");
  std::vector<SparseMatrix::Triplet> trips;
  trips.reserve(a.nnz() + b.nnz());
  for (std::size_t r = 0; r < a.rows; ++r)
    for (std::size_t p = a.offsets[r]; p < a.offsets[r + 1]; ++p)
      trips.push_back({static_cast<std::uint32_t>(r), a.indices[p], a.values[p]});
  for (std::size_t r = 0; r < b.rows; ++r)
    for (std::size_t p = b.offsets[r]; p < b.offsets[r + 1]; ++p)
      trips.push_back({static_cast<std::uint32_t>(r), b.indices[p], -b.values[p]});
  return SparseMatrix::from_triplets(a.rows, a.cols, std::move(trips));
}

}  // namespace signet
