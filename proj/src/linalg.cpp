#include "signet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <string>

namespace signet {

LinearOperator make_operator(const SparseMatrix& m) {
  LinearOperator op;
  op.rows = m.rows;
  op.cols = m.cols;
  op.apply = [&m](std::span<const double> x, std::span<double> y) { spmv(m, x, y); };
  op.apply_transpose = [&m](std::span<const double> x, std::span<double> y) { spmv_transpose(m, x, y); };
  return op;
}

LinearOperator make_operator(Eigen::MatrixXd m) {
  LinearOperator op;
  op.rows = static_cast<std::size_t>(m.rows());
  op.cols = static_cast<std::size_t>(m.cols());
  auto shared = std::make_shared<const Eigen::MatrixXd>(std::move(m));
  op.apply = [shared](std::span<const double> x, std::span<double> y) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::Map<Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
    yv.noalias() = (*shared) * xv;
  };
  op.apply_transpose = [shared](std::span<const double> x, std::span<double> y) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::Map<Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
    yv.noalias() = shared->transpose() * xv;
  };
  return op;
}

namespace {

Eigen::VectorXd random_unit(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v / v.norm();
}

// Orders Ritz value indices so the most wanted come first.
std::vector<Eigen::Index> wanted_order(const Eigen::VectorXd& theta, EigenTarget target) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(theta.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    switch (target) {
      case EigenTarget::largest_algebraic: return theta[a] > theta[b];
      case EigenTarget::smallest_algebraic: return theta[a] < theta[b];
      case EigenTarget::largest_magnitude: return std::abs(theta[a]) > std::abs(theta[b]);
    }
    return false;
  });
  return idx;
}

}  // namespace

EigResult topk_eig_sym(const LinearOperator& op, std::size_t k, EigenTarget target, const EigOptions& opts) {
  if (op.rows != op.cols) throw Error("topk_eig_sym: operator must be square");
  const auto n = static_cast<Eigen::Index>(op.rows);
  if (k == 0 || k > op.rows) throw Error("topk_eig_sym: need 1 <= k <= n");
  const std::size_t max_mv = opts.max_iter ? opts.max_iter : 300 * k;
  const auto ki = static_cast<Eigen::Index>(k);
  const Eigen::Index m = std::min<Eigen::Index>(n, std::max<Eigen::Index>(2 * ki + 10, 24));

  std::mt19937_64 rng(opts.seed);
  Eigen::MatrixXd basis(n, m + 1);
  Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd w(n);
  basis.col(0) = random_unit(n, rng);

  Eigen::Index filled = 0;  // columns of proj computed
  double coupling = 0.0;    // norm of the residual vector leaving the basis
  double norm_est = 0.0;
  std::size_t matvecs = 0;

  for (;;) {
    while (filled < m) {
      op.apply(std::span<const double>(basis.col(filled).data(), op.rows), std::span<double>(w.data(), op.rows));
      ++matvecs;
      const Eigen::Index nb = filled + 1;
      auto q = basis.leftCols(nb);
      Eigen::VectorXd h = q.transpose() * w;
      w.noalias() -= q * h;
      Eigen::VectorXd h2 = q.transpose() * w;
      w.noalias() -= q * h2;
      h += h2;
      proj.block(0, filled, nb, 1) = h;
      proj.block(filled, 0, 1, nb) = h.transpose();
      coupling = w.norm();
      ++filled;
      if (filled == n) break;
      norm_est = std::max(norm_est, std::abs(h[filled - 1]) + coupling);
      if (coupling <= 1e-13 * std::max(norm_est, 1e-300)) {
        // Invariant subspace: continue from a fresh direction.
        Eigen::VectorXd r = random_unit(n, rng);
        auto qq = basis.leftCols(filled);
        for (int pass = 0; pass < 2; ++pass) r -= qq * (qq.transpose() * r);
        basis.col(filled) = r / r.norm();
        coupling = 0.0;
      } else {
        basis.col(filled) = w / coupling;
      }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(proj.topLeftCorner(filled, filled));
    const Eigen::VectorXd& theta = es.eigenvalues();
    const Eigen::MatrixXd& s = es.eigenvectors();
    norm_est = std::max(norm_est, theta.cwiseAbs().maxCoeff());
    const auto order = wanted_order(theta, target);
    const bool exact = filled == n;

    double worst = 0.0;
    for (Eigen::Index i = 0; i < ki; ++i) {
      const double r = exact ? 0.0 : std::abs(coupling * s(filled - 1, order[static_cast<std::size_t>(i)]));
      worst = std::max(worst, r);
    }
    const double bound = opts.tol * std::max(norm_est, 1e-300);
    if (worst <= bound || exact || norm_est == 0.0) {
      EigResult res;
      res.values.resize(ki);
      res.vectors.resize(n, ki);
      for (Eigen::Index i = 0; i < ki; ++i) {
        const auto c = order[static_cast<std::size_t>(i)];
        res.values[i] = theta[c];
        res.vectors.col(i) = basis.leftCols(filled) * s.col(c);
      }
      res.matvecs = matvecs;
      Eigen::VectorXd y(n);
      for (Eigen::Index i = 0; i < ki; ++i) {
        Eigen::VectorXd v = res.vectors.col(i);
        op.apply(std::span<const double>(v.data(), op.rows), std::span<double>(y.data(), op.rows));
        res.max_residual = std::max(res.max_residual, (y - res.values[i] * v).norm());
      }
      return res;
    }
    if (matvecs >= max_mv)
      throw ConvergenceError("topk_eig_sym: no convergence after " + std::to_string(matvecs) +
                                 " operator applications (residual " + std::to_string(worst) + ", target " +
                                 std::to_string(bound) + ")",
                             worst);

    // Thick restart: keep the most wanted Ritz vectors plus the residual direction.
    const Eigen::Index keep = std::min<Eigen::Index>(filled - 1, std::max<Eigen::Index>(ki, ki + (m - ki) / 2));
    Eigen::MatrixXd sel(filled, keep);
    for (Eigen::Index i = 0; i < keep; ++i) sel.col(i) = s.col(order[static_cast<std::size_t>(i)]);
    Eigen::MatrixXd kept = basis.leftCols(filled) * sel;
    const Eigen::VectorXd residual_dir = basis.col(filled);
    basis.leftCols(keep) = kept;
    basis.col(keep) = residual_dir;
    proj.setZero();
    for (Eigen::Index i = 0; i < keep; ++i) {
      proj(i, i) = theta[order[static_cast<std::size_t>(i)]];
      proj(i, keep) = proj(keep, i) = coupling * sel(filled - 1, i);
    }
    filled = keep;
  }
}

SvdResult topk_svd(const LinearOperator& op, std::size_t k, const EigOptions& opts) {
  if (!op.apply_transpose) throw Error("topk_svd: operator needs a transpose");
  if (k == 0 || k > std::min(op.rows, op.cols)) throw Error("topk_svd: need 1 <= k <= min(rows, cols)");
  const std::size_t r = op.rows, c = op.cols;
  LinearOperator aug;
  aug.rows = aug.cols = r + c;
  aug.apply = [&op, r, c](std::span<const double> x, std::span<double> y) {
    op.apply(x.subspan(r, c), y.subspan(0, r));
    op.apply_transpose(x.subspan(0, r), y.subspan(r, c));
  };
  EigOptions inner = opts;
  inner.tol = opts.tol / 2;
  if (!inner.max_iter) inner.max_iter = 600 * k;
  auto eig = topk_eig_sym(aug, k, EigenTarget::largest_algebraic, inner);

  SvdResult out;
  const auto ki = static_cast<Eigen::Index>(k);
  out.u = DenseFactor::Zero(static_cast<Eigen::Index>(r), ki);
  out.v = DenseFactor::Zero(static_cast<Eigen::Index>(c), ki);
  out.sigma.resize(ki);
  out.matvecs = eig.matvecs;
  for (Eigen::Index i = 0; i < ki; ++i) {
    out.sigma[i] = std::max(0.0, eig.values[i]);
    Eigen::VectorXd top = eig.vectors.col(i).head(static_cast<Eigen::Index>(r));
    Eigen::VectorXd bottom = eig.vectors.col(i).tail(static_cast<Eigen::Index>(c));
    // Null-space pairs may have one empty half; those are returned as zero vectors.
    if (top.norm() > 1e-8) out.u.col(i) = top / top.norm();
    if (bottom.norm() > 1e-8) out.v.col(i) = bottom / bottom.norm();
  }
  return out;
}

double spectral_norm_est(const LinearOperator& op, double tol, std::uint64_t seed, std::size_t max_iter) {
  if (!op.apply_transpose) throw Error("spectral_norm_est: operator needs a transpose");
  std::mt19937_64 rng(seed);
  Eigen::VectorXd x = random_unit(static_cast<Eigen::Index>(op.cols), rng), y(static_cast<Eigen::Index>(op.rows)),
                  z(static_cast<Eigen::Index>(op.cols));
  double prev = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    op.apply(std::span<const double>(x.data(), op.cols), std::span<double>(y.data(), op.rows));
    const double sigma = y.norm();
    if (sigma == 0.0) return 0.0;
    op.apply_transpose(std::span<const double>(y.data(), op.rows), std::span<double>(z.data(), op.cols));
    const double zn = z.norm();
    if (zn == 0.0) return sigma;
    x = z / zn;
    if (it > 0 && std::abs(sigma - prev) <= tol * sigma) return sigma;
    prev = sigma;
  }
  return prev;
}

double spectral_norm_est(const SparseMatrix& m, double tol, std::uint64_t seed) {
  return spectral_norm_est(make_operator(m), tol, seed);
}

std::size_t numerical_rank(const LinearOperator& op, std::size_t k_max, double rel_tol, std::uint64_t seed) {
  EigOptions o;
  o.seed = seed;
  o.tol = 1e-12;
  const auto svd = topk_svd(op, k_max, o);
  if (svd.sigma[0] == 0.0) return 0;
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < svd.sigma.size(); ++i)
    if (svd.sigma[i] > rel_tol * svd.sigma[0]) ++r;
  return r;
}

}  // namespace signet
