#include <algorithm>
#include <limits>
#include <random>
#include <vector>

#include "signet/linalg.hpp"

namespace signet {

namespace {

std::size_t count_distinct_rows(const DenseFactor& p) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) idx[static_cast<std::size_t>(i)] = i;
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < p.cols(); ++c)
      if (p(a, c) != p(b, c)) return p(a, c) < p(b, c);
    return false;
  };
  std::sort(idx.begin(), idx.end(), less);
  std::size_t distinct = idx.empty() ? 0 : 1;
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (less(idx[i - 1], idx[i])) ++distinct;
  return distinct;
}

}  // namespace

KMeansResult kmeans(const DenseFactor& points, int k, std::uint64_t seed, int max_iter) {
  const Eigen::Index n = points.rows();
  if (k < 1) throw Error("kmeans: k must be positive");
  if (static_cast<std::size_t>(k) > count_distinct_rows(points))
    throw Error("kmeans: k = " + std::to_string(k) + " exceeds the number of distinct rows");

  std::mt19937_64 rng(seed);
  DenseFactor centers(k, points.cols());
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());

  // k-means++ seeding.
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers.row(0) = points.row(pick(rng));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], (points.row(i) - centers.row(c - 1)).squaredNorm());
      total += d2[static_cast<std::size_t>(i)];
    }
    std::uniform_real_distribution<double> u(0.0, total);
    double target = u(rng);
    Eigen::Index chosen = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (d2[static_cast<std::size_t>(i)] <= 0.0) continue;
      chosen = i;
      target -= d2[static_cast<std::size_t>(i)];
      if (target <= 0.0) break;
    }
    centers.row(c) = points.row(chosen);
  }

  KMeansResult res;
  res.assignment.assign(static_cast<std::size_t>(n), -1);
  auto assign = [&]() {
    bool changed = false;
    double obj = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (points.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      obj += best_d;
      if (res.assignment[static_cast<std::size_t>(i)] != best) {
        res.assignment[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    return std::pair{changed, obj};
  };
  auto update = [&]() {
    DenseFactor sums = DenseFactor::Zero(k, points.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = res.assignment[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    // Empty clusters keep their previous centre.
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0)
        centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
  };
  auto objective = [&]() {
    double obj = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      obj += (points.row(i) - centers.row(res.assignment[static_cast<std::size_t>(i)])).squaredNorm();
    return obj;
  };

  for (int it = 0; it < max_iter; ++it) {
    auto [changed, obj] = assign();
    res.history.push_back(obj);
    res.iterations = it + 1;
    if (!changed) break;
    update();
  }
  update();
  res.objective = objective();
  res.history.push_back(res.objective);
  return res;
}

}  // namespace signet
