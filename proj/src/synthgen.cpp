#include "signet/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

namespace signet {

LinearOperator GroundTruth::complete_operator() const {
  LinearOperator op;
  op.rows = op.cols = n;
  auto labels = std::make_shared<const std::vector<int>>(assignment);
  const auto clusters = static_cast<std::size_t>(k);
  auto apply = [labels, clusters](std::span<const double> x, std::span<double> y) {
    const auto& a = *labels;
    std::vector<double> sums(clusters, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      sums[static_cast<std::size_t>(a[i])] += x[i];
      total += x[i];
    }
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = 2.0 * sums[static_cast<std::size_t>(a[i])] - total;
  };
  op.apply = apply;
  op.apply_transpose = apply;
  return op;
}

Eigen::MatrixXd GroundTruth::complete_dense() const {
  if (n > 5000) throw Error("complete matrix is not materialised above n = 5000; use complete_operator()");
  Eigen::MatrixXd m(n, n);
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = 0; j < n; ++j) m(i, j) = entry(i, j);
  return m;
}

GroundTruth make_weakly_balanced(std::span<const NodeId> sizes) {
  if (sizes.empty()) throw Error("make_weakly_balanced: size list is empty");
  GroundTruth gt;
  gt.k = static_cast<int>(sizes.size());
  gt.sizes.assign(sizes.begin(), sizes.end());
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    if (sizes[c] == 0) throw Error("make_weakly_balanced: cluster sizes must be positive");
    gt.assignment.insert(gt.assignment.end(), sizes[c], static_cast<int>(c));
  }
  gt.n = static_cast<NodeId>(gt.assignment.size());
  return gt;
}

GroundTruth ground_truth_from_labels(std::span<const int> labels) {
  if (labels.empty()) throw Error("ground truth: no nodes");
  std::map<int, int> remap;
  for (int l : labels) remap.emplace(l, 0);
  int next = 0;
  for (auto& [label, id] : remap) id = next++;
  GroundTruth gt;
  gt.n = static_cast<NodeId>(labels.size());
  gt.k = next;
  gt.sizes.assign(static_cast<std::size_t>(next), 0);
  for (int l : labels) {
    gt.assignment.push_back(remap[l]);
    ++gt.sizes[static_cast<std::size_t>(remap[l])];
  }
  return gt;
}

namespace {

void check_spec(const SamplingSpec& spec) {
  if (!(spec.sparsity > 0.0 && spec.sparsity <= 1.0)) throw Error("sample: sparsity must lie in (0, 1]");
  if (!(spec.noise >= 0.0 && spec.noise < 0.5))
    throw Error("sample: noise must lie in [0, 0.5) (flip probability 0.5 destroys the signal)");
  if (spec.distribution == SamplingKind::power_law && !(spec.gamma > 1.0))
    throw Error("sample: power-law exponent must exceed 1");
}

// Number of trials until the next success of a Bernoulli(p) process, minus one.
std::uint64_t geometric_skip(double p, std::mt19937_64& rng) {
  if (p >= 1.0) return 0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = 1.0 - u(rng);  // (0, 1]
  const double skip = std::floor(std::log(r) / std::log1p(-p));
  return skip > 1e18 ? std::uint64_t{1} << 62 : static_cast<std::uint64_t>(skip);
}

}  // namespace

std::vector<double> power_law_weights(NodeId n, double sparsity, double gamma, std::uint64_t seed) {
  const double alpha = 1.0 / (gamma - 1.0);
  const double target = sparsity * static_cast<double>(n) * (static_cast<double>(n) - 1.0) / 2.0;
  auto scaled = [&](double offset, std::vector<double>& w) {
    w.resize(n);
    double s1 = 0.0, s2 = 0.0;
    for (NodeId i = 0; i < n; ++i) {
      w[i] = std::pow(static_cast<double>(i) + offset, -alpha);
      s1 += w[i];
      s2 += w[i] * w[i];
    }
    // Without clipping, sum_{i<j} w_i w_j / S = c (s1^2 - s2) / (2 s1) for w scaled by c.
    const double c = 2.0 * s1 * target / (s1 * s1 - s2);
    for (auto& x : w) x *= c;
    return w.front() * w.front() <= c * s1;  // max w^2 <= sum w
  };
  std::vector<double> w;
  double lo = 1.0, hi = 1.0;
  if (!scaled(lo, w)) {
    while (!scaled(hi, w) && hi < 1e15) hi *= 2.0;
    lo = hi / 2.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (scaled(mid, w) ? hi : lo) = mid;
    }
    scaled(hi, w);
  }
  // Decouple weights from the contiguous cluster layout.
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::shuffle(w.begin(), w.end(), rng);
  return w;
}

SignedGraph sample(const GroundTruth& gt, const SamplingSpec& spec) {
  check_spec(spec);
  const NodeId n = gt.n;
  if (n < 2) throw Error("sample: need at least two nodes");
  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution flip(spec.noise);
  std::vector<SignedEdge> edges;
  auto emit = [&](NodeId i, NodeId j) {
    Sign s = gt.assignment[i] == gt.assignment[j] ? Sign{1} : Sign{-1};
    if (spec.noise > 0.0 && flip(rng)) s = static_cast<Sign>(-s);
    edges.push_back({std::min(i, j), std::max(i, j), s});
  };

  if (spec.distribution == SamplingKind::uniform) {
    const std::uint64_t total = std::uint64_t{n} * (n - 1) / 2;
    edges.reserve(static_cast<std::size_t>(spec.sparsity * static_cast<double>(total) * 1.05) + 16);
    // Walk the row-major list of pairs i < j with geometric skips.
    NodeId row = 0;
    std::uint64_t row_start = 0;  // linear index of pair (row, row + 1)
    std::uint64_t pos = geometric_skip(spec.sparsity, rng);
    while (pos < total) {
      while (pos >= row_start + (n - 1 - row)) {
        row_start += n - 1 - row;
        ++row;
      }
      emit(row, static_cast<NodeId>(row + 1 + (pos - row_start)));
      pos += 1 + geometric_skip(spec.sparsity, rng);
    }
  } else {
    const auto w = power_law_weights(n, spec.sparsity, spec.gamma, spec.seed);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), NodeId{0});
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return w[a] > w[b]; });
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // Chung-Lu sampling over weights in decreasing order with geometric skips.
    for (NodeId a = 0; a + 1 < n; ++a) {
      const double wa = w[order[a]];
      NodeId b = a + 1;
      double p = std::min(1.0, wa * w[order[b]] / sum);
      while (b < n && p > 0.0) {
        if (p < 1.0) {
          const std::uint64_t skip = geometric_skip(p, rng);
          if (skip >= n - b) break;
          b += static_cast<NodeId>(skip);
        }
        const double q = std::min(1.0, wa * w[order[b]] / sum);
        if (u(rng) < q / p) emit(order[a], order[b]);
        p = q;
        ++b;
      }
    }
  }
  return SignedGraph(n, std::move(edges), false);
}

double group_imbalance(const GroundTruth& gt) {
  double tau = 0.0;
  for (auto s : gt.sizes) tau = std::max(tau, static_cast<double>(gt.n) / static_cast<double>(s));
  return tau;
}

double incoherence_check(const GroundTruth& gt, int k, std::uint64_t seed) {
  if (k < 1) throw Error("incoherence_check: k must be positive");
  const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), gt.n);
  EigOptions opts;
  opts.tol = 1e-12;
  opts.seed = seed;
  const auto op = gt.complete_operator();
  const auto eig = topk_eig_sym(op, kk, EigenTarget::largest_magnitude, opts);
  const double top = std::abs(eig.values[0]);
  double max_sq = 0.0;
  for (Eigen::Index c = 0; c < eig.values.size(); ++c) {
    if (std::abs(eig.values[c]) <= 1e-10 * top) continue;
    max_sq = std::max(max_sq, eig.vectors.col(c).cwiseAbs2().maxCoeff());
  }
  const double mu = static_cast<double>(gt.n) * max_sq;
  const double tau = group_imbalance(gt);
  if (mu > tau * (1.0 + 1e-8))
    throw Error("incoherence_check: mu-hat " + std::to_string(mu) + " exceeds group imbalance " +
                std::to_string(tau));
  return mu;
}

void write_ground_truth(const GroundTruth& gt, const std::vector<std::string>& labels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write ground truth '" + path + "'");
  for (NodeId i = 0; i < gt.n; ++i)
    out << (labels.empty() ? std::to_string(i) : labels.at(i)) << '\t' << gt.assignment[i] << '\n';
}

GroundTruth read_ground_truth(const std::string& path, std::vector<std::string>& labels) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open ground truth '" + path + "'");
  labels.clear();
  std::vector<int> assignment;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string node;
    int cluster;
    if (!(ss >> node)) continue;
    if (!(ss >> cluster)) throw ParseError("ground truth: malformed line " + std::to_string(lineno));
    labels.push_back(node);
    assignment.push_back(cluster);
  }
  return ground_truth_from_labels(assignment);
}

}  // namespace signet
