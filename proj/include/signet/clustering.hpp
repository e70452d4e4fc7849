#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "signet/graph.hpp"
#include "signet/lowrank.hpp"
#include "signet/sparse.hpp"
#include "signet/synthgen.hpp"

namespace signet {

struct ClusterAssignment {
  int k = 0;
  std::vector<int> cluster;  ///< node -> id in [0, k)
};

/// D - A with D_ii = sum_j |A_ij|.
SparseMatrix signed_laplacian(const SignedGraph& g);

enum class SpectrumEnd { smallest, largest };

/// k eigenvectors of the signed Laplacian followed by k-means
/// (best of `restarts` seeded runs).
ClusterAssignment cluster_spectral_signed(const SignedGraph& g, int k, std::uint64_t seed,
                                          SpectrumEnd end = SpectrumEnd::smallest, int restarts = 5);

enum class CompletionMethod { svp, als };

struct McClusterOptions {
  CompletionMethod method = CompletionMethod::svp;
  SvpConfig svp;  ///< rank and seed are taken from the call
  AlsConfig als;
  int restarts = 5;
};

/// Completes the network at rank k, embeds nodes by the k largest-magnitude
/// eigenvectors of (X + X^T) / 2 and clusters the rows with k-means.
ClusterAssignment mc_cluster(const SignedGraph& g, int k, std::uint64_t seed, const McClusterOptions& opts = {});

/// Unordered pairs i < j on which the two partitions agree (both same or both different).
std::uint64_t agreement(std::span<const int> a, std::span<const int> b);
std::uint64_t agreement(const ClusterAssignment& a, const GroundTruth& gt);

}  // namespace signet
