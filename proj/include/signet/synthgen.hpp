#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "signet/graph.hpp"
#include "signet/linalg.hpp"

namespace signet {

/// Node-to-cluster assignment of a complete k-weakly balanced network:
/// entry (i, j) is +1 when i and j share a cluster and -1 otherwise, with
/// a +1 diagonal.
struct GroundTruth {
  NodeId n = 0;
  int k = 0;
  std::vector<int> assignment;
  std::vector<NodeId> sizes;

  double entry(NodeId i, NodeId j) const { return assignment[i] == assignment[j] ? 1.0 : -1.0; }

  /// Operator form 2 C C^T - 1 1^T (C the cluster indicator), O(n + k) per apply.
  LinearOperator complete_operator() const;
  /// Dense n x n complete matrix; refuses n > 5000.
  Eigen::MatrixXd complete_dense() const;
};

enum class SamplingKind { uniform, power_law };

struct SamplingSpec {
  double sparsity = 0.1;  ///< in (0, 1]
  double noise = 0.0;     ///< sign-flip probability in [0, 0.5)
  SamplingKind distribution = SamplingKind::uniform;
  double gamma = 2.5;  ///< power-law exponent of the expected-degree sequence
  std::uint64_t seed = 1;
};

GroundTruth make_weakly_balanced(std::span<const NodeId> sizes);
/// Ground truth from an arbitrary label vector (labels are compacted to 0..k-1).
GroundTruth ground_truth_from_labels(std::span<const int> labels);

/// Samples the observed undirected network from the complete matrix.
SignedGraph sample(const GroundTruth& gt, const SamplingSpec& spec);

/// Expected-degree weights used by power-law sampling, in node order.
std::vector<double> power_law_weights(NodeId n, double sparsity, double gamma, std::uint64_t seed);

/// tau = max_i n / n_i.
double group_imbalance(const GroundTruth& gt);

/// mu-hat = n * max entry^2 over the singular vectors of the complete matrix
/// with non-negligible singular values (at most k of them). Throws if the
/// bound mu-hat <= tau fails.
double incoherence_check(const GroundTruth& gt, int k, std::uint64_t seed = 1);

void write_ground_truth(const GroundTruth& gt, const std::vector<std::string>& labels, const std::string& path);
/// Reads "node<TAB>cluster" lines; returns labels in file order and the truth.
GroundTruth read_ground_truth(const std::string& path, std::vector<std::string>& labels);

}  // namespace signet
