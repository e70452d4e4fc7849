#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "signet/graph.hpp"

namespace signet {

struct BalanceResult {
  bool balanced = true;
  std::vector<int> side;       ///< two-group witness (0/1 per node) when balanced
  std::vector<NodeId> cycle;   ///< unbalanced cycle v0 .. vm (edge vm-v0 closes it) otherwise
};

/// Two-colouring by depth-first search, flipping sides across negative edges.
BalanceResult is_balanced(const SignedGraph& g);

struct PatternCensus {
  /// Indexed by negative-edge count: +++, ++-, +--, ---.
  std::array<std::uint64_t, 4> triangles{};
  /// ++++, +++-, ++--, +-+-, +---, ----.
  std::array<std::uint64_t, 6> squares{};
  std::uint64_t total3 = 0;
  std::uint64_t total4 = 0;

  static const std::array<std::string, 4>& triangle_names();
  static const std::array<std::string, 6>& square_names();
};

/// Triangles and simple 4-cycles, each counted once. max_wedges > 0 aborts
/// when the 4-cycle wedge scan would exceed that many steps.
PatternCensus census(const SignedGraph& g, std::uint64_t max_wedges = 0);

struct SurpriseRow {
  int order = 3;
  std::string pattern;  ///< sign pattern, or "balanced" for the aggregate row
  std::uint64_t count = 0;
  double p = 0.0;
  double p0 = 0.0;
  double s = 0.0;
};

struct SurpriseReport {
  std::vector<SurpriseRow> rows;
  int shuffles = 0;
  std::uint64_t seed = 0;
};

/// Pattern probabilities against R sign permutations of the same topology.
/// S = Delta (P - P0) / sqrt(Delta P0 (1 - P0)); S = 0 when P = P0.
SurpriseReport surprise(const SignedGraph& g, int shuffles = 10, std::uint64_t seed = 1,
                        std::uint64_t max_wedges = 0);

}  // namespace signet
