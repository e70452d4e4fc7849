#pragma once

#include <span>
#include <string>
#include <vector>

#include "signet/common.hpp"
#include "signet/graph.hpp"

namespace signet {

enum class FeatureVariant { directed, reduced };

/// Walk-count feature configuration.
///
/// directed: every product of length t-1 over {A+, A+^T, A-, A-^T}, giving
/// 4^(t-1) columns for order t. reduced: products over the sign parts of
/// the symmetrized graph, each sign pattern merged with its reversal, giving
/// 2^(t-2) + 2^(ceil((t-1)/2)-1) columns for order t.
struct FeatureSpec {
  int max_order = 3;
  FeatureVariant variant = FeatureVariant::directed;
  bool include_all_lower_orders = true;
  bool allow_high_order = false;  ///< lifts the max_order <= 5 guard
};

struct FeatureMatrix {
  FeatureSpec spec;
  std::vector<EdgeQuery> queries;
  std::vector<std::string> columns;
  DenseFactor values;  ///< queries x columns
};

/// Column descriptors in extraction order, e.g. "A+ A+ A-^T".
std::vector<std::string> feature_columns(const FeatureSpec& spec);

/// Walk counts for each query. With mask_observed, a query that is an
/// observed edge has that edge removed from g while its own row is computed
/// (the arc i->j for directed graphs, both arcs otherwise).
FeatureMatrix extract_features(const SignedGraph& g, const FeatureSpec& spec, std::span<const EdgeQuery> queries,
                               bool mask_observed = true);

struct LogisticOptions {
  double lambda = 1.0;
  int max_iter = 1000;
  double tol = 1e-6;  ///< gradient infinity-norm
};

/// Logistic model on standardized features. Columns whose training values
/// are constant get scale 0 and do not contribute.
struct LogisticModel {
  std::vector<std::string> columns;
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<double> weights;  ///< in standardized units
  double bias = 0.0;
  double lambda = 1.0;
  int iterations = 0;
  bool prior_only = false;

  double margin(std::span<const double> features) const;
  double probability(std::span<const double> features) const;

  std::string to_json() const;
  static LogisticModel from_json(const std::string& text);
};

/// (1/N) sum log(1 + exp(-y z)) + lambda/(2N) ||w||^2 with z = theta_0 + x . theta_1..p.
/// Fills grad (same length as theta) when non-null.
double logistic_objective(const DenseFactor& x, std::span<const Sign> y, double lambda,
                          std::span<const double> theta, std::vector<double>* grad);

/// Full-batch gradient descent with Barzilai-Borwein trial steps and Armijo
/// backtracking. A single-class label set yields a prior-only model.
LogisticModel train_logistic(const FeatureMatrix& f, std::span<const Sign> labels, const LogisticOptions& opts = {},
                             std::vector<double>* objective_trace = nullptr);

/// sign(P - 0.5) for row `row` of f; P = 0.5 predicts +1.
Sign predict_hoc(const LogisticModel& model, const FeatureMatrix& f, std::size_t row);

}  // namespace signet
