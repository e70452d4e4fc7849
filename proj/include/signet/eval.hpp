#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "signet/predictors.hpp"
#include "signet/synthgen.hpp"

namespace signet {

enum class ProtocolKind { loo, kfold, train_test, heldout };

struct Protocol {
  ProtocolKind kind = ProtocolKind::kfold;
  int folds = 10;
  double fraction = 0.1;       ///< test share for train-test
  std::size_t subsample = 0;   ///< loo / heldout: evaluate at most this many queries (0 = all)
};

struct SyntheticSource {
  std::vector<NodeId> sizes;
  SamplingSpec sampling;
};

struct ExperimentConfig {
  std::optional<std::string> graph_path;
  bool directed = false;
  std::optional<SyntheticSource> synthetic;
  MethodSpec method;
  Protocol protocol;
  std::uint64_t seed = 1;
  std::vector<std::size_t> thresholds{0};
  std::string output;
  bool deterministic = false;
};

/// One evaluated query.
struct EdgeRecord {
  EdgeQuery query;
  Sign truth = 1;
  Sign predicted = 1;
  std::size_t embeddedness = 0;
};

struct BucketStat {
  std::size_t threshold = 0;
  std::size_t count = 0;
  std::optional<double> accuracy;  ///< empty bucket: none
  std::optional<double> fpr;       ///< no true negatives: none
  double pos_fraction = 0.0;
};

/// Statistics over records with embeddedness >= T for each T.
std::vector<BucketStat> accuracy_by_embeddedness(const std::vector<EdgeRecord>& records,
                                                 const std::vector<std::size_t>& thresholds);

struct ResultRow {
  std::string method;
  std::string protocol;
  std::string fold;  ///< fold index, "all" or "mean"
  std::size_t threshold = 0;
  std::size_t n_edges = 0;
  std::optional<double> accuracy;
  std::optional<double> fpr;
  double pos_fraction = 0.0;
  double seconds = 0.0;
  std::uint64_t seed = 0;
  PhaseTimes phases;
};

struct EvalOutput {
  std::vector<ResultRow> rows;
  std::vector<std::vector<EdgeRecord>> records;  ///< per fold
};

EvalOutput kfold_eval(const SignedGraph& g, const MethodSpec& method, int folds, std::uint64_t seed,
                      const std::vector<std::size_t>& thresholds = {0});
EvalOutput train_test_eval(const SignedGraph& g, const MethodSpec& method, double fraction, std::uint64_t seed,
                           const std::vector<std::size_t>& thresholds = {0});
/// Every edge in turn is hidden and predicted (per-query methods only).
EvalOutput loo_eval(const SignedGraph& g, const MethodSpec& method, std::size_t subsample, std::uint64_t seed,
                    const std::vector<std::size_t>& thresholds = {0});
/// Trains on the whole sampled graph and predicts every unobserved pair i < j
/// against the ground truth.
EvalOutput heldout_eval(const SignedGraph& g, const GroundTruth& gt, const MethodSpec& method, std::size_t subsample,
                        std::uint64_t seed, const std::vector<std::size_t>& thresholds = {0});

std::string protocol_name(const Protocol& p);

/// Builds the source, runs the protocol and returns the rows. Seconds are
/// zeroed in deterministic mode.
EvalOutput run_experiment(const ExperimentConfig& cfg);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
MethodSpec method_from_json(const nlohmann::json& j);
nlohmann::json method_to_json(const MethodSpec& m);

/// Sets a dotted key path ("source.sparsity") inside a JSON object.
void set_dotted(nlohmann::json& j, const std::string& path, const nlohmann::json& value);

inline constexpr const char* kCsvHeader = "method,protocol,fold,threshold,n_edges,accuracy,fpr,pos_fraction,seconds,seed";
void write_csv_row(std::ostream& out, const ResultRow& r);
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);

struct SweepCell {
  std::size_t index = 0;
  nlohmann::json params;  ///< dotted key -> value
  ExperimentConfig config;
  std::vector<ResultRow> rows;
  std::optional<std::string> error;
};

struct SweepSpec {
  nlohmann::json base;
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> grid;
  std::vector<std::uint64_t> seeds;  ///< empty: the base seed
};

SweepSpec sweep_from_json(const nlohmann::json& j);
/// Runs every grid cell and seed; failures are recorded per cell.
std::vector<SweepCell> run_sweep(const SweepSpec& spec, bool deterministic);
/// CSV with a leading cell column.
void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells);
nlohmann::json sweep_manifest(const SweepSpec& spec, const std::vector<SweepCell>& cells);

}  // namespace signet
