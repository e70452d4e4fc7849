#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "signet/hoc.hpp"
#include "signet/lowrank.hpp"
#include "signet/moi.hpp"

namespace signet {

/// Method name plus the hyperparameters of every family; only the block
/// matching `name` is read.
///
/// Names: const+, moi, hoc, lr-svp, lr-als, lr-sig, lr-sh.
struct MethodSpec {
  std::string name = "moi";
  MoiSpec moi;
  FeatureSpec hoc;
  LogisticOptions logistic;
  int rank = 5;
  SvpConfig svp;
  AlsConfig als;
  SgdConfig sgd;
};

bool is_known_method(const std::string& name);

struct Prediction {
  Sign sign = 1;
  double score = 0.0;
};

/// Wall-clock seconds per phase of the last fit/predict calls.
struct PhaseTimes {
  double features = 0.0;
  double training = 0.0;
  double prediction = 0.0;
  double total() const { return features + training + prediction; }
};

class SignPredictor {
public:
  virtual ~SignPredictor() = default;

  virtual std::string name() const = 0;
  /// Trains on the observed graph. The graph must outlive the predictor.
  virtual void fit(const SignedGraph& train, std::uint64_t seed) = 0;
  virtual std::vector<Prediction> predict(std::span<const EdgeQuery> queries) = 0;

  /// Per-query methods can score an observed edge with that edge hidden.
  virtual bool supports_masked() const { return false; }
  virtual std::vector<Prediction> predict_masked(std::span<const EdgeQuery> queries);

  /// Writes the trained model (HOC: JSON; low-rank: binary factors plus a
  /// `<path>.json` sidecar). Methods without a model throw.
  virtual void save_model(const std::string& path) const;

  const PhaseTimes& times() const { return times_; }

protected:
  PhaseTimes times_;
};

std::unique_ptr<SignPredictor> make_predictor(const MethodSpec& spec);

}  // namespace signet
