#include "signet/predictors.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <optional>

#include "signet/parallel.hpp"

namespace signet {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

class ConstPositive final : public SignPredictor {
public:
  std::string name() const override { return "const+"; }
  void fit(const SignedGraph&, std::uint64_t) override { times_ = {}; }
  std::vector<Prediction> predict(std::span<const EdgeQuery> q) override {
    return std::vector<Prediction>(q.size(), Prediction{1, 0.0});
  }
  bool supports_masked() const override { return true; }
  std::vector<Prediction> predict_masked(std::span<const EdgeQuery> q) override { return predict(q); }
};

class MoiPredictor final : public SignPredictor {
public:
  explicit MoiPredictor(MoiSpec spec) : spec_(spec) {}

  std::string name() const override { return "moi"; }

  void fit(const SignedGraph& train, std::uint64_t) override {
    times_ = {};
    const auto t0 = Clock::now();
    if (train.directed()) {
      sym_ = symmetrize(train);
      g_ = &*sym_;
    } else {
      sym_.reset();
      g_ = &train;
    }
    scorer_.emplace(*g_, spec_);
    times_.training = since(t0);
  }

  std::vector<Prediction> predict(std::span<const EdgeQuery> q) override {
    if (!scorer_) throw Error("moi: predict before fit");
    const auto t0 = Clock::now();
    std::vector<Prediction> out(q.size());
    // One propagation per distinct source serves all of its queries.
    std::map<NodeId, std::vector<std::size_t>> by_source;
    for (std::size_t r = 0; r < q.size(); ++r) {
      if (q[r].i >= g_->num_nodes() || q[r].j >= g_->num_nodes()) throw Error("moi: query node out of range");
      if (q[r].i == q[r].j) throw Error("moi: query endpoints must differ");
      by_source[q[r].i].push_back(r);
    }
    std::vector<std::pair<NodeId, const std::vector<std::size_t>*>> groups;
    for (const auto& [s, rows] : by_source) groups.emplace_back(s, &rows);
    parallel_for(groups.size(), [&](std::size_t gi) {
      const auto scores = scorer_->source_scores(groups[gi].first);
      for (std::size_t r : *groups[gi].second) out[r] = {sign_of(scores[q[r].j]), scores[q[r].j]};
    });
    times_.prediction = since(t0);
    return out;
  }

  bool supports_masked() const override { return true; }

  std::vector<Prediction> predict_masked(std::span<const EdgeQuery> q) override {
    if (!scorer_) throw Error("moi: predict before fit");
    const auto t0 = Clock::now();
    std::vector<Prediction> out(q.size());
    parallel_for(q.size(), [&](std::size_t r) {
      const double s = scorer_->score(q[r], true);
      out[r] = {sign_of(s), s};
    });
    times_.prediction = since(t0);
    return out;
  }

private:
  MoiSpec spec_;
  std::optional<SignedGraph> sym_;
  const SignedGraph* g_ = nullptr;
  std::optional<MoiScorer> scorer_;
};

class HocPredictor final : public SignPredictor {
public:
  HocPredictor(FeatureSpec fs, LogisticOptions lo) : fs_(fs), lo_(lo) {}

  std::string name() const override { return "hoc"; }

  void fit(const SignedGraph& train, std::uint64_t) override {
    times_ = {};
    g_ = &train;
    std::vector<EdgeQuery> q;
    std::vector<Sign> y;
    q.reserve(train.num_edges());
    y.reserve(train.num_edges());
    for (const auto& e : train.edges()) {
      q.push_back({e.src, e.dst});
      y.push_back(e.sign);
    }
    auto t0 = Clock::now();
    const auto f = extract_features(train, fs_, q, true);
    times_.features = since(t0);
    t0 = Clock::now();
    model_ = train_logistic(f, y, lo_);
    times_.training = since(t0);
  }

  std::vector<Prediction> predict(std::span<const EdgeQuery> q) override {
    if (!g_) throw Error("hoc: predict before fit");
    auto t0 = Clock::now();
    const auto f = extract_features(*g_, fs_, q, true);
    times_.features += since(t0);
    t0 = Clock::now();
    std::vector<Prediction> out(q.size());
    for (std::size_t r = 0; r < q.size(); ++r) {
      const auto row = f.values.row(static_cast<Eigen::Index>(r));
      const double m = model_.margin(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
      out[r] = {sign_of(m), m};
    }
    times_.prediction = since(t0);
    return out;
  }

  void save_model(const std::string& path) const override {
    if (!g_) throw Error("hoc: save before fit");
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << model_.to_json() << '\n';
  }

private:
  FeatureSpec fs_;
  LogisticOptions lo_;
  const SignedGraph* g_ = nullptr;
  LogisticModel model_;
};

class LowRankPredictor final : public SignPredictor {
public:
  explicit LowRankPredictor(MethodSpec spec) : spec_(std::move(spec)) {}

  std::string name() const override { return spec_.name; }

  void fit(const SignedGraph& train, std::uint64_t seed) override {
    times_ = {};
    const auto t0 = Clock::now();
    if (spec_.name == "lr-svp") {
      SvpConfig c = spec_.svp;
      c.rank = spec_.rank;
      c.seed = seed;
      f_ = svp_complete(train, c).factors;
    } else if (spec_.name == "lr-als") {
      AlsConfig c = spec_.als;
      c.rank = spec_.rank;
      c.seed = seed;
      c.record_objective = false;
      f_ = mf_als(train, c).factors;
    } else {
      SgdConfig c = spec_.sgd;
      c.rank = spec_.rank;
      c.seed = seed;
      c.loss = spec_.name == "lr-sig" ? LossKind::sigmoid : LossKind::square_hinge;
      f_ = mf_sgd(train, c).factors;
    }
    times_.training = since(t0);
    fitted_ = true;
  }

  std::vector<Prediction> predict(std::span<const EdgeQuery> q) override {
    if (!fitted_) throw Error(spec_.name + ": predict before fit");
    const auto t0 = Clock::now();
    std::vector<Prediction> out(q.size());
    for (std::size_t r = 0; r < q.size(); ++r) {
      const Sign s = predict_lr(f_, q[r]);
      out[r] = {s, f_.score(q[r].i, q[r].j)};
    }
    times_.prediction = since(t0);
    return out;
  }

  void save_model(const std::string& path) const override {
    if (!fitted_) throw Error(spec_.name + ": save before fit");
    write_factors(f_, path);
    std::ofstream meta(path + ".json");
    if (!meta) throw Error("cannot open " + path + ".json for writing");
    meta << "{\"method\": \"" << spec_.name << "\", \"n\": " << f_.num_nodes() << ", \"k\": " << f_.rank()
         << ", \"layout\": \"uint64 n, uint64 k, row-major float64 W (n x k), row-major float64 H (n x k)\"}\n";
  }

private:
  MethodSpec spec_;
  FactorPair f_;
  bool fitted_ = false;
};

}  // namespace

void SignPredictor::save_model(const std::string&) const { throw Error(name() + " has no trained model to save"); }

std::vector<Prediction> SignPredictor::predict_masked(std::span<const EdgeQuery>) {
  throw Error(name() + " does not support leave-one-out prediction");
}

bool is_known_method(const std::string& name) {
  static const char* names[] = {"const+", "moi", "hoc", "lr-svp", "lr-als", "lr-sig", "lr-sh"};
  return std::find(std::begin(names), std::end(names), name) != std::end(names);
}

std::unique_ptr<SignPredictor> make_predictor(const MethodSpec& spec) {
  if (spec.name == "const+") return std::make_unique<ConstPositive>();
  if (spec.name == "moi") return std::make_unique<MoiPredictor>(spec.moi);
  if (spec.name == "hoc") return std::make_unique<HocPredictor>(spec.hoc, spec.logistic);
  if (spec.name.rfind("lr-", 0) == 0 && is_known_method(spec.name)) return std::make_unique<LowRankPredictor>(spec);
  throw Error("unknown method '" + spec.name + "' (expected const+, moi, hoc, lr-svp, lr-als, lr-sig, lr-sh)");
}

}  // namespace signet
