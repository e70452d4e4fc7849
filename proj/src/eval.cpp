#include "signet/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include "signet/parallel.hpp"

namespace signet {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<EdgeRecord> score_queries(SignPredictor& pred, const SignedGraph& train, std::span<const EdgeQuery> q,
                                      std::span<const Sign> truth, bool masked) {
  const auto p = masked ? pred.predict_masked(q) : pred.predict(q);
  std::vector<EdgeRecord> rec(q.size());
  for (std::size_t r = 0; r < q.size(); ++r)
    rec[r] = EdgeRecord{q[r], truth[r], p[r].sign, embeddedness(train, q[r])};
  return rec;
}

std::vector<ResultRow> rows_for(const std::string& method, const std::string& protocol, const std::string& fold,
                                const std::vector<EdgeRecord>& rec, const std::vector<std::size_t>& thresholds,
                                double seconds, const PhaseTimes& phases, std::uint64_t seed) {
  std::vector<ResultRow> rows;
  for (const auto& b : accuracy_by_embeddedness(rec, thresholds)) {
    ResultRow r;
    r.method = method;
    r.protocol = protocol;
    r.fold = fold;
    r.threshold = b.threshold;
    r.n_edges = b.count;
    r.accuracy = b.accuracy;
    r.fpr = b.fpr;
    r.pos_fraction = b.pos_fraction;
    r.seconds = seconds;
    r.phases = phases;
    r.seed = seed;
    rows.push_back(r);
  }
  return rows;
}

void append_mean_rows(std::vector<ResultRow>& rows, std::size_t folds, std::size_t per_fold) {
  for (std::size_t t = 0; t < per_fold; ++t) {
    ResultRow m = rows[t];
    m.fold = "mean";
    m.n_edges = 0;
    m.seconds = 0.0;
    m.phases = {};
    double acc = 0.0, fpr = 0.0, pos = 0.0;
    std::size_t na = 0, nf = 0;
    for (std::size_t f = 0; f < folds; ++f) {
      const auto& r = rows[f * per_fold + t];
      m.n_edges += r.n_edges;
      m.seconds += r.seconds;
      m.phases.features += r.phases.features;
      m.phases.training += r.phases.training;
      m.phases.prediction += r.phases.prediction;
      pos += r.pos_fraction;
      if (r.accuracy) acc += *r.accuracy, ++na;
      if (r.fpr) fpr += *r.fpr, ++nf;
    }
    m.pos_fraction = pos / static_cast<double>(folds);
    m.accuracy = na ? std::optional<double>(acc / static_cast<double>(na)) : std::nullopt;
    m.fpr = nf ? std::optional<double>(fpr / static_cast<double>(nf)) : std::nullopt;
    rows.push_back(m);
  }
}

std::string method_label(const MethodSpec& m) {
  if (m.name == "moi") return m.moi.order == kInfiniteOrder ? "moi-inf" : "moi-" + std::to_string(m.moi.order);
  if (m.name == "hoc")
    return "hoc-" + std::to_string(m.hoc.max_order) + (m.hoc.variant == FeatureVariant::reduced ? "-reduced" : "");
  return m.name;
}

EvalOutput split_eval(const SignedGraph& g, const MethodSpec& method, const std::vector<std::vector<std::size_t>>& test_sets,
                      const std::string& protocol, std::uint64_t seed, const std::vector<std::size_t>& thresholds) {
  const std::size_t folds = test_sets.size();
  std::vector<std::vector<ResultRow>> fold_rows(folds);
  EvalOutput out;
  out.records.resize(folds);
  parallel_for(folds, [&](std::size_t f) {
    try {
      const auto& test = test_sets[f];
      const SignedGraph train = remove_edges(g, test);
      std::vector<EdgeQuery> q;
      std::vector<Sign> truth;
      for (std::size_t id : test) {
        const auto& e = g.edges()[id];
        if (train.sign(e.src, e.dst) != 0) throw Error("test edge leaked into the training graph");
        q.push_back({e.src, e.dst});
        truth.push_back(e.sign);
      }
      auto pred = make_predictor(method);
      const auto t0 = Clock::now();
      pred->fit(train, seed);
      out.records[f] = score_queries(*pred, train, q, truth, false);
      const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
      fold_rows[f] = rows_for(method_label(method), protocol, std::to_string(f), out.records[f], thresholds, secs,
                              pred->times(), seed);
    } catch (const std::exception& e) {
      throw Error("fold " + std::to_string(f) + ": " + e.what());
    }
  });
  for (auto& r : fold_rows) out.rows.insert(out.rows.end(), r.begin(), r.end());
  if (folds > 1) append_mean_rows(out.rows, folds, thresholds.size());
  return out;
}

std::vector<std::size_t> shuffled_ids(std::size_t m, std::uint64_t seed) {
  std::vector<std::size_t> ids(m);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  return ids;
}

}  // namespace

std::vector<BucketStat> accuracy_by_embeddedness(const std::vector<EdgeRecord>& records,
                                                 const std::vector<std::size_t>& thresholds) {
  std::vector<BucketStat> out;
  for (std::size_t t : thresholds) {
    BucketStat b;
    b.threshold = t;
    std::size_t correct = 0, pos = 0, neg = 0, false_pos = 0;
    for (const auto& r : records) {
      if (r.embeddedness < t) continue;
      ++b.count;
      correct += r.truth == r.predicted;
      if (r.truth > 0) {
        ++pos;
      } else {
        ++neg;
        false_pos += r.predicted > 0;
      }
    }
    if (b.count) {
      b.accuracy = static_cast<double>(correct) / static_cast<double>(b.count);
      b.pos_fraction = static_cast<double>(pos) / static_cast<double>(b.count);
    }
    if (neg) b.fpr = static_cast<double>(false_pos) / static_cast<double>(neg);
    out.push_back(b);
  }
  return out;
}

EvalOutput kfold_eval(const SignedGraph& g, const MethodSpec& method, int folds, std::uint64_t seed,
                      const std::vector<std::size_t>& thresholds) {
  const std::size_t m = g.num_edges();
  if (folds < 2) throw Error("kfold: folds must be at least 2");
  if (static_cast<std::size_t>(folds) > m)
    throw Error("kfold: " + std::to_string(folds) + " folds exceed the edge count " + std::to_string(m));
  const auto ids = shuffled_ids(m, seed);
  std::vector<std::vector<std::size_t>> test(static_cast<std::size_t>(folds));
  for (std::size_t f = 0; f < test.size(); ++f) {
    const std::size_t b = f * m / test.size(), e = (f + 1) * m / test.size();
    test[f].assign(ids.begin() + static_cast<std::ptrdiff_t>(b), ids.begin() + static_cast<std::ptrdiff_t>(e));
    std::sort(test[f].begin(), test[f].end());
  }
  return split_eval(g, method, test, "kfold", seed, thresholds);
}

EvalOutput train_test_eval(const SignedGraph& g, const MethodSpec& method, double fraction, std::uint64_t seed,
                           const std::vector<std::size_t>& thresholds) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error("train-test: fraction must lie in (0, 1)");
  const std::size_t m = g.num_edges();
  if (m < 2) throw Error("train-test: need at least two edges");
  auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(m)));
  count = std::clamp<std::size_t>(count, 1, m - 1);
  const auto ids = shuffled_ids(m, seed);
  std::vector<std::vector<std::size_t>> test(1, std::vector<std::size_t>(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(count)));
  std::sort(test[0].begin(), test[0].end());
  return split_eval(g, method, test, "train-test", seed, thresholds);
}

EvalOutput loo_eval(const SignedGraph& g, const MethodSpec& method, std::size_t subsample, std::uint64_t seed,
                    const std::vector<std::size_t>& thresholds) {
  auto pred = make_predictor(method);
  if (!pred->supports_masked()) throw Error("loo: method " + method.name + " is not a per-query method");
  std::vector<std::size_t> ids;
  if (subsample && subsample < g.num_edges()) {
    ids = shuffled_ids(g.num_edges(), seed);
    ids.resize(subsample);
    std::sort(ids.begin(), ids.end());
  } else {
    ids.resize(g.num_edges());
    std::iota(ids.begin(), ids.end(), std::size_t{0});
  }
  std::vector<EdgeQuery> q;
  std::vector<Sign> truth;
  for (std::size_t id : ids) {
    q.push_back({g.edges()[id].src, g.edges()[id].dst});
    truth.push_back(g.edges()[id].sign);
  }
  const auto t0 = Clock::now();
  pred->fit(g, seed);
  EvalOutput out;
  // Common neighbours of i and j do not depend on the edge (i, j) itself.
  out.records.push_back(score_queries(*pred, g, q, truth, true));
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const std::string proto = subsample && subsample < g.num_edges() ? "loo-sub" + std::to_string(subsample) : "loo";
  out.rows = rows_for(method_label(method), proto, "all", out.records[0], thresholds, secs, pred->times(), seed);
  return out;
}

EvalOutput heldout_eval(const SignedGraph& g, const GroundTruth& gt, const MethodSpec& method, std::size_t subsample,
                        std::uint64_t seed, const std::vector<std::size_t>& thresholds) {
  if (gt.n != g.num_nodes()) throw Error("heldout: ground truth size does not match the graph");
  const NodeId n = g.num_nodes();
  const auto observed = [&](NodeId i, NodeId j) { return g.sign(i, j) != 0 || g.sign(j, i) != 0; };
  const double total_pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double unobserved = total_pairs - static_cast<double>(g.num_edges());
  std::vector<EdgeQuery> q;
  if (subsample == 0 || static_cast<double>(subsample) * 4.0 >= unobserved) {
    if (unobserved > 5e7) throw Error("heldout: too many unobserved pairs; set a subsample size");
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = i + 1; j < n; ++j)
        if (!observed(i, j)) q.push_back({i, j});
    if (subsample && subsample < q.size()) {
      std::mt19937_64 rng(seed ^ 0xa0761d6478bd642fULL);
      std::shuffle(q.begin(), q.end(), rng);
      q.resize(subsample);
    }
  } else {
    std::mt19937_64 rng(seed ^ 0xa0761d6478bd642fULL);
    std::uniform_int_distribution<NodeId> pick(0, n - 1);
    std::set<std::pair<NodeId, NodeId>> chosen;
    while (chosen.size() < subsample) {
      NodeId i = pick(rng), j = pick(rng);
      if (i == j) continue;
      if (i > j) std::swap(i, j);
      if (!observed(i, j)) chosen.insert({i, j});
    }
    for (const auto& [i, j] : chosen) q.push_back({i, j});
  }
  std::sort(q.begin(), q.end(), [](const EdgeQuery& a, const EdgeQuery& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  std::vector<Sign> truth(q.size());
  for (std::size_t r = 0; r < q.size(); ++r) truth[r] = static_cast<Sign>(gt.entry(q[r].i, q[r].j));

  auto pred = make_predictor(method);
  const auto t0 = Clock::now();
  pred->fit(g, seed);
  EvalOutput out;
  out.records.push_back(score_queries(*pred, g, q, truth, false));
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const std::string proto = subsample ? "heldout-sub" + std::to_string(subsample) : "heldout";
  out.rows = rows_for(method_label(method), proto, "all", out.records[0], thresholds, secs, pred->times(), seed);
  return out;
}

std::string protocol_name(const Protocol& p) {
  switch (p.kind) {
    case ProtocolKind::loo:
      return "loo";
    case ProtocolKind::kfold:
      return "kfold";
    case ProtocolKind::train_test:
      return "train-test";
    case ProtocolKind::heldout:
      return "heldout";
  }
  return "?";
}

EvalOutput run_experiment(const ExperimentConfig& cfg) {
  if (cfg.graph_path.has_value() == cfg.synthetic.has_value())
    throw Error("experiment: exactly one dataset source (file or synthetic) is required");
  SignedGraph g;
  std::optional<GroundTruth> gt;
  if (cfg.graph_path) {
    g = load_edgelist(*cfg.graph_path, cfg.directed);
  } else {
    gt = make_weakly_balanced(cfg.synthetic->sizes);
    SamplingSpec s = cfg.synthetic->sampling;
    s.seed = cfg.seed;
    g = sample(*gt, s);
  }
  EvalOutput out;
  switch (cfg.protocol.kind) {
    case ProtocolKind::kfold:
      out = kfold_eval(g, cfg.method, cfg.protocol.folds, cfg.seed, cfg.thresholds);
      break;
    case ProtocolKind::train_test:
      out = train_test_eval(g, cfg.method, cfg.protocol.fraction, cfg.seed, cfg.thresholds);
      break;
    case ProtocolKind::loo:
      out = loo_eval(g, cfg.method, cfg.protocol.subsample, cfg.seed, cfg.thresholds);
      break;
    case ProtocolKind::heldout:
      if (!gt) throw Error("heldout protocol requires a synthetic source");
      out = heldout_eval(g, *gt, cfg.method, cfg.protocol.subsample, cfg.seed, cfg.thresholds);
      break;
  }
  if (cfg.deterministic)
    for (auto& r : out.rows) {
      r.seconds = 0.0;
      r.phases = {};
    }
  return out;
}

void write_csv_row(std::ostream& out, const ResultRow& r) {
  const auto opt = [](const std::optional<double>& v) {
    if (!v) return std::string();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", *v);
    return std::string(buf);
  };
  char pos[32], secs[32];
  std::snprintf(pos, sizeof pos, "%.6f", r.pos_fraction);
  std::snprintf(secs, sizeof secs, "%.6f", r.seconds);
  out << r.method << ',' << r.protocol << ',' << r.fold << ',' << r.threshold << ',' << r.n_edges << ','
      << opt(r.accuracy) << ',' << opt(r.fpr) << ',' << pos << ',' << secs << ',' << r.seed << '\n';
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) write_csv_row(out, r);
}

}  // namespace signet
