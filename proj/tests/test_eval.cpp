#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "signet/eval.hpp"

using namespace signet;

namespace {

SignedGraph two_cluster_graph(NodeId n, double p, std::uint64_t seed) {
  const auto gt = make_weakly_balanced(std::vector<NodeId>{n / 2, n - n / 2});
  SamplingSpec s;
  s.sparsity = p;
  s.seed = seed;
  return sample(gt, s);
}

MethodSpec method(const std::string& name) {
  MethodSpec m;
  m.name = name;
  return m;
}

}  // namespace

TEST_CASE("const+ accuracy equals the positive share") {
  std::vector<SignedEdge> e;
  for (NodeId i = 0; i < 50; ++i) e.push_back({i, static_cast<NodeId>(i + 50), static_cast<Sign>(i % 5 == 0 ? -1 : 1)});
  const SignedGraph g(100, e, false);
  const auto out = kfold_eval(g, method("const+"), 10, 3);
  REQUIRE(out.rows.size() == 11);
  CHECK(out.rows.back().fold == "mean");
  std::size_t tested = 0, correct = 0;
  for (const auto& f : out.records)
    for (const auto& r : f) {
      ++tested;
      correct += r.truth == r.predicted;
    }
  CHECK(tested == 50);
  CHECK(static_cast<double>(correct) / tested == doctest::Approx(0.8));
  const auto tt = train_test_eval(g, method("const+"), 0.2, 4);
  CHECK(tt.rows[0].n_edges == 10);
}

TEST_CASE("k-fold partitions the edges") {
  const auto g = two_cluster_graph(30, 0.3, 2);
  const auto out = kfold_eval(g, method("moi"), 7, 11);
  REQUIRE(out.records.size() == 7);
  std::set<std::pair<NodeId, NodeId>> seen;
  std::size_t lo = g.num_edges(), hi = 0;
  for (const auto& f : out.records) {
    lo = std::min(lo, f.size());
    hi = std::max(hi, f.size());
    for (const auto& r : f) {
      CHECK(seen.insert({std::min(r.query.i, r.query.j), std::max(r.query.i, r.query.j)}).second);
      CHECK(r.truth == g.sign(r.query.i, r.query.j));
    }
  }
  CHECK(seen.size() == g.num_edges());
  CHECK(hi - lo <= 1);
  const auto again = kfold_eval(g, method("moi"), 7, 11);
  CHECK(again.records[3].size() == out.records[3].size());
  CHECK(again.records[3][0].query.i == out.records[3][0].query.i);
  CHECK_THROWS_AS(kfold_eval(SignedGraph(4, {{0, 1, 1}, {2, 3, 1}}, false), method("moi"), 3, 1), Error);
}

TEST_CASE("leave-one-out on a dense balanced graph is exact") {
  const auto g = two_cluster_graph(20, 0.6, 8);
  const auto out = loo_eval(g, method("moi"), 0, 1);
  REQUIRE(out.rows.size() == 1);
  CHECK(out.rows[0].n_edges == g.num_edges());
  CHECK(*out.rows[0].accuracy == 1.0);
  const auto sub = loo_eval(g, method("moi"), 30, 1);
  CHECK(sub.records[0].size() == 30);
  CHECK(sub.rows[0].protocol == "loo-sub30");
  CHECK_THROWS_AS(loo_eval(g, method("lr-svp"), 0, 1), Error);
}

TEST_CASE("isolated edges fall back to the positive tie rule") {
  const SignedGraph g(4, {{0, 1, -1}, {2, 3, -1}}, false);
  const auto out = loo_eval(g, method("moi"), 0, 1);
  for (const auto& r : out.records[0]) {
    CHECK(r.predicted == 1);
    CHECK(r.embeddedness == 0);
  }
  CHECK(*out.rows[0].accuracy == 0.0);
  CHECK(*out.rows[0].fpr == 1.0);
}

TEST_CASE("embeddedness buckets") {
  std::mt19937_64 rng(71);
  std::uniform_int_distribution<int> emb(0, 6), bit(0, 1);
  std::vector<EdgeRecord> recs(200);
  for (auto& r : recs) {
    r.embeddedness = static_cast<std::size_t>(emb(rng));
    r.truth = bit(rng) ? 1 : -1;
    r.predicted = bit(rng) ? 1 : -1;
  }
  const std::vector<std::size_t> ts{0, 2, 5, 100};
  const auto b = accuracy_by_embeddedness(recs, ts);
  REQUIRE(b.size() == 4);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    std::size_t n = 0, ok = 0, neg = 0, fp = 0, pos = 0;
    for (const auto& r : recs) {
      if (r.embeddedness < ts[k]) continue;
      ++n;
      ok += r.truth == r.predicted;
      pos += r.truth > 0;
      if (r.truth < 0) {
        ++neg;
        fp += r.predicted > 0;
      }
    }
    CHECK(b[k].count == n);
    if (n == 0) {
      CHECK_FALSE(b[k].accuracy.has_value());
      CHECK_FALSE(b[k].fpr.has_value());
    } else {
      CHECK(*b[k].accuracy == doctest::Approx(static_cast<double>(ok) / n));
      CHECK(*b[k].fpr == doctest::Approx(static_cast<double>(fp) / neg));
      CHECK(b[k].pos_fraction == doctest::Approx(static_cast<double>(pos) / n));
    }
  }
}

TEST_CASE("record embeddedness matches the training graph") {
  const auto g = two_cluster_graph(24, 0.3, 9);
  const auto out = loo_eval(g, method("const+"), 0, 1);
  for (const auto& r : out.records[0]) CHECK(r.embeddedness == embeddedness(g, r.query));
}

TEST_CASE("held-out protocol scores unobserved pairs") {
  const auto gt = make_weakly_balanced(std::vector<NodeId>{10, 15});
  SamplingSpec s;
  s.sparsity = 0.5;
  s.seed = 2;
  const auto g = sample(gt, s);
  const auto out = heldout_eval(g, gt, method("moi"), 0, 1);
  CHECK(out.records[0].size() == 25u * 24 / 2 - g.num_edges());
  for (const auto& r : out.records[0]) {
    CHECK(g.sign(r.query.i, r.query.j) == 0);
    CHECK(r.truth == static_cast<Sign>(gt.entry(r.query.i, r.query.j)));
  }
  const auto sub = heldout_eval(g, gt, method("moi"), 40, 1);
  CHECK(sub.records[0].size() == 40);
}

TEST_CASE("deterministic experiments produce identical CSV") {
  ExperimentConfig cfg;
  SyntheticSource syn;
  syn.sizes = {10, 10};
  syn.sampling.sparsity = 0.4;
  cfg.synthetic = syn;
  cfg.method = method("moi");
  cfg.protocol.folds = 5;
  cfg.thresholds = {0, 3};
  cfg.deterministic = true;
  std::ostringstream a, b;
  write_csv(a, run_experiment(cfg).rows);
  write_csv(b, run_experiment(cfg).rows);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  std::istringstream lines(a.str());
  std::string line;
  std::getline(lines, line);
  int count = 0;
  while (std::getline(lines, line)) {
    ++count;
    CHECK(std::count(line.begin(), line.end(), ',') == 9);
  }
  CHECK(count == 12);
}

TEST_CASE("CSV rows leave undefined values empty") {
  ResultRow r;
  r.method = "moi-3";
  r.protocol = "kfold";
  r.fold = "0";
  r.threshold = 4;
  r.seed = 2;
  std::ostringstream o;
  write_csv_row(o, r);
  CHECK(o.str() == "moi-3,kfold,0,4,0,,,0.000000,0.000000,2\n");
}

TEST_CASE("experiment configs round-trip through JSON") {
  const auto j = nlohmann::json::parse(R"({
    "source": {"kind": "synthetic", "sizes": [5, 6], "sparsity": 0.3, "noise": 0.05},
    "method": {"name": "moi", "order": "inf"},
    "protocol": {"kind": "loo", "subsample": 10},
    "seed": 4, "thresholds": [0, 1]
  })");
  const auto c = config_from_json(j);
  CHECK(c.synthetic->sizes == std::vector<NodeId>{5, 6});
  CHECK(c.synthetic->sampling.noise == 0.05);
  CHECK(c.method.moi.order == kInfiniteOrder);
  CHECK(c.protocol.kind == ProtocolKind::loo);
  CHECK(c.protocol.subsample == 10);
  const auto back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"source": {"path": "x"}, "bogus": 1})")), ParseError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"source": {"path": "x"}, "method": {"order": "two"}})")),
                  ParseError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"method": {}})")), ParseError);
  nlohmann::json d = nlohmann::json::object();
  set_dotted(d, "source.sparsity", 0.2);
  CHECK(d["source"]["sparsity"] == 0.2);
}

TEST_CASE("sweeps expand the grid and record failures") {
  const auto j = nlohmann::json::parse(R"({
    "base": {"source": {"kind": "synthetic", "sizes": [8, 8], "sparsity": 0.5},
             "method": {"name": "moi"}, "protocol": {"kind": "kfold", "folds": 3}},
    "grid": {"source.noise": [0.0, 0.1], "method.order": [3, 4, 99]},
    "seeds": [1, 2]
  })");
  const auto spec = sweep_from_json(j);
  const auto cells = run_sweep(spec, true);
  REQUIRE(cells.size() == 12);
  std::size_t failed = 0;
  for (const auto& c : cells) {
    if (c.error) {
      ++failed;
      CHECK(c.params["method.order"] == 99);
    } else {
      CHECK(c.rows.size() == 4);
    }
  }
  CHECK(failed == 4);
  std::ostringstream a, b;
  write_sweep_csv(a, cells);
  write_sweep_csv(b, run_sweep(spec, true));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("cell,", 0) == 0);
  const auto man = sweep_manifest(spec, cells);
  CHECK(man["cells"].size() == 12);
}

TEST_CASE("two-fold LR-ALS in the recovery regime is exact") {
  const auto gt = make_weakly_balanced(std::vector<NodeId>{20, 40, 60});
  SamplingSpec s;
  s.sparsity = 0.8;
  s.seed = 4;
  const auto g = sample(gt, s);
  auto m = method("lr-als");
  m.rank = 3;
  m.als.sweeps = 15;
  const auto out = kfold_eval(g, m, 2, 1);
  REQUIRE(out.rows.size() == 3);
  CHECK(*out.rows[0].accuracy == 1.0);
  CHECK(*out.rows[1].accuracy == 1.0);
}

TEST_CASE("bucket counts shrink with the threshold and T = 0 is the overall accuracy") {
  const auto g = two_cluster_graph(40, 0.3, 12);
  const auto out = kfold_eval(g, method("moi"), 4, 2, {0, 1, 2, 4, 8, 16});
  for (std::size_t f = 0; f < 4; ++f) {
    std::size_t ok = 0;
    for (const auto& r : out.records[f]) ok += r.truth == r.predicted;
    CHECK(*out.rows[f * 6].accuracy == doctest::Approx(static_cast<double>(ok) / out.records[f].size()));
    for (std::size_t t = 1; t < 6; ++t) CHECK(out.rows[f * 6 + t].n_edges <= out.rows[f * 6 + t - 1].n_edges);
  }
}

TEST_CASE("a one-cell sweep equals a single run") {
  const auto base = nlohmann::json::parse(R"({
    "source": {"kind": "synthetic", "sizes": [8, 8], "sparsity": 0.5},
    "method": {"name": "moi"}, "protocol": {"kind": "kfold", "folds": 3}, "deterministic": true})");
  nlohmann::json sj = {{"base", base}, {"grid", {{"source.noise", {0.0}}}}};
  const auto cells = run_sweep(sweep_from_json(sj), true);
  REQUIRE(cells.size() == 1);
  std::ostringstream a, b;
  write_csv(a, cells[0].rows);
  write_csv(b, run_experiment(config_from_json(base)).rows);
  CHECK(a.str() == b.str());
}
