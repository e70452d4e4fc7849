#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "signet/lowrank.hpp"
#include "signet/synthgen.hpp"

using namespace signet;

namespace {

SignedGraph full_graph(const GroundTruth& gt) {
  std::vector<SignedEdge> e;
  for (NodeId i = 0; i < gt.n; ++i)
    for (NodeId j = i + 1; j < gt.n; ++j) e.push_back({i, j, static_cast<Sign>(gt.entry(i, j))});
  return SignedGraph(gt.n, e, false);
}

double heldout_accuracy(const FactorPair& f, const SignedGraph& g, const GroundTruth& gt) {
  std::size_t ok = 0, total = 0;
  for (NodeId i = 0; i < gt.n; ++i)
    for (NodeId j = i + 1; j < gt.n; ++j) {
      if (g.sign(i, j) != 0) continue;
      ++total;
      ok += predict_lr(f, {i, j}) == gt.entry(i, j);
    }
  return static_cast<double>(ok) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("loss values and derivatives") {
  CHECK(loss_value(LossKind::sigmoid, 1, 0) == doctest::Approx(0.5));
  CHECK(loss_value(LossKind::square_hinge, 1, 2) == 0.0);
  CHECK(loss_value(LossKind::square_hinge, -1, 0.5) == doctest::Approx(2.25));
  CHECK(loss_value(LossKind::squared, 1, -1) == 4.0);
  std::mt19937_64 rng(41);
  std::normal_distribution<double> nd;
  for (auto kind : {LossKind::squared, LossKind::sigmoid, LossKind::square_hinge})
    for (int point = 0; point < 10; ++point) {
      const double x = point % 2 ? 1.0 : -1.0;
      double y = nd(rng);
      if (kind == LossKind::square_hinge && std::abs(1 - x * y) < 1e-3) y += 0.01;
      const double h = 1e-6;
      const double fd = (loss_value(kind, x, y + h) - loss_value(kind, x, y - h)) / (2 * h);
      const double an = loss_derivative(kind, x, y);
      CHECK(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(an)));
    }
}

TEST_CASE("SVP recovers a fully observed low-rank matrix in one step") {
  const auto gt = make_weakly_balanced(std::vector<NodeId>{5, 7, 8});
  const auto g = full_graph(gt);
  SvpConfig c;
  c.rank = 3;
  c.step = 1.0;
  c.max_iter = 1;
  const auto r = svp_complete(g, c);
  CHECK(r.iterations == 1);
  for (NodeId i = 0; i < gt.n; ++i)
    for (NodeId j = 0; j < gt.n; ++j)
      if (i != j) CHECK(predict_lr(r.factors, {i, j}) == gt.entry(i, j));
  c.rank = 0;
  CHECK_THROWS_AS(svp_complete(g, c), Error);
  c.rank = 3;
  c.step = -1.0;
  CHECK_THROWS_AS(svp_complete(g, c), Error);
}

TEST_CASE("SVP and ALS recover a sampled weakly balanced network") {
  const auto gt = make_weakly_balanced(std::vector<NodeId>{20, 40, 60});
  SamplingSpec s;
  s.sparsity = 0.4;
  s.seed = 3;
  const auto g = sample(gt, s);
  SvpConfig sc;
  sc.rank = 3;
  const auto svp = svp_complete(g, sc);
  CHECK(heldout_accuracy(svp.factors, g, gt) == 1.0);
  for (std::size_t t = 1; t < svp.factors.w.cols(); ++t) CHECK(svp.factors.w.col(t).norm() <= svp.factors.w.col(t - 1).norm() + 1e-9);

  AlsConfig ac;
  ac.rank = 3;
  ac.lambda = 0.1;
  ac.sweeps = 15;
  const auto als = mf_als(g, ac);
  const double als_acc = heldout_accuracy(als.factors, g, gt);
  CHECK(als_acc >= 0.99);
  for (std::size_t t = 1; t < als.objective.size(); ++t) CHECK(als.objective[t] <= als.objective[t - 1] * (1 + 1e-12));

  SgdConfig gc;
  gc.rank = 3;
  gc.loss = LossKind::sigmoid;
  gc.lambda = 0.01;
  gc.step = 0.1;
  gc.epochs = 200;
  const auto sgd = mf_sgd(g, gc);
  CHECK(heldout_accuracy(sgd.factors, g, gt) >= als_acc - 0.01);
}

TEST_CASE("ALS preconditions and small cases") {
  const auto gt = make_weakly_balanced(std::vector<NodeId>{6});
  const auto g = full_graph(gt);
  AlsConfig c;
  c.rank = 1;
  const auto r = mf_als(g, c);
  for (NodeId i = 0; i < 6; ++i)
    for (NodeId j = 0; j < 6; ++j)
      if (i != j) CHECK(predict_lr(r.factors, {i, j}) == 1);
  c.lambda = 0.0;
  CHECK_THROWS_AS(mf_als(g, c), Error);
  c.lambda = 0.1;
  c.rank = 7;
  CHECK_THROWS_AS(mf_als(g, c), Error);
}

TEST_CASE("ALS objective is monotone on random instances") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 5; ++trial) {
    const auto g = oracle::random_graph(rng, 30, 0.2, trial % 2 == 1);
    AlsConfig c;
    c.rank = 1 + trial;
    c.seed = 10 + trial;
    c.sweeps = 8;
    const auto r = mf_als(g, c);
    for (std::size_t t = 1; t < r.objective.size(); ++t) CHECK(r.objective[t] <= r.objective[t - 1] * (1 + 1e-12));
  }
}

TEST_CASE("SGD divergence guard") {
  const auto gt = make_weakly_balanced(std::vector<NodeId>{10, 10});
  SamplingSpec s;
  s.sparsity = 0.5;
  const auto g = sample(gt, s);
  SgdConfig c;
  c.rank = 2;
  c.loss = LossKind::squared;
  c.step = 50.0;
  c.epochs = 5;
  CHECK_THROWS_WITH_AS(mf_sgd(g, c), doctest::Contains("step size too large"), ConvergenceError);
}

TEST_CASE("SVP divergence guard") {
  const auto gt = make_weakly_balanced(std::vector<NodeId>(10, 30));
  SamplingSpec s;
  s.sparsity = 0.03;
  const auto g = sample(gt, s);
  SvpConfig c;
  c.rank = 10;
  CHECK_THROWS_WITH_AS(svp_complete(g, c), doctest::Contains("step size too large"), ConvergenceError);
  c.step = 300.0 * 300.0 / (20.0 * static_cast<double>(g.num_arcs()));
  const auto r = svp_complete(g, c);
  CHECK(r.residual.back() < r.residual.front());
}

TEST_CASE("relative observed error") {
  std::mt19937_64 rng(43);
  const auto g = oracle::random_graph(rng, 15, 0.4, false);
  const Eigen::MatrixXd a = oracle::dense(g);
  CHECK(relative_error_omega(a, g) == 0.0);
  CHECK(relative_error_omega(Eigen::MatrixXd(-a), g) == doctest::Approx(2.0));
  FactorPair f;
  f.w = DenseFactor::Random(15, 4);
  f.h = DenseFactor::Random(15, 4);
  const Eigen::MatrixXd x = f.w * f.h.transpose();
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 15; ++j)
      if (a(i, j) != 0) num += (x(i, j) - a(i, j)) * (x(i, j) - a(i, j)), den += a(i, j) * a(i, j);
  CHECK(std::abs(relative_error_omega(f, g) - std::sqrt(num / den)) < 1e-12);
}

TEST_CASE("prediction ties and factor files") {
  FactorPair f;
  f.w = DenseFactor::Zero(3, 2);
  f.h = DenseFactor::Zero(3, 2);
  f.w(0, 0) = 1;
  f.h(1, 1) = 1;
  f.h(2, 0) = -1;
  CHECK(predict_lr(f, {0, 1}) == 1);
  CHECK(predict_lr(f, {0, 2}) == -1);
  CHECK_THROWS_AS(predict_lr(f, {0, 3}), Error);
  const auto path = (std::filesystem::temp_directory_path() / "signet_factors.bin").string();
  write_factors(f, path);
  const auto g = read_factors(path);
  CHECK(g.w == f.w);
  CHECK(g.h == f.h);
  std::remove(path.c_str());
}

TEST_CASE("SGD is deterministic for a fixed seed") {
  const auto gt = make_weakly_balanced(std::vector<NodeId>{10, 15});
  SamplingSpec s;
  s.sparsity = 0.3;
  const auto g = sample(gt, s);
  SgdConfig c;
  c.rank = 2;
  c.epochs = 10;
  const auto a = mf_sgd(g, c), b = mf_sgd(g, c);
  CHECK(a.factors.w == b.factors.w);
  CHECK(a.factors.h == b.factors.h);
}
