#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "signet/balance.hpp"
#include "signet/clustering.hpp"
#include "signet/eval.hpp"
#include "signet/parallel.hpp"
#include "signet/predictors.hpp"
#include "signet/synthgen.hpp"

namespace {

using nlohmann::json;
using namespace signet;

constexpr const char* kVersion = "1.0.0";

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  bool deterministic = false;
  std::string output;
};

// Writes to --output when given, stdout otherwise.
class Sink {
public:
  explicit Sink(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw Error("cannot open " + path + " for writing");
  }
  std::ostream& out() { return file_ ? *file_ : std::cout; }
  void close() {
    if (!file_) return;
    file_->close();
    if (!*file_) throw Error("write failed");
  }

private:
  std::unique_ptr<std::ofstream> file_;
};

void add_globals(CLI::App* a, Globals& g) {
  a->add_option("--seed", g.seed, "random seed")->capture_default_str();
  a->add_option("--threads", g.threads, "worker threads (0 = all cores)")->capture_default_str();
  a->add_flag("--deterministic", g.deterministic, "byte-identical output: timings written as 0");
  a->add_option("-o,--output", g.output, "output file (default stdout)");
}

bool seed_given(const CLI::App* sub) { return sub->count("--seed") + sub->get_parent()->count("--seed") > 0; }

void print_config(const std::string& command, json cfg, const Globals& g) {
  cfg["command"] = command;
  cfg["seed"] = g.seed;
  cfg["threads"] = g.threads;
  cfg["deterministic"] = g.deterministic;
  cfg["output"] = g.output;
  std::cerr << "# config " << cfg.dump() << '\n';
}

std::vector<NodeId> parse_sizes(const std::string& s) {
  std::vector<NodeId> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(tok, &used);
      if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
      out.push_back(static_cast<NodeId>(v));
    } catch (const std::exception&) {
      throw UsageError("--sizes: expected positive integers separated by commas, got '" + s + "'");
    }
  }
  if (out.empty()) throw UsageError("--sizes must not be empty");
  return out;
}

SamplingKind parse_distribution(const std::string& s) {
  if (s == "uniform") return SamplingKind::uniform;
  if (s == "power-law") return SamplingKind::power_law;
  throw UsageError("--distribution: expected uniform or power-law");
}

std::vector<EdgeQuery> read_queries(const std::string& path, const SignedGraph& g) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open queries '" + path + "'");
  std::vector<EdgeQuery> q;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string a, b;
    if (!(ss >> a)) continue;
    if (!(ss >> b)) throw ParseError("queries line " + std::to_string(lineno) + ": expected two node ids");
    const auto i = g.find_label(a), j = g.find_label(b);
    if (!i || !j)
      throw ParseError("queries line " + std::to_string(lineno) + ": unknown node '" + (i ? b : a) + "'");
    if (*i == *j) throw ParseError("queries line " + std::to_string(lineno) + ": self pair");
    q.push_back({*i, *j});
  }
  return q;
}

// Method flags shared by predict and evaluate. Empty/unset values leave the
// defaults untouched.
struct MethodFlags {
  std::string name = "moi";
  std::string order;
  double beta = 0.0;
  std::string variant = "directed";
  bool no_lower = false;
  int rank = 5;
  double lambda = 0.1;
  double logistic_lambda = 1.0;
  double step = 0.0;
  int iters = 0;

  void add(CLI::App* app) {
    app->add_option("--method", name, "const+, moi, hoc, lr-svp, lr-als, lr-sig, lr-sh")
        ->capture_default_str()
        ->check(CLI::IsMember({"const+", "moi", "hoc", "lr-svp", "lr-als", "lr-sig", "lr-sh"}));
    app->add_option("--order", order, "walk order l (moi: 3..10 or inf, default 3; hoc: 3..5, default 3)");
    app->add_option("--beta", beta, "moi damping; default 0.15/||A||_2");
    app->add_option("--variant", variant, "hoc feature variant")
        ->capture_default_str()
        ->check(CLI::IsMember({"directed", "reduced"}));
    app->add_flag("--no-lower", no_lower, "hoc: use only order-l columns");
    app->add_option("--rank", rank, "low-rank methods: target rank k")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--lambda", lambda, "lr-als / lr-sig / lr-sh ridge weight")->capture_default_str();
    app->add_option("--logistic-lambda", logistic_lambda, "hoc classifier ridge weight")->capture_default_str();
    app->add_option("--step", step, "lr-svp step (default n^2/(2|observed|)); lr-sig/lr-sh learning rate (default 0.05)");
    app->add_option("--iters", iters,
                    "lr-svp iterations (default 100), lr-als sweeps (default 10), lr-sig/lr-sh epochs (default 50)");
  }

  MethodSpec resolve(const CLI::App* app) const {
    json j;
    j["name"] = name;
    if (!order.empty()) {
      if (order == "inf") {
        j["order"] = "inf";
      } else {
        try {
          std::size_t used = 0;
          const int o = std::stoi(order, &used);
          if (used != order.size()) throw std::invalid_argument(order);
          j["order"] = o;
        } catch (const std::exception&) {
          throw UsageError("--order: expected an integer or inf");
        }
      }
    }
    if (app->count("--beta")) j["beta"] = beta;
    if (name == "hoc") {
      j["variant"] = variant;
      j["include_lower"] = !no_lower;
      j["logistic_lambda"] = logistic_lambda;
    }
    if (name.rfind("lr-", 0) == 0) {
      j["rank"] = rank;
      if (name != "lr-svp") j["lambda"] = lambda;
      if (app->count("--step")) j["step"] = step;
      if (app->count("--iters")) j[name == "lr-svp" ? "max_iter" : name == "lr-als" ? "sweeps" : "epochs"] = iters;
    }
    MethodSpec m;
    try {
      m = method_from_json(j);
    } catch (const ParseError& e) {
      throw UsageError(e.what());
    }
    if (!order.empty() && name != "moi" && name != "hoc") throw UsageError("--order applies to moi and hoc only");
    if (name == "moi" && m.moi.order != kInfiniteOrder && (m.moi.order < 3 || m.moi.order > 10))
      throw UsageError("--order: moi accepts 3..10 or inf");
    if (name == "hoc" && (m.hoc.max_order < 3 || m.hoc.max_order > 5)) throw UsageError("--order: hoc accepts 3..5");
    if (app->count("--beta") && (beta <= 0.0 || beta >= 1.0)) throw UsageError("--beta must lie in (0, 1)");
    return m;
  }
};

int cmd_generate(const Globals& gl, const std::string& sizes_s, double sparsity, double noise, const std::string& dist,
                 double gamma, std::string truth_path) {
  SyntheticSource s;
  s.sizes = parse_sizes(sizes_s);
  s.sampling.sparsity = sparsity;
  s.sampling.noise = noise;
  s.sampling.distribution = parse_distribution(dist);
  s.sampling.gamma = gamma;
  s.sampling.seed = gl.seed;
  if (gl.output.empty() || gl.output == "-") throw UsageError("generate: --output is required");
  if (truth_path.empty()) truth_path = gl.output + ".truth";
  print_config("generate",
               {{"sizes", s.sizes},
                {"sparsity", sparsity},
                {"noise", noise},
                {"distribution", dist},
                {"gamma", gamma},
                {"ground_truth", truth_path}},
               gl);
  const auto gt = make_weakly_balanced(s.sizes);
  const auto g = sample(gt, s.sampling);
  write_edgelist(g, gl.output);
  write_ground_truth(gt, g.labels(), truth_path);
  std::cerr << "# wrote " << g.num_edges() << " edges on " << g.num_nodes() << " nodes\n";
  return 0;
}

int cmd_predict(const Globals& gl, const CLI::App* app, const MethodFlags& mf, const std::string& graph_path,
                bool directed, const std::string& queries_path, const std::string& model_path) {
  const MethodSpec m = mf.resolve(app);
  json cfg = {{"method", method_to_json(m)},
              {"graph", graph_path},
              {"directed", directed},
              {"queries", queries_path},
              {"model", model_path}};
  print_config("predict", cfg, gl);
  const auto g = load_edgelist(graph_path, directed);
  const auto q = read_queries(queries_path, g);
  auto pred = make_predictor(m);
  pred->fit(g, gl.seed);
  const auto res = pred->predict(q);
  if (!model_path.empty()) pred->save_model(model_path);
  Sink sink(gl.output);
  auto& out = sink.out();
  char buf[64];
  for (std::size_t r = 0; r < q.size(); ++r) {
    std::snprintf(buf, sizeof buf, "%.10g", res[r].score);
    out << g.label(q[r].i) << '\t' << g.label(q[r].j) << '\t' << (res[r].sign > 0 ? "+1" : "-1") << '\t' << buf << '\n';
  }
  sink.close();
  return 0;
}

int cmd_cluster(const Globals& gl, const std::string& graph_path, const std::string& method, int k,
                const std::string& truth_path, const std::string& completion, int restarts) {
  print_config("cluster",
               {{"graph", graph_path},
                {"method", method},
                {"k", k},
                {"completion", completion},
                {"restarts", restarts},
                {"ground_truth", truth_path}},
               gl);
  std::vector<std::string> labels;
  std::optional<GroundTruth> gt;
  if (!truth_path.empty()) gt = read_ground_truth(truth_path, labels);
  const auto g = load_edgelist(graph_path, false, labels);
  ClusterAssignment a;
  if (method == "laplacian") {
    a = cluster_spectral_signed(g, k, gl.seed, SpectrumEnd::smallest, restarts);
  } else {
    McClusterOptions o;
    o.method = completion == "als" ? CompletionMethod::als : CompletionMethod::svp;
    o.restarts = restarts;
    a = mc_cluster(g, k, gl.seed, o);
  }
  Sink sink(gl.output);
  for (NodeId u = 0; u < g.num_nodes(); ++u) sink.out() << g.label(u) << '\t' << a.cluster[u] << '\n';
  sink.close();
  if (gt) {
    if (gt->n != g.num_nodes())
      throw Error("ground truth covers " + std::to_string(gt->n) + " nodes but the graph has " +
                  std::to_string(g.num_nodes()));
    const std::uint64_t agree = agreement(a, *gt);
    const double pairs = static_cast<double>(gt->n) * (gt->n - 1) / 2.0;
    std::cerr << json{{"agreement", agree}, {"pairs", static_cast<std::uint64_t>(pairs)}, {"ratio", agree / pairs}}.dump()
              << '\n';
  }
  return 0;
}

int cmd_stats(const Globals& gl, const std::string& graph_path, int shuffles, std::uint64_t max_wedges) {
  print_config("stats", {{"graph", graph_path}, {"shuffles", shuffles}, {"max_wedges", max_wedges}}, gl);
  const auto g = load_edgelist(graph_path, false);
  const auto bal = is_balanced(g);
  std::cerr << "# balanced " << (bal.balanced ? "yes" : "no");
  if (!bal.balanced) {
    std::cerr << " witness";
    for (const NodeId u : bal.cycle) std::cerr << ' ' << g.label(u);
  }
  std::cerr << '\n';
  const auto rep = surprise(g, shuffles, gl.seed, max_wedges);
  Sink sink(gl.output);
  auto& out = sink.out();
  out << "order,pattern,count,P,P0,S\n";
  char buf[128];
  for (const auto& r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f", r.p, r.p0, r.s);
    out << r.order << ',' << r.pattern << ',' << r.count << ',' << buf << '\n';
  }
  sink.close();
  return 0;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return text;
  }
}

void apply_sets(json& j, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set: expected key=value, got '" + s + "'");
    set_dotted(j, s.substr(0, eq), parse_value(s.substr(eq + 1)));
  }
}

int cmd_evaluate(const Globals& gl, const CLI::App* app, const std::string& config_path, const std::string& graph_path,
                 bool directed, const MethodFlags& mf, const std::string& protocol, int folds, double fraction,
                 std::size_t subsample, const std::vector<std::size_t>& thresholds,
                 const std::vector<std::string>& sets) {
  json j = config_path.empty() ? json::object() : load_json(config_path);
  if (!graph_path.empty()) j["source"] = {{"kind", "file"}, {"path", graph_path}, {"directed", directed}};
  if (app->count("--method")) j["method"] = method_to_json(mf.resolve(app));
  if (app->count("--protocol")) j["protocol"]["kind"] = protocol;
  if (app->count("--folds")) j["protocol"]["folds"] = folds;
  if (app->count("--fraction")) j["protocol"]["fraction"] = fraction;
  if (app->count("--subsample")) j["protocol"]["subsample"] = subsample;
  if (app->count("--thresholds")) j["thresholds"] = thresholds;
  if (seed_given(app)) j["seed"] = gl.seed;
  if (gl.deterministic) j["deterministic"] = true;
  if (!gl.output.empty()) j["output"] = gl.output;
  apply_sets(j, sets);
  ExperimentConfig cfg;
  try {
    cfg = config_from_json(j);
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  }
  Globals shown = gl;
  shown.seed = cfg.seed;
  shown.output = cfg.output;
  print_config("evaluate", config_to_json(cfg), shown);
  const auto out = run_experiment(cfg);
  Sink sink(cfg.output);
  write_csv(sink.out(), out.rows);
  sink.close();
  return 0;
}

int cmd_sweep(const Globals& gl, const CLI::App* app, const std::string& config_path, std::string manifest_path,
              const std::vector<std::string>& sets) {
  json j = load_json(config_path);
  if (!j.contains("base")) j["base"] = json::object();
  apply_sets(j["base"], sets);
  if (seed_given(app)) j["base"]["seed"] = gl.seed;
  SweepSpec spec;
  try {
    spec = sweep_from_json(j);
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  }
  if (manifest_path.empty() && !gl.output.empty() && gl.output != "-") manifest_path = gl.output + ".manifest.json";
  json shown = j;
  shown["manifest"] = manifest_path;
  print_config("sweep", shown, gl);
  const auto cells = run_sweep(spec, gl.deterministic);
  Sink sink(gl.output);
  write_sweep_csv(sink.out(), cells);
  sink.close();
  if (!manifest_path.empty()) {
    std::ofstream m(manifest_path);
    if (!m) throw Error("cannot open " + manifest_path + " for writing");
    m << sweep_manifest(spec, cells).dump(2) << '\n';
  }
  std::size_t failed = 0;
  for (const auto& c : cells)
    if (c.error) {
      ++failed;
      std::cerr << "error: cell " << c.index << ": " << *c.error << '\n';
    }
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sign prediction and clustering for signed networks"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Globals gl;
  add_globals(&app, gl);

  auto* gen = app.add_subcommand("generate", "sample a k-weakly balanced signed network");
  std::string sizes, dist = "uniform", truth;
  double sparsity = 0.1, noise = 0.0, gamma = 2.5;
  gen->add_option("--sizes", sizes, "cluster sizes, e.g. 20,40,60")->required();
  gen->add_option("--sparsity", sparsity, "expected share of observed pairs")->capture_default_str();
  gen->add_option("--noise", noise, "sign-flip probability")->capture_default_str();
  gen->add_option("--distribution", dist, "uniform or power-law")->capture_default_str();
  gen->add_option("--gamma", gamma, "power-law exponent")->capture_default_str();
  gen->add_option("--ground-truth", truth, "ground-truth path (default <output>.truth)");

  auto* pre = app.add_subcommand("predict", "predict signs of node pairs");
  MethodFlags pmf;
  std::string graph, queries, model;
  bool directed = false;
  pmf.add(pre);
  pre->add_option("--graph", graph, "edge list")->required()->check(CLI::ExistingFile);
  pre->add_flag("--directed", directed, "read the edge list as directed");
  pre->add_option("--queries", queries, "file of node pairs, one per line")->required()->check(CLI::ExistingFile);
  pre->add_option("--model", model, "write the trained model here (hoc, lr-*)");

  auto* clu = app.add_subcommand("cluster", "cluster nodes of an undirected signed network");
  std::string cmethod = "mc", completion = "svp", cgraph, ctruth;
  int k = 2, restarts = 5;
  clu->add_option("--graph", cgraph, "edge list")->required()->check(CLI::ExistingFile);
  clu->add_option("--method", cmethod, "laplacian or mc")
      ->capture_default_str()
      ->check(CLI::IsMember({"laplacian", "mc"}));
  clu->add_option("--k", k, "number of clusters")->capture_default_str();
  clu->add_option("--completion", completion, "mc: svp or als")
      ->capture_default_str()
      ->check(CLI::IsMember({"svp", "als"}));
  clu->add_option("--restarts", restarts, "k-means restarts")->capture_default_str()->check(CLI::PositiveNumber);
  clu->add_option("--ground-truth", ctruth, "node<TAB>cluster file; reports pair agreement")
      ->check(CLI::ExistingFile);

  auto* sta = app.add_subcommand("stats", "balance test and triangle / 4-cycle surprise table");
  std::string sgraph;
  int shuffles = 10;
  std::uint64_t max_wedges = 0;
  sta->add_option("--graph", sgraph, "edge list")->required()->check(CLI::ExistingFile);
  sta->add_option("--shuffles", shuffles, "sign permutations R")->capture_default_str()->check(CLI::PositiveNumber);
  sta->add_option("--max-wedges", max_wedges, "abort the 4-cycle scan beyond this many steps (0 = no limit)")
      ->capture_default_str();

  auto* eva = app.add_subcommand("evaluate", "run one experiment and write result rows as CSV");
  MethodFlags emf;
  std::string econfig, egraph, protocol = "kfold";
  bool edirected = false;
  int folds = 10;
  double fraction = 0.1;
  std::size_t subsample = 0;
  std::vector<std::size_t> thresholds{0};
  std::vector<std::string> esets;
  eva->add_option("--config", econfig, "experiment JSON")->check(CLI::ExistingFile);
  eva->add_option("--graph", egraph, "edge list (replaces the config source)")->check(CLI::ExistingFile);
  eva->add_flag("--directed", edirected, "with --graph: read as directed");
  emf.add(eva);
  eva->add_option("--protocol", protocol, "loo, kfold, train-test or heldout")
      ->capture_default_str()
      ->check(CLI::IsMember({"loo", "kfold", "train-test", "heldout"}));
  eva->add_option("--folds", folds, "kfold: fold count")->capture_default_str();
  eva->add_option("--fraction", fraction, "train-test: test share")->capture_default_str();
  eva->add_option("--subsample", subsample, "loo / heldout: query cap (0 = all)")->capture_default_str();
  eva->add_option("--thresholds", thresholds, "embeddedness thresholds")->delimiter(',')->capture_default_str();
  eva->add_option("--set", esets, "override a config key, e.g. --set source.sparsity=0.2");

  auto* swe = app.add_subcommand("sweep", "run a parameter grid");
  std::string sconfig, manifest;
  std::vector<std::string> ssets;
  swe->add_option("--config", sconfig, "sweep JSON")->required()->check(CLI::ExistingFile);
  swe->add_option("--manifest", manifest, "manifest path (default <output>.manifest.json)");
  swe->add_option("--set", ssets, "override a base config key");

  for (auto* sub : app.get_subcommands({})) add_globals(sub, gl);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    set_thread_count(gl.threads);
    if (gen->parsed()) return cmd_generate(gl, sizes, sparsity, noise, dist, gamma, truth);
    if (pre->parsed()) return cmd_predict(gl, pre, pmf, graph, directed, queries, model);
    if (clu->parsed()) return cmd_cluster(gl, cgraph, cmethod, k, ctruth, completion, restarts);
    if (sta->parsed()) return cmd_stats(gl, sgraph, shuffles, max_wedges);
    if (eva->parsed())
      return cmd_evaluate(gl, eva, econfig, egraph, edirected, emf, protocol, folds, fraction, subsample, thresholds,
                          esets);
    if (swe->parsed()) return cmd_sweep(gl, swe, sconfig, manifest, ssets);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
