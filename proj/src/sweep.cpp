#include <ostream>
#include <set>

#include "signet/eval.hpp"
#include "signet/parallel.hpp"

namespace signet {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [k, _] : j.items())
    if (!allowed.count(k)) throw ParseError(where + ": unknown key '" + k + "'");
}

template <class T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

SamplingKind parse_distribution(const std::string& s) {
  if (s == "uniform") return SamplingKind::uniform;
  if (s == "power-law" || s == "power_law") return SamplingKind::power_law;
  throw ParseError("unknown sampling distribution '" + s + "'");
}

ProtocolKind parse_protocol(const std::string& s) {
  if (s == "loo") return ProtocolKind::loo;
  if (s == "kfold") return ProtocolKind::kfold;
  if (s == "train-test") return ProtocolKind::train_test;
  if (s == "heldout") return ProtocolKind::heldout;
  throw ParseError("unknown protocol '" + s + "' (expected loo, kfold, train-test, heldout)");
}

}  // namespace

MethodSpec method_from_json(const json& j) {
  check_keys(j,
             {"name", "order", "beta", "katz_tol", "variant", "include_lower", "logistic_lambda", "logistic_max_iter",
              "logistic_tol", "rank", "step", "tol", "max_iter", "lambda", "sweeps", "epochs"},
             "method");
  MethodSpec m;
  try {
    m.name = j.value("name", std::string("moi"));
    if (!is_known_method(m.name)) throw ParseError("unknown method '" + m.name + "'");
    if (j.contains("order")) {
      const auto& o = j.at("order");
      int order = 0;
      if (o.is_string()) {
        if (o.get<std::string>() != "inf") throw ParseError("method.order: expected an integer or \"inf\"");
        order = kInfiniteOrder;
      } else {
        order = o.get<int>();
      }
      m.moi.order = order;
      m.hoc.max_order = order;
    }
    if (j.contains("beta") && !j.at("beta").is_null()) m.moi.beta = j.at("beta").get<double>();
    take(j, "katz_tol", m.moi.katz_tol);
    if (j.contains("variant")) {
      const auto v = j.at("variant").get<std::string>();
      if (v == "directed") {
        m.hoc.variant = FeatureVariant::directed;
      } else if (v == "reduced") {
        m.hoc.variant = FeatureVariant::reduced;
      } else {
        throw ParseError("method.variant: expected directed or reduced");
      }
    }
    take(j, "include_lower", m.hoc.include_all_lower_orders);
    take(j, "logistic_lambda", m.logistic.lambda);
    take(j, "logistic_max_iter", m.logistic.max_iter);
    take(j, "logistic_tol", m.logistic.tol);
    take(j, "rank", m.rank);
    if (j.contains("step") && !j.at("step").is_null()) {
      m.svp.step = j.at("step").get<double>();
      m.sgd.step = *m.svp.step;
    }
    take(j, "tol", m.svp.tol);
    take(j, "max_iter", m.svp.max_iter);
    if (j.contains("lambda")) m.als.lambda = m.sgd.lambda = j.at("lambda").get<double>();
    take(j, "sweeps", m.als.sweeps);
    take(j, "epochs", m.sgd.epochs);
  } catch (const json::exception& e) {
    throw ParseError(std::string("method: ") + e.what());
  }
  return m;
}

json method_to_json(const MethodSpec& m) {
  json j;
  j["name"] = m.name;
  if (m.name == "moi") {
    if (m.moi.order == kInfiniteOrder) {
      j["order"] = "inf";
      j["katz_tol"] = m.moi.katz_tol;
    } else {
      j["order"] = m.moi.order;
    }
    if (m.moi.beta) {
      j["beta"] = *m.moi.beta;
    } else {
      j["beta"] = nullptr;
    }
  } else if (m.name == "hoc") {
    j["order"] = m.hoc.max_order;
    j["variant"] = m.hoc.variant == FeatureVariant::directed ? "directed" : "reduced";
    j["include_lower"] = m.hoc.include_all_lower_orders;
    j["logistic_lambda"] = m.logistic.lambda;
    j["logistic_max_iter"] = m.logistic.max_iter;
    j["logistic_tol"] = m.logistic.tol;
  } else if (m.name == "lr-svp") {
    j["rank"] = m.rank;
    j["step"] = m.svp.step ? json(*m.svp.step) : json(nullptr);
    j["tol"] = m.svp.tol;
    j["max_iter"] = m.svp.max_iter;
  } else if (m.name == "lr-als") {
    j["rank"] = m.rank;
    j["lambda"] = m.als.lambda;
    j["sweeps"] = m.als.sweeps;
  } else if (m.name == "lr-sig" || m.name == "lr-sh") {
    j["rank"] = m.rank;
    j["lambda"] = m.sgd.lambda;
    j["step"] = m.sgd.step;
    j["epochs"] = m.sgd.epochs;
  }
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j, {"source", "method", "protocol", "seed", "thresholds", "output", "deterministic"}, "config");
  ExperimentConfig c;
  try {
    if (!j.contains("source")) throw ParseError("config: missing source");
    const auto& s = j.at("source");
    const auto kind = s.value("kind", std::string(s.contains("path") ? "file" : "synthetic"));
    if (kind == "file") {
      check_keys(s, {"kind", "path", "directed"}, "source");
      c.graph_path = s.at("path").get<std::string>();
      take(s, "directed", c.directed);
    } else if (kind == "synthetic") {
      check_keys(s, {"kind", "sizes", "sparsity", "noise", "distribution", "gamma"}, "source");
      SyntheticSource syn;
      syn.sizes = s.at("sizes").get<std::vector<NodeId>>();
      take(s, "sparsity", syn.sampling.sparsity);
      take(s, "noise", syn.sampling.noise);
      take(s, "gamma", syn.sampling.gamma);
      if (s.contains("distribution")) syn.sampling.distribution = parse_distribution(s.at("distribution").get<std::string>());
      c.synthetic = syn;
    } else {
      throw ParseError("source.kind: expected file or synthetic");
    }
    if (j.contains("method")) c.method = method_from_json(j.at("method"));
    if (j.contains("protocol")) {
      const auto& p = j.at("protocol");
      check_keys(p, {"kind", "folds", "fraction", "subsample"}, "protocol");
      if (p.contains("kind")) c.protocol.kind = parse_protocol(p.at("kind").get<std::string>());
      take(p, "folds", c.protocol.folds);
      take(p, "fraction", c.protocol.fraction);
      take(p, "subsample", c.protocol.subsample);
    }
    take(j, "seed", c.seed);
    take(j, "thresholds", c.thresholds);
    take(j, "output", c.output);
    take(j, "deterministic", c.deterministic);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (c.protocol.kind == ProtocolKind::kfold && c.protocol.folds < 2) throw ParseError("config: folds must be >= 2");
  if (c.thresholds.empty()) throw ParseError("config: thresholds must not be empty");
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  if (c.graph_path) {
    j["source"] = {{"kind", "file"}, {"path", *c.graph_path}, {"directed", c.directed}};
  } else if (c.synthetic) {
    const auto& s = *c.synthetic;
    j["source"] = {{"kind", "synthetic"},
                   {"sizes", s.sizes},
                   {"sparsity", s.sampling.sparsity},
                   {"noise", s.sampling.noise},
                   {"distribution", s.sampling.distribution == SamplingKind::uniform ? "uniform" : "power-law"},
                   {"gamma", s.sampling.gamma}};
  }
  j["method"] = method_to_json(c.method);
  j["protocol"] = {{"kind", protocol_name(c.protocol)},
                   {"folds", c.protocol.folds},
                   {"fraction", c.protocol.fraction},
                   {"subsample", c.protocol.subsample}};
  j["seed"] = c.seed;
  j["thresholds"] = c.thresholds;
  j["output"] = c.output;
  j["deterministic"] = c.deterministic;
  return j;
}

void set_dotted(json& j, const std::string& path, const json& value) {
  json* cur = &j;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ParseError("bad key path '" + path + "'");
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    if (!cur->contains(key)) (*cur)[key] = json::object();
    cur = &(*cur)[key];
    if (!cur->is_object()) throw ParseError("key path '" + path + "' crosses a non-object");
    start = dot + 1;
  }
}

SweepSpec sweep_from_json(const json& j) {
  check_keys(j, {"base", "grid", "seeds"}, "sweep");
  SweepSpec s;
  if (!j.contains("base")) throw ParseError("sweep: missing base config");
  s.base = j.at("base");
  if (j.contains("grid")) {
    for (const auto& [k, v] : j.at("grid").items()) {
      if (!v.is_array() || v.empty()) throw ParseError("sweep: grid entry '" + k + "' must be a non-empty array");
      s.grid.emplace_back(k, std::vector<json>(v.begin(), v.end()));
    }
  }
  if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  return s;
}

std::vector<SweepCell> run_sweep(const SweepSpec& spec, bool deterministic) {
  std::size_t combos = 1;
  for (const auto& [_, vals] : spec.grid) combos *= vals.size();
  const std::vector<std::uint64_t> seeds =
      spec.seeds.empty() ? std::vector<std::uint64_t>{spec.base.value("seed", std::uint64_t{1})} : spec.seeds;
  std::vector<SweepCell> cells(combos * seeds.size());
  for (std::size_t c = 0; c < combos; ++c) {
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      SweepCell& cell = cells[c * seeds.size() + s];
      cell.index = c * seeds.size() + s;
      cell.params = json::object();
      std::size_t rest = c;
      for (auto it = spec.grid.rbegin(); it != spec.grid.rend(); ++it) {
        cell.params[it->first] = it->second[rest % it->second.size()];
        rest /= it->second.size();
      }
      cell.params["seed"] = seeds[s];
    }
  }
  parallel_for(cells.size(), [&](std::size_t i) {
    SweepCell& cell = cells[i];
    try {
      json cfg = spec.base;
      for (const auto& [k, v] : cell.params.items()) set_dotted(cfg, k, v);
      cell.config = config_from_json(cfg);
      cell.config.deterministic = cell.config.deterministic || deterministic;
      cell.rows = run_experiment(cell.config).rows;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  });
  return cells;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << "cell," << kCsvHeader << '\n';
  for (const auto& c : cells)
    for (const auto& r : c.rows) {
      out << c.index << ',';
      write_csv_row(out, r);
    }
}

json sweep_manifest(const SweepSpec& spec, const std::vector<SweepCell>& cells) {
  json m;
  m["tool"] = "signet";
  m["version"] = "1.0.0";
  m["base"] = spec.base;
  json grid = json::object();
  for (const auto& [k, v] : spec.grid) grid[k] = v;
  m["grid"] = grid;
  m["seeds"] = spec.seeds;
  json list = json::array();
  for (const auto& c : cells) {
    json e = {{"cell", c.index}, {"params", c.params}, {"status", c.error ? "failed" : "ok"}};
    if (c.error) e["error"] = *c.error;
    list.push_back(e);
  }
  m["cells"] = list;
  return m;
}

}  // namespace signet
