#include "causagen/json_io.hpp"

#include "causagen/csv.hpp"
#include "causagen/error.hpp"
#include "causagen/io.hpp"

#include <cmath>

namespace causagen {

using nlohmann::json;

namespace {

template <typename T>
T get(const json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? get<T>(j, key) : fallback;
}

std::vector<NamedEdge> edges_from(const json& j, const char* key) {
  std::vector<NamedEdge> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_array()) throw DataError(std::string("field '") + key + "' must be an array");
  for (const auto& e : j.at(key)) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
      throw DataError(std::string("edges in '") + key + "' must be [from, to] name pairs");
    out.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
  }
  return out;
}

json edges_to(const NodeSet& nodes, const std::vector<Edge>& edges) {
  json out = json::array();
  for (const auto& e : edges) out.push_back({nodes[e.from], nodes[e.to]});
  return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

Schema schema_from_json(const json& j) {
  if (!j.is_array()) throw DataError("schema must be an array of columns");
  std::vector<ColumnSchema> cols;
  for (const auto& c : j) {
    ColumnSchema col;
    col.name = get<std::string>(c, "name");
    const auto kind = get_or<std::string>(c, "kind", "numeric");
    if (kind == "numeric") {
      col.kind = ColumnKind::numeric;
    } else if (kind == "categorical") {
      col.kind = ColumnKind::categorical;
      col.categories = get<std::vector<std::string>>(c, "categories");
    } else {
      throw DataError("unknown column kind: " + kind);
    }
    cols.push_back(std::move(col));
  }
  return Schema(std::move(cols));
}

json to_json(const Schema& s) {
  json out = json::array();
  for (const auto& c : s.columns()) {
    json col{{"name", c.name}, {"kind", c.is_categorical() ? "categorical" : "numeric"}};
    if (c.is_categorical()) col["categories"] = c.categories;
    out.push_back(std::move(col));
  }
  return out;
}

Schema load_schema(const std::filesystem::path& path) { return schema_from_json(load_json(path)); }

Cpdag cpdag_from_json(const json& j) {
  const auto nodes = get<std::vector<std::string>>(j, "nodes");
  const auto directed = edges_from(j, j.contains("directed") ? "directed" : "edges");
  const auto undirected = edges_from(j, "undirected");
  return Cpdag(nodes, directed, undirected);
}

json to_json(const Cpdag& g) {
  return {{"nodes", g.nodes().names()},
          {"directed", edges_to(g.nodes(), g.directed_edges())},
          {"undirected", edges_to(g.nodes(), g.undirected_edges())}};
}

CausalDag dag_from_json(const json& j) {
  if (!edges_from(j, "undirected").empty()) throw DataError("a DAG cannot have undirected edges");
  const auto nodes = get<std::vector<std::string>>(j, "nodes");
  return CausalDag(nodes, edges_from(j, j.contains("directed") ? "directed" : "edges"));
}

json to_json(const CausalDag& g) {
  return {{"nodes", g.nodes().names()}, {"edges", edges_to(g.nodes(), g.edges())}};
}

Scm scm_from_json(const json& j) {
  const auto dag = dag_from_json(j);
  const auto& eqs = j.contains("equations") ? j.at("equations") : throw DataError("missing field 'equations'");
  std::vector<Equation> equations;
  for (std::size_t v = 0; v < dag.size(); ++v) {
    const auto& name = dag.nodes()[v];
    if (!eqs.contains(name)) throw DataError("no equation for node " + name);
    const auto& e = eqs.at(name);
    const auto type = get<std::string>(e, "type");
    if (type == "gaussian_root") {
      equations.emplace_back(GaussianRoot{get_or(e, "mean", 0.0), get_or(e, "std", 1.0)});
    } else if (type == "linear") {
      LinearEquation lin{get_or(e, "intercept", 0.0), {}, get_or(e, "noise_std", 0.0)};
      const auto coefs = get_or<std::map<std::string, double>>(e, "coefficients", {});
      for (auto p : dag.parents(v)) {
        const auto it = coefs.find(dag.nodes()[p]);
        if (it == coefs.end()) throw DataError("node " + name + " has no coefficient for " + dag.nodes()[p]);
        lin.coefficients.push_back(it->second);
      }
      if (coefs.size() != lin.coefficients.size())
        throw DataError("node " + name + " has coefficients for non-parents");
      equations.emplace_back(std::move(lin));
    } else if (type == "categorical") {
      equations.emplace_back(CategoricalTable{get<std::vector<std::string>>(e, "categories"),
                                              get<std::vector<std::vector<double>>>(e, "table")});
    } else if (type == "constant") {
      equations.emplace_back(Constant{get<double>(e, "value")});
    } else {
      throw DataError("unknown equation type: " + type);
    }
  }
  return Scm(dag, std::move(equations));
}

json to_json(const Scm& scm) {
  json out = to_json(scm.dag());
  json eqs = json::object();
  const auto& dag = scm.dag();
  for (std::size_t v = 0; v < dag.size(); ++v) {
    eqs[dag.nodes()[v]] = std::visit(
        [&](const auto& e) -> json {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, GaussianRoot>) {
            return {{"type", "gaussian_root"}, {"mean", e.mean}, {"std", e.std}};
          } else if constexpr (std::is_same_v<T, LinearEquation>) {
            json coefs = json::object();
            const auto parents = dag.parents(v);
            for (std::size_t k = 0; k < parents.size(); ++k) coefs[dag.nodes()[parents[k]]] = e.coefficients[k];
            return {{"type", "linear"}, {"intercept", e.intercept}, {"coefficients", coefs}, {"noise_std", e.noise_std}};
          } else if constexpr (std::is_same_v<T, CategoricalTable>) {
            return {{"type", "categorical"}, {"categories", e.categories}, {"table", e.rows}};
          } else {
            return {{"type", "constant"}, {"value", e.value}};
          }
        },
        scm.equation(v));
  }
  out["equations"] = std::move(eqs);
  return out;
}

json to_json(const GraphQuality& q) {
  return {{"skeleton_recall", optional_number(q.skeleton_recall)},
          {"direction_recall", optional_number(q.direction_recall)},
          {"oriented_fraction", optional_number(q.oriented_fraction)},
          {"direction_precision", optional_number(q.direction_precision)}};
}

json to_json(const ComparisonResult& r) {
  return {{"hl_estimate", finite_or_null(r.hl_estimate)},
          {"ci_low", finite_or_null(r.ci_low)},
          {"ci_high", finite_or_null(r.ci_high)},
          {"p_raw", finite_or_null(r.p_raw)},
          {"p_adjusted", finite_or_null(r.p_adjusted)},
          {"significant", r.significant},
          {"n_pairs", r.n_pairs}};
}

json to_json(const std::vector<ComparisonRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    json row{{"dataset", r.dataset}, {"train_size", r.train_size}, {"metric", r.metric}, {"a", r.a}, {"b", r.b}};
    row.update(to_json(r.result));
    out.push_back(std::move(row));
  }
  return out;
}

json to_json(const std::vector<SensitivityCell>& cells) {
  json out = json::array();
  for (const auto& c : cells)
    out.push_back({{"dataset", c.dataset},
                   {"train_size", c.train_size},
                   {"metric", c.metric},
                   {"median_range", c.median_range},
                   {"ci_low", c.ci.low},
                   {"ci_high", c.ci.high},
                   {"iterations", c.iterations}});
  return out;
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw DataError("config must be an object");
  ExperimentConfig cfg;

  const auto& d = j.contains("dataset") ? j.at("dataset") : throw DataError("missing field 'dataset'");
  auto& ds = cfg.dataset;
  ds.name = get_or<std::string>(d, "name", "dataset");
  ds.pool_size = get_or<std::size_t>(d, "pool_size", ds.pool_size);
  if (d.contains("builtin")) {
    const auto builtin = get<std::string>(d, "builtin");
    if (builtin != "collider") throw DataError("unknown builtin SCM: " + builtin);
    ds.scm = builtin_collider_scm(get_or(d, "sigma", 1e-5));
  } else if (d.contains("scm")) {
    ds.scm = scm_from_json(load_json(resolve(base_dir, get<std::string>(d, "scm"))));
  }
  if (d.contains("graph")) ds.truth = dag_from_json(load_json(resolve(base_dir, get<std::string>(d, "graph"))));
  auto table = [&](const char* key) -> std::optional<Table> {
    if (!d.contains(key)) return std::nullopt;
    const auto path = resolve(base_dir, get<std::string>(d, key));
    const auto schema = d.contains("schema") ? load_schema(resolve(base_dir, get<std::string>(d, "schema")))
                                             : Schema::numeric(read_csv_header(path));
    return load_table(path, schema);
  };
  ds.pool = table("pool");
  ds.test = table("test");
  ds.arm0 = table("arm0");
  ds.arm1 = table("arm1");

  for (const auto& s : get_or<json>(j, "strategies", json::array())) {
    cfg.strategies.push_back(make_strategy(parse_strategy(get<std::string>(s, "strategy")),
                                           parse_ordering(get_or<std::string>(s, "ordering", "original")),
                                           parse_graph_source(get_or<std::string>(s, "graph", "none")),
                                           get_or<std::string>(s, "label", "")));
  }
  cfg.train_sizes = get_or(j, "train_sizes", cfg.train_sizes);
  cfg.iterations = get_or(j, "iterations", cfg.iterations);
  cfg.test_size = get_or(j, "test_size", cfg.test_size);
  cfg.sampler = get_or(j, "sampler", cfg.sampler);
  cfg.bridge_command = get_or(j, "bridge_command", cfg.bridge_command);
  cfg.master_seed = get_or(j, "seed", cfg.master_seed);
  cfg.permutations = get_or(j, "permutations", cfg.permutations);
  cfg.metrics = get_or(j, "metrics", cfg.metrics);
  for (const auto& p : get_or<std::vector<std::vector<std::string>>>(j, "spurious_pairs", {})) {
    if (p.size() != 2) throw DataError("spurious pairs must be [a, b]");
    cfg.spurious_pairs.emplace_back(p[0], p[1]);
  }
  cfg.randomize_coincident_original = get_or(j, "randomize_coincident_original", false);
  cfg.graph_metrics = get_or(j, "graph_metrics", false);
  if (j.contains("pc")) {
    cfg.pc.alpha = get_or(j.at("pc"), "alpha", cfg.pc.alpha);
    cfg.pc.max_condition_size = get_or(j.at("pc"), "max_condition_size", cfg.pc.max_condition_size);
  }
  cfg.threads = get_or(j, "threads", cfg.threads);
  if (j.contains("ate")) {
    const auto& a = j.at("ate");
    AteSpec ate;
    ate.treatment = get<std::string>(a, "treatment");
    ate.outcome = get<std::string>(a, "outcome");
    ate.x0 = get_or(a, "x0", ate.x0);
    ate.x1 = get_or(a, "x1", ate.x1);
    const auto arms = get_or<std::string>(a, "arms", "nearest");
    if (arms == "nearest") ate.arms = ArmAssignment::nearest;
    else if (arms == "exact") ate.arms = ArmAssignment::exact;
    else throw DataError("unknown arm assignment: " + arms);
    ate.train_sizes = get_or(a, "train_sizes", ate.train_sizes);
    cfg.ate = std::move(ate);
  }
  for (const auto& c : get_or<json>(j, "comparisons", json::array())) {
    if (c.is_array()) {
      if (c.size() != 2 || !c[0].is_string() || !c[1].is_string())
        throw DataError("comparisons must be [a, b] label pairs");
      cfg.comparisons.push_back({c[0].get<std::string>(), c[1].get<std::string>()});
    } else if (c.is_object()) {
      cfg.comparisons.push_back({get<std::string>(c, "a"), get<std::string>(c, "b")});
    } else {
      throw DataError("comparisons must be [a, b] pairs or {a, b} objects");
    }
  }
  const auto family = get_or<std::string>(j, "holm_family", "per_figure");
  if (family == "per_figure") cfg.family = HolmFamily::per_figure;
  else if (family == "per_cell") cfg.family = HolmFamily::per_cell;
  else if (family == "global") cfg.family = HolmFamily::global;
  else throw DataError("unknown Holm family: " + family);
  cfg.sensitivity = get_or(j, "sensitivity", false);
  validate(cfg);
  return cfg;
}

json load_json(const std::filesystem::path& path) {
  const auto text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
}

}  // namespace causagen
