#include "causagen/experiment.hpp"

#include "causagen/bridge.hpp"
#include "causagen/csv.hpp"
#include "causagen/error.hpp"
#include "causagen/graph_quality.hpp"
#include "causagen/parallel.hpp"
#include "causagen/random.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace causagen {

std::string_view to_string(Ordering o) {
  switch (o) {
    case Ordering::original: return "original";
    case Ordering::topological: return "topological";
    case Ordering::reverse: return "reverse";
  }
  return "?";
}

Ordering parse_ordering(std::string_view s) {
  if (s == "original") return Ordering::original;
  if (s == "topological") return Ordering::topological;
  if (s == "reverse") return Ordering::reverse;
  throw DataError("unknown ordering: " + std::string(s));
}

std::string_view to_string(GraphSource g) {
  switch (g) {
    case GraphSource::none: return "none";
    case GraphSource::true_dag: return "true-dag";
    case GraphSource::mutilated_dag: return "mutilated-dag";
    case GraphSource::minimal_cpdag: return "minimal-cpdag";
    case GraphSource::discovered_cpdag: return "discovered-cpdag";
  }
  return "?";
}

GraphSource parse_graph_source(std::string_view s) {
  if (s == "none") return GraphSource::none;
  if (s == "true-dag") return GraphSource::true_dag;
  if (s == "mutilated-dag") return GraphSource::mutilated_dag;
  if (s == "minimal-cpdag") return GraphSource::minimal_cpdag;
  if (s == "discovered-cpdag") return GraphSource::discovered_cpdag;
  throw DataError("unknown graph source: " + std::string(s));
}

StrategySpec make_strategy(Strategy s, Ordering o, GraphSource g, std::string label) {
  StrategySpec spec{std::move(label), s, o, g};
  if (s == Strategy::vanilla) {
    spec.graph = GraphSource::none;
  } else {
    spec.ordering = Ordering::original;
    if (spec.graph == GraphSource::none)
      spec.graph = s == Strategy::dag ? GraphSource::true_dag : GraphSource::minimal_cpdag;
  }
  if (spec.label.empty())
    spec.label = std::string(to_string(s)) + "-" +
                 std::string(s == Strategy::vanilla ? to_string(spec.ordering) : to_string(spec.graph));
  return spec;
}

namespace {

// The truth re-expressed over the schema's column order, so every
// tie-break follows the data's columns.
CausalDag align(const CausalDag& truth, const Schema& schema) {
  if (truth.size() != schema.size()) throw DataError("graph nodes do not match the data columns");
  std::vector<Edge> edges;
  for (const auto& e : truth.edges())
    edges.push_back({schema.index_of(truth.nodes()[e.from]), schema.index_of(truth.nodes()[e.to])});
  return CausalDag(NodeSet(schema.names()), edges);
}

std::optional<CausalDag> truth_of(const ExperimentConfig& cfg, const Schema& schema) {
  if (cfg.dataset.truth) return align(*cfg.dataset.truth, schema);
  if (cfg.dataset.scm) return align(cfg.dataset.scm->dag(), schema);
  return std::nullopt;
}

Schema schema_of(const ExperimentConfig& cfg) {
  if (cfg.dataset.scm) return cfg.dataset.scm->schema();
  if (cfg.dataset.pool) return cfg.dataset.pool->schema();
  if (cfg.dataset.arm0) return cfg.dataset.arm0->schema();
  throw DataError("experiment has no data source");
}

std::unique_ptr<TableGenerator> make_generator(const ExperimentConfig& cfg) {
  if (cfg.sampler == "bridge") {
    if (cfg.bridge_command.empty()) throw DataError("bridge sampler needs a bridge command");
    return std::make_unique<BridgeGenerator>(cfg.bridge_command);
  }
  return std::make_unique<AutoregressiveEngine>(std::shared_ptr<const ConditionalSampler>(make_sampler(cfg.sampler)));
}

std::string ordering_label(const StrategySpec& s) {
  switch (s.strategy) {
    case Strategy::vanilla: return std::string(to_string(s.ordering));
    case Strategy::dag: return "topological";
    case Strategy::cpdag: return "oriented-first";
  }
  return "?";
}

struct Context {
  const ExperimentConfig& cfg;
  Schema schema;
  std::optional<CausalDag> truth;
  const TableGenerator& generator;
};

// Generates one synthetic table for `spec`, in the schema's column order.
Table synthesize(const Context& ctx, const StrategySpec& spec, const Table& train, std::size_t n,
                 std::uint64_t seed, std::optional<Cpdag>* discovered) {
  const auto& cfg = ctx.cfg;
  const auto names = ctx.schema.names();
  GenerationRequest req;
  req.n_samples = n;
  req.seed = seed;
  req.permutations = cfg.permutations;
  req.threads = 1;

  auto need_truth = [&]() -> const CausalDag& {
    if (!ctx.truth) throw DataError("strategy '" + spec.label + "' needs a causal graph");
    return *ctx.truth;
  };
  auto mutilated = [&]() {
    if (!cfg.ate) throw DataError("mutilated-dag graph source needs an ATE treatment");
    return mutilate(need_truth(), ctx.schema.index_of(cfg.ate->treatment));
  };

  if (spec.strategy == Strategy::vanilla) {
    const auto cols = ordering_columns(ctx.schema, ctx.truth ? &*ctx.truth : nullptr, spec.ordering,
                                       cfg.randomize_coincident_original, cfg.master_seed);
    req.train = reorder_columns(train, cols);
    req.plan = build_plan(Strategy::vanilla, cols);
    return reorder_columns(ctx.generator.generate(req), names);
  }

  req.train = train;
  PlanGraph graph;
  if (spec.strategy == Strategy::dag) {
    switch (spec.graph) {
      case GraphSource::true_dag: graph = need_truth(); break;
      case GraphSource::mutilated_dag: graph = mutilated(); break;
      default: throw DataError("dag strategy needs graph true-dag or mutilated-dag");
    }
  } else {
    switch (spec.graph) {
      case GraphSource::true_dag: graph = Cpdag::from_dag(need_truth()); break;
      case GraphSource::mutilated_dag: graph = Cpdag::from_dag(mutilated()); break;
      case GraphSource::minimal_cpdag: graph = minimal_cpdag(need_truth()); break;
      case GraphSource::discovered_cpdag: {
        auto g = pc_stable(train, cfg.pc);
        if (discovered) *discovered = g;
        graph = std::move(g);
        break;
      }
      case GraphSource::none: throw DataError("cpdag strategy needs a graph source");
    }
  }
  req.plan = build_plan(spec.strategy, names, graph);
  return ctx.generator.generate(req);
}

std::vector<std::string> quality_metric_names(const ExperimentConfig& cfg) {
  std::vector<std::string> out = cfg.metrics;
  for (const auto& [a, b] : cfg.spurious_pairs) out.push_back("rho:" + a + ":" + b);
  return out;
}

const std::vector<std::string> kGraphMetrics{"skeleton_recall", "direction_recall", "oriented_fraction",
                                             "direction_precision"};

struct Task {
  std::size_t train_size;
  std::size_t iteration;
};

std::vector<Task> tasks_for(const std::vector<std::size_t>& sizes, std::size_t iterations) {
  std::vector<Task> out;
  for (auto n : sizes)
    for (std::size_t it = 0; it < iterations; ++it) out.push_back({n, it});
  return out;
}

std::uint64_t generation_seed(std::uint64_t master, const Task& t) {
  return derive_seed(derive_seed(master, t.train_size, "generate"), t.iteration);
}

void emit(std::vector<RunRecord>& out, const ExperimentConfig& cfg, const StrategySpec& s, const Task& t,
          const std::string& metric, double value) {
  out.push_back({cfg.dataset.name, s.label, ordering_label(s), t.train_size, t.iteration, metric, value});
}

template <typename TaskBody>
std::vector<RunRecord> run_tasks(const ExperimentConfig& cfg, const std::vector<Task>& tasks,
                                 std::vector<TrainTrace>* traces, TaskBody&& body) {
  std::vector<std::vector<RunRecord>> per_task(tasks.size());
  std::vector<std::vector<TrainTrace>> per_task_traces(tasks.size());
  parallel_for(tasks.size(), cfg.threads,
               [&](std::size_t k) { body(tasks[k], per_task[k], per_task_traces[k]); });
  std::vector<RunRecord> records;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    records.insert(records.end(), per_task[k].begin(), per_task[k].end());
    if (traces) traces->insert(traces->end(), per_task_traces[k].begin(), per_task_traces[k].end());
  }
  return records;
}

}  // namespace

std::vector<std::string> ordering_columns(const Schema& schema, const CausalDag* truth, Ordering ordering,
                                          bool randomize_coincident, std::uint64_t seed) {
  const auto names = schema.names();
  if (ordering == Ordering::original && !randomize_coincident) return names;
  if (!truth) throw DataError("ordering '" + std::string(to_string(ordering)) + "' needs a causal graph");
  const auto aligned = align(*truth, schema);
  auto topo = topological_order(aligned);
  if (ordering == Ordering::topological) return topo;
  auto rev = topo;
  std::reverse(rev.begin(), rev.end());
  if (ordering == Ordering::reverse) return rev;
  if (names != topo && names != rev) return names;
  if (names.size() < 3) return names;  // every permutation coincides
  for (std::uint64_t attempt = 0;; ++attempt) {
    const auto perm = shuffled_indices(names.size(), derive_seed(seed, attempt, "original-order"));
    std::vector<std::string> out;
    for (auto i : perm) out.push_back(names[static_cast<std::size_t>(i)]);
    if (out != topo && out != rev) return out;
  }
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.iterations < 1) throw DataError("iterations must be at least 1");
  if (cfg.strategies.empty()) throw DataError("no strategies configured");
  if (cfg.test_size < 2) throw DataError("test_size must be at least 2");
  std::set<std::string> labels;
  for (const auto& s : cfg.strategies)
    if (!labels.insert(s.label).second) throw DataError("duplicate strategy label: " + s.label);
  for (auto n : cfg.train_sizes)
    if (n == 0) throw DataError("train sizes must be positive");
  if (cfg.sampler != "cart" && cfg.sampler != "lingauss" && cfg.sampler != "bridge")
    throw DataError("unknown sampler: " + cfg.sampler);
  static const std::set<std::string> known{"cmd", "kmtvd", "nnaa"};
  for (const auto& m : cfg.metrics)
    if (!known.count(m)) throw DataError("unknown metric: " + m);
  for (const auto& c : cfg.comparisons)
    if (!labels.count(c.a) || !labels.count(c.b))
      throw DataError("comparison refers to an unknown strategy: " + c.a + " vs " + c.b);
  if (!cfg.dataset.scm && !cfg.dataset.pool && !cfg.dataset.arm0) throw DataError("experiment has no data source");
}

std::vector<RunRecord> run_quality_experiment(const ExperimentConfig& cfg, std::vector<TrainTrace>* traces) {
  validate(cfg);
  const auto schema = schema_of(cfg);
  const auto generator = make_generator(cfg);
  const Context ctx{cfg, schema, truth_of(cfg, schema), *generator};
  const auto metric_names = quality_metric_names(cfg);

  std::optional<Table> pool = cfg.dataset.pool;
  if (cfg.dataset.scm) pool = sample(*cfg.dataset.scm, cfg.dataset.pool_size, derive_seed(cfg.master_seed, 0, "pool"));
  if (!pool) throw DataError("quality experiment needs an observational pool or an SCM");

  const bool predefined_test = cfg.dataset.test.has_value() && !cfg.dataset.scm;
  auto draw = [&](const Task& t) -> Split {
    if (predefined_test) {
      const auto perm = shuffled_indices(static_cast<std::size_t>(pool->rows()),
                                         derive_seed(cfg.master_seed, t.iteration, "train-split"));
      if (t.train_size > perm.size()) throw DataError("train size exceeds the pool");
      std::vector<Eigen::Index> rows(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(t.train_size));
      return {pool->select_rows(rows), *cfg.dataset.test};
    }
    return fixed_split(*pool, {cfg.test_size, t.train_size, cfg.master_seed, t.iteration});
  };

  return run_tasks(cfg, tasks_for(cfg.train_sizes, cfg.iterations), traces,
                   [&](const Task& t, std::vector<RunRecord>& out, std::vector<TrainTrace>& tr) {
                     const auto split = draw(t);
                     const auto n_synth = static_cast<std::size_t>(split.test.rows());
                     const auto seed = generation_seed(cfg.master_seed, t);
                     for (const auto& s : cfg.strategies) {
                       tr.push_back({t.train_size, t.iteration, s.label, split.train.hash()});
                       std::optional<Cpdag> discovered;
                       std::optional<Table> synth;
                       try {
                         synth = synthesize(ctx, s, split.train, n_synth, seed, &discovered);
                       } catch (const DataError&) {
                       }
                       for (const auto& m : metric_names) {
                         double v = kUndefined;
                         if (synth) {
                           try {
                             if (m == "cmd") v = cmd(split.test, *synth);
                             else if (m == "kmtvd") v = kmtvd(split.test, *synth);
                             else if (m == "nnaa") v = nnaa(split.test, *synth);
                             else {
                               const auto sep = m.find(':', 4);
                               const auto r = spurious_report(*synth, {{m.substr(4, sep - 4), m.substr(sep + 1)}});
                               v = r.front().pearson.value_or(kUndefined);
                             }
                           } catch (const DataError&) {
                           }
                         }
                         emit(out, cfg, s, t, m, v);
                       }
                       if (cfg.graph_metrics && s.graph == GraphSource::discovered_cpdag && ctx.truth) {
                         std::optional<GraphQuality> q;
                         if (discovered) q = graph_quality(*discovered, *ctx.truth);
                         const std::optional<double> vals[] = {
                             q ? q->skeleton_recall : std::nullopt, q ? q->direction_recall : std::nullopt,
                             q ? q->oriented_fraction : std::nullopt, q ? q->direction_precision : std::nullopt};
                         for (std::size_t k = 0; k < kGraphMetrics.size(); ++k)
                           emit(out, cfg, s, t, kGraphMetrics[k], vals[k].value_or(kUndefined));
                       }
                     }
                   });
}

std::vector<RunRecord> run_ate_experiment(const ExperimentConfig& cfg, std::vector<TrainTrace>* traces) {
  validate(cfg);
  if (!cfg.ate) throw DataError("ATE experiment needs treatment, outcome and arm values");
  const auto& ate = *cfg.ate;
  const auto schema = schema_of(cfg);
  const auto generator = make_generator(cfg);
  const Context ctx{cfg, schema, truth_of(cfg, schema), *generator};

  std::optional<Table> arm_pool[2] = {cfg.dataset.arm0, cfg.dataset.arm1};
  if (cfg.dataset.scm) {
    const auto per_arm = cfg.dataset.pool_size / 2;
    const auto both = interventional_arms(*cfg.dataset.scm, ate.treatment, ate.x0, ate.x1, per_arm,
                                          derive_seed(cfg.master_seed, 0, "ate-pool"));
    std::vector<Eigen::Index> first(per_arm), second(per_arm);
    for (std::size_t i = 0; i < per_arm; ++i) {
      first[i] = static_cast<Eigen::Index>(i);
      second[i] = static_cast<Eigen::Index>(per_arm + i);
    }
    arm_pool[0] = both.select_rows(first);
    arm_pool[1] = both.select_rows(second);
  }
  if (!arm_pool[0] || !arm_pool[1]) throw DataError("ATE experiment needs both intervention arms");

  const auto sizes = ate.train_sizes.empty() ? cfg.train_sizes : ate.train_sizes;
  const std::size_t test_half[2] = {cfg.test_size / 2, cfg.test_size - cfg.test_size / 2};
  auto draw = [&](const Task& t) -> Split {
    const std::size_t train_half[2] = {t.train_size / 2, t.train_size - t.train_size / 2};
    Split parts[2];
    for (int a = 0; a < 2; ++a)
      parts[a] = fixed_split(*arm_pool[a], {test_half[a], train_half[a],
                                            derive_seed(cfg.master_seed, static_cast<std::uint64_t>(a), "ate-arm"),
                                            t.iteration});
    return {vstack(parts[0].train, parts[1].train), vstack(parts[0].test, parts[1].test)};
  };
  const double ate_test = [&] {
    const auto split = draw({sizes.empty() ? 2 : sizes.front(), 0});
    return ate_from_table(split.test, ate.treatment, ate.outcome, ate.x0, ate.x1, ate.arms);
  }();

  return run_tasks(cfg, tasks_for(sizes, cfg.iterations), traces,
                   [&](const Task& t, std::vector<RunRecord>& out, std::vector<TrainTrace>& tr) {
                     const auto split = draw(t);
                     const auto seed = generation_seed(derive_seed(cfg.master_seed, 0, "ate"), t);
                     for (const auto& s : cfg.strategies) {
                       tr.push_back({t.train_size, t.iteration, s.label, split.train.hash()});
                       double v = kUndefined;
                       try {
                         const auto synth = synthesize(ctx, s, split.train, cfg.test_size, seed, nullptr);
                         v = delta_ate(ate_test,
                                       ate_from_table(synth, ate.treatment, ate.outcome, ate.x0, ate.x1, ate.arms));
                       } catch (const DataError&) {
                       }
                       emit(out, cfg, s, t, "delta_ate", v);
                     }
                   });
}

std::vector<ComparisonRow> aggregate_and_compare(const std::vector<RunRecord>& records,
                                                 const std::vector<ComparisonSpec>& pairs, HolmFamily family) {
  // (dataset, train_size, metric, strategy) -> iteration -> value
  using CellKey = std::tuple<std::string, std::size_t, std::string>;
  std::map<CellKey, std::map<std::string, std::map<std::size_t, double>>> cells;
  std::vector<std::string> metric_order;
  for (const auto& r : records) {
    cells[{r.dataset, r.train_size, r.metric}][r.strategy][r.iteration] = r.value;
    if (std::find(metric_order.begin(), metric_order.end(), r.metric) == metric_order.end())
      metric_order.push_back(r.metric);
  }

  std::vector<ComparisonRow> rows;
  for (const auto& pair : pairs) {
    for (const auto& metric : metric_order) {
      for (const auto& [key, by_strategy] : cells) {
        if (std::get<2>(key) != metric) continue;
        const auto a = by_strategy.find(pair.a);
        const auto b = by_strategy.find(pair.b);
        if (a == by_strategy.end() || b == by_strategy.end()) continue;
        if (a->second.size() != b->second.size())
          throw DataError("unpaired iterations between " + pair.a + " and " + pair.b);
        std::vector<double> diffs;
        for (const auto& [it, va] : a->second) {
          const auto vb = b->second.find(it);
          if (vb == b->second.end()) throw DataError("unpaired iteration " + std::to_string(it));
          if (std::isfinite(va) && std::isfinite(vb->second)) diffs.push_back(va - vb->second);
        }
        const auto seed = derive_seed(tag_hash(std::get<0>(key) + "/" + metric + "/" + pair.a + "/" + pair.b),
                                      std::get<1>(key), "compare");
        rows.push_back({std::get<0>(key), std::get<1>(key), metric, pair.a, pair.b, compare_paired(diffs, seed)});
      }
    }
  }

  std::map<std::string, std::vector<std::size_t>> families;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    std::string key;
    switch (family) {
      case HolmFamily::per_figure: key = rows[k].metric + "\n" + rows[k].a + "\n" + rows[k].b; break;
      case HolmFamily::per_cell: key = std::to_string(k); break;
      case HolmFamily::global: key = "all"; break;
    }
    if (rows[k].result.n_pairs > 0) families[key].push_back(k);
  }
  for (const auto& [_, members] : families) {
    std::vector<double> p;
    for (auto k : members) p.push_back(rows[k].result.p_raw);
    const auto adjusted = holm(p);
    for (std::size_t i = 0; i < members.size(); ++i) {
      auto& r = rows[members[i]].result;
      r.p_adjusted = adjusted[i];
      r.significant = r.p_adjusted < 0.05;
    }
  }
  return rows;
}

std::vector<SensitivityCell> sensitivity_from_records(const std::vector<RunRecord>& records, std::uint64_t seed) {
  using CellKey = std::tuple<std::string, std::size_t, std::string>;
  std::map<CellKey, std::map<std::size_t, std::map<std::string, double>>> cells;
  for (const auto& r : records) cells[{r.dataset, r.train_size, r.metric}][r.iteration][r.ordering] = r.value;
  std::vector<SensitivityCell> out;
  for (const auto& [key, iterations] : cells) {
    std::vector<double> ranges;
    for (const auto& [_, by_ordering] : iterations) {
      if (by_ordering.size() != 3) continue;
      std::vector<double> values;
      for (const auto& [o, v] : by_ordering)
        if (std::isfinite(v)) values.push_back(v);
      if (values.size() == 3) ranges.push_back(sensitivity_range(values));
    }
    if (ranges.empty()) continue;
    SensitivityCell c{std::get<0>(key), std::get<1>(key), std::get<2>(key), median(ranges), {}, ranges.size()};
    c.ci = median_range_ci(ranges, 1000, 0.05,
                           derive_seed(derive_seed(seed, std::get<1>(key), "sens"), tag_hash(std::get<0>(key) + "/" + std::get<2>(key))));
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<SensitivityCell> run_sensitivity(const ExperimentConfig& cfg) {
  std::set<Ordering> orderings;
  for (const auto& s : cfg.strategies) {
    if (s.strategy != Strategy::vanilla)
      throw DataError("sensitivity runs take only vanilla strategies, got '" + s.label + "'");
    orderings.insert(s.ordering);
  }
  if (cfg.strategies.size() != 3 || orderings.size() != 3)
    throw DataError("sensitivity runs need exactly the original, topological and reverse orderings");
  return sensitivity_from_records(run_quality_experiment(cfg), cfg.master_seed);
}

std::string format_records(const std::vector<RunRecord>& records) {
  std::string out = "dataset,strategy,ordering,train_size,iteration,metric,value\n";
  for (const auto& r : records) {
    out += quote_csv_field(r.dataset) + ',' + quote_csv_field(r.strategy) + ',' + quote_csv_field(r.ordering) + ',' +
           std::to_string(r.train_size) + ',' + std::to_string(r.iteration) + ',' + quote_csv_field(r.metric) + ',' +
           (std::isfinite(r.value) ? format_double(r.value) : std::string("NA")) + '\n';
  }
  return out;
}

std::vector<RunRecord> parse_records(std::string_view csv) {
  auto rows = parse_csv(csv);
  if (rows.empty()) throw DataError("records: missing header");
  const std::vector<std::string> header{"dataset", "strategy", "ordering", "train_size", "iteration", "metric", "value"};
  if (rows.front() != header) throw DataError("records: unexpected header");
  std::vector<RunRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() == 1 && r[0].empty()) continue;
    if (r.size() != header.size()) throw DataError("records: ragged row " + std::to_string(i));
    RunRecord rec{r[0], r[1], r[2], 0, 0, r[5], kUndefined};
    try {
      rec.train_size = std::stoul(r[3]);
      rec.iteration = std::stoul(r[4]);
      if (r[6] != "NA") rec.value = std::stod(r[6]);
    } catch (const std::exception&) {
      throw DataError("records: bad number in row " + std::to_string(i));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace causagen
