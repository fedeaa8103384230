#pragma once

#include "causagen/engine.hpp"
#include "causagen/graph.hpp"
#include "causagen/metrics.hpp"
#include "causagen/pc.hpp"
#include "causagen/plan.hpp"
#include "causagen/scm.hpp"
#include "causagen/stats.hpp"
#include "causagen/table.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace causagen {

enum class Ordering { original, topological, reverse };
std::string_view to_string(Ordering o);
Ordering parse_ordering(std::string_view s);

enum class GraphSource { none, true_dag, mutilated_dag, minimal_cpdag, discovered_cpdag };
std::string_view to_string(GraphSource g);
GraphSource parse_graph_source(std::string_view s);

struct StrategySpec {
  std::string label;
  Strategy strategy = Strategy::vanilla;
  Ordering ordering = Ordering::original;  // vanilla only
  GraphSource graph = GraphSource::none;   // dag and cpdag only
};

// Defaults: dag uses the true DAG, cpdag the minimal CPDAG. Label defaults to
// "<strategy>-<ordering>" for vanilla and "<strategy>-<graph>" otherwise.
StrategySpec make_strategy(Strategy s, Ordering o = Ordering::original,
                           GraphSource g = GraphSource::none, std::string label = {});

struct DatasetSource {
  std::string name = "dataset";
  // Builtin or file SCM: pools are sampled from it.
  std::optional<Scm> scm;
  std::size_t pool_size = 6000;
  // External data: an observational pool, optionally a predefined test set,
  // and for ATE runs one pool per intervention arm.
  std::optional<Table> pool;
  std::optional<Table> test;
  std::optional<Table> arm0;
  std::optional<Table> arm1;
  std::optional<CausalDag> truth;
};

struct AteSpec {
  std::string treatment;
  std::string outcome;
  double x0 = 0.0;
  double x1 = 1.0;
  ArmAssignment arms = ArmAssignment::nearest;
  std::vector<std::size_t> train_sizes;  // empty: use the config's sizes
};

struct ComparisonSpec {
  std::string a;
  std::string b;
};

// Holm families: one per (metric, comparison) across all cells, each cell on
// its own, or everything at once.
enum class HolmFamily { per_figure, per_cell, global };

struct ExperimentConfig {
  DatasetSource dataset;
  std::vector<StrategySpec> strategies;
  std::vector<std::size_t> train_sizes{20, 50, 100, 200, 500};
  std::size_t iterations = 100;
  std::size_t test_size = 2000;
  std::string sampler = "cart";
  std::string bridge_command;
  std::uint64_t master_seed = 0;
  int permutations = 3;
  std::vector<std::string> metrics{"cmd", "kmtvd", "nnaa"};
  std::vector<std::pair<std::string, std::string>> spurious_pairs;
  // Replace the original order by a seeded random permutation when it equals
  // the topological or reverse topological order.
  bool randomize_coincident_original = false;
  bool graph_metrics = false;  // emit graph-quality records for discovered CPDAGs
  PcOptions pc;
  unsigned threads = 1;
  std::optional<AteSpec> ate;
  std::vector<ComparisonSpec> comparisons;
  HolmFamily family = HolmFamily::per_figure;
  bool sensitivity = false;
};

inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

struct RunRecord {
  std::string dataset;
  std::string strategy;
  std::string ordering;
  std::size_t train_size = 0;
  std::size_t iteration = 0;
  std::string metric;
  double value = kUndefined;  // NaN marks an undefined value or failed run

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

// Train bytes consumed by one strategy in one iteration.
struct TrainTrace {
  std::size_t train_size = 0;
  std::size_t iteration = 0;
  std::string strategy;
  std::uint64_t train_hash = 0;
};

void validate(const ExperimentConfig& cfg);

std::vector<RunRecord> run_quality_experiment(const ExperimentConfig& cfg,
                                              std::vector<TrainTrace>* traces = nullptr);

std::vector<RunRecord> run_ate_experiment(const ExperimentConfig& cfg,
                                          std::vector<TrainTrace>* traces = nullptr);

struct ComparisonRow {
  std::string dataset;
  std::size_t train_size = 0;
  std::string metric;
  std::string a;
  std::string b;
  ComparisonResult result;
};

// diffs = a - b per iteration; for lower-is-better metrics a positive
// estimate means b is better. Iterations with an undefined value on either
// side are dropped and counted out of n_pairs.
std::vector<ComparisonRow> aggregate_and_compare(const std::vector<RunRecord>& records,
                                                 const std::vector<ComparisonSpec>& pairs,
                                                 HolmFamily family = HolmFamily::per_figure);

struct SensitivityCell {
  std::string dataset;
  std::size_t train_size = 0;
  std::string metric;
  double median_range = 0.0;
  Interval ci;
  std::size_t iterations = 0;
};

// Requires exactly the vanilla strategy under the three orderings.
std::vector<SensitivityCell> run_sensitivity(const ExperimentConfig& cfg);
std::vector<SensitivityCell> sensitivity_from_records(const std::vector<RunRecord>& records,
                                                      std::uint64_t seed);

std::string format_records(const std::vector<RunRecord>& records);
std::vector<RunRecord> parse_records(std::string_view csv);

// Resolves the generation order for one vanilla ordering.
std::vector<std::string> ordering_columns(const Schema& schema, const CausalDag* truth,
                                          Ordering ordering, bool randomize_coincident,
                                          std::uint64_t seed);

}  // namespace causagen
