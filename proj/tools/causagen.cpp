#include "causagen/bridge.hpp"
#include "causagen/csv.hpp"
#include "causagen/error.hpp"
#include "causagen/experiment.hpp"
#include "causagen/graph_quality.hpp"
#include "causagen/io.hpp"
#include "causagen/json_io.hpp"
#include "causagen/metrics.hpp"
#include "causagen/parallel.hpp"
#include "causagen/pc.hpp"
#include "causagen/scm.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace causagen;

namespace {

enum class Level { error, warn, info, debug };
Level g_level = Level::info;

void log(Level level, const std::string& msg) {
  static const char* names[] = {"error", "warn", "info", "debug"};
  if (level <= g_level) std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

struct Globals {
  std::uint64_t seed = 0;
  unsigned threads = default_threads();
  std::string log_level = "info";
};

Schema schema_for(const std::string& schema_path, const fs::path& csv) {
  return schema_path.empty() ? Schema::numeric(read_csv_header(csv)) : load_schema(schema_path);
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

std::vector<std::pair<std::string, std::string>> parse_pairs(const std::string& spec) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t start = 0;
  while (start < spec.size()) {
    auto end = spec.find(',', start);
    if (end == std::string::npos) end = spec.size();
    const auto item = spec.substr(start, end - start);
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw DataError("pair '" + item + "' must be a:b");
    out.emplace_back(item.substr(0, colon), item.substr(colon + 1));
    start = end + 1;
  }
  return out;
}

json spurious_json(const std::vector<SpuriousEntry>& entries) {
  json out = json::array();
  for (const auto& e : entries)
    out.push_back({{"a", e.a}, {"b", e.b}, {"pearson", e.pearson ? json(*e.pearson) : json(nullptr)}});
  return out;
}

std::unique_ptr<TableGenerator> generator_for(const std::string& sampler, const std::string& bridge_cmd) {
  if (sampler == "bridge") {
    if (bridge_cmd.empty()) throw DataError("--sampler bridge needs --bridge-cmd");
    return std::make_unique<BridgeGenerator>(bridge_cmd);
  }
  return std::make_unique<AutoregressiveEngine>(std::shared_ptr<const ConditionalSampler>(make_sampler(sampler)));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causally conditioned synthetic tabular data"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--log-level", g.log_level, "error|warn|info|debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));

  std::function<void()> action;

  // scm sample
  auto* scm = app.add_subcommand("scm", "Structural causal models")->fallthrough()->require_subcommand(1);
  auto* scm_sample = scm->add_subcommand("sample", "Sample an SCM")->fallthrough();
  std::string builtin, scm_file, out, intervention;
  double sigma = 1e-5;
  std::size_t n = 2000;
  scm_sample->add_option("--builtin", builtin, "Builtin SCM")->check(CLI::IsMember({"collider"}));
  scm_sample->add_option("--scm", scm_file, "SCM JSON file")->check(CLI::ExistingFile);
  scm_sample->add_option("--sigma", sigma, "Noise scale of the builtin collider");
  scm_sample->add_option("--n", n, "Rows")->required();
  scm_sample->add_option("--intervene", intervention, "node=value");
  scm_sample->add_option("--out", out, "Output CSV")->required();
  scm_sample->callback([&] {
    action = [&] {
      if (builtin.empty() == scm_file.empty()) throw DataError("give exactly one of --builtin and --scm");
      auto model = builtin.empty() ? scm_from_json(load_json(scm_file)) : builtin_collider_scm(sigma);
      if (!intervention.empty()) {
        const auto eq = intervention.find('=');
        if (eq == std::string::npos) throw DataError("--intervene must be node=value");
        model = intervene(model, {intervention.substr(0, eq), std::stod(intervention.substr(eq + 1))});
      }
      save_table(out, sample(model, n, g.seed));
      log(Level::info, "wrote " + std::to_string(n) + " rows to " + out);
    };
  });

  // split
  auto* split = app.add_subcommand("split", "Fixed test set and seeded train draw")->fallthrough();
  std::string data, schema_file, train_out, test_out;
  SplitSpec spec;
  split->add_option("--data", data, "Pool CSV")->required()->check(CLI::ExistingFile);
  split->add_option("--schema", schema_file, "Schema JSON")->check(CLI::ExistingFile);
  split->add_option("--test-size", spec.test_size, "Test rows");
  split->add_option("--train-size", spec.train_size, "Train rows")->required();
  split->add_option("--iteration", spec.iteration, "Iteration id");
  split->add_option("--train-out", train_out, "Train CSV")->required();
  split->add_option("--test-out", test_out, "Test CSV")->required();
  split->callback([&] {
    action = [&] {
      spec.master_seed = g.seed;
      const auto parts = fixed_split(load_table(data, schema_for(schema_file, data)), spec);
      save_table(train_out, parts.train);
      save_table(test_out, parts.test);
    };
  });

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a synthetic table")->fallthrough();
  std::string train_file, strategy = "vanilla", graph_file, order = "original", sampler = "cart", bridge_cmd;
  int permutations = 3;
  gen->add_option("--train", train_file, "Train CSV")->required()->check(CLI::ExistingFile);
  gen->add_option("--schema", schema_file, "Schema JSON")->check(CLI::ExistingFile);
  gen->add_option("--strategy", strategy, "vanilla|dag|cpdag")->check(CLI::IsMember({"vanilla", "dag", "cpdag"}));
  gen->add_option("--graph", graph_file, "Graph JSON")->check(CLI::ExistingFile);
  gen->add_option("--order", order, "original|topological|reverse")
      ->check(CLI::IsMember({"original", "topological", "reverse"}));
  gen->add_option("--sampler", sampler, "cart|lingauss|bridge")->check(CLI::IsMember({"cart", "lingauss", "bridge"}));
  gen->add_option("--bridge-cmd", bridge_cmd, "Bridge server command");
  gen->add_option("--n", n, "Rows to generate")->required();
  gen->add_option("--permutations", permutations, "Permutations forwarded to the sampler");
  gen->add_option("--out", out, "Output CSV")->required();
  gen->callback([&] {
    action = [&] {
      const auto train = load_table(train_file, schema_for(schema_file, train_file));
      const auto names = train.schema().names();
      const auto s = parse_strategy(strategy);
      GenerationRequest req{train, {}, n, g.seed, permutations, g.threads};
      if (s == Strategy::vanilla) {
        std::optional<CausalDag> dag;
        if (!graph_file.empty()) dag = dag_from_json(load_json(graph_file));
        const auto cols =
            ordering_columns(train.schema(), dag ? &*dag : nullptr, parse_ordering(order), false, g.seed);
        req.train = reorder_columns(train, cols);
        req.plan = build_plan(s, cols);
      } else {
        if (graph_file.empty()) throw DataError("--strategy " + strategy + " needs --graph");
        const auto j = load_json(graph_file);
        PlanGraph graph;
        if (s == Strategy::dag) graph = dag_from_json(j);
        else graph = cpdag_from_json(j);
        req.plan = build_plan(s, names, graph);
      }
      const auto synth = reorder_columns(generator_for(sampler, bridge_cmd)->generate(req), names);
      save_table(out, synth);
      log(Level::info, "generated " + std::to_string(n) + " rows with " + strategy + "/" + sampler);
    };
  });

  // discover
  auto* discover = app.add_subcommand("discover", "PC-stable causal discovery")->fallthrough();
  PcOptions pc;
  discover->add_option("--data", data, "Data CSV")->required()->check(CLI::ExistingFile);
  discover->add_option("--schema", schema_file, "Schema JSON")->check(CLI::ExistingFile);
  discover->add_option("--alpha", pc.alpha, "Significance level");
  discover->add_option("--max-condition-size", pc.max_condition_size, "Largest conditioning set");
  discover->add_option("--out", out, "Output graph JSON")->required();
  discover->callback([&] {
    action = [&] { write_json(out, to_json(pc_stable(load_table(data, schema_for(schema_file, data)), pc))); };
  });

  // graph-quality
  auto* gq = app.add_subcommand("graph-quality", "Compare a CPDAG with the true DAG")->fallthrough();
  std::string estimated, truth, mutilate_at;
  gq->add_option("--estimated", estimated, "Estimated graph JSON")->required()->check(CLI::ExistingFile);
  gq->add_option("--truth", truth, "True DAG JSON")->required()->check(CLI::ExistingFile);
  gq->add_option("--mutilate", mutilate_at, "Remove in-edges of this node from the truth");
  gq->add_option("--out", out, "Output JSON")->required();
  gq->callback([&] {
    action = [&] {
      std::optional<std::string> m;
      if (!mutilate_at.empty()) m = mutilate_at;
      write_json(out, to_json(graph_quality(cpdag_from_json(load_json(estimated)), dag_from_json(load_json(truth)), m)));
    };
  });

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Fidelity and privacy metrics")->fallthrough();
  std::string real_file, synth_file, spurious;
  eval->add_option("--real", real_file, "Real CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--synth", synth_file, "Synthetic CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--schema", schema_file, "Schema JSON")->check(CLI::ExistingFile);
  eval->add_option("--spurious", spurious, "Pairs a:b,c:d");
  eval->add_option("--out", out, "Output JSON")->required();
  eval->callback([&] {
    action = [&] {
      const auto schema = schema_for(schema_file, real_file);
      const auto r = evaluate(load_table(real_file, schema), load_table(synth_file, schema), parse_pairs(spurious),
                              g.threads);
      write_json(out, {{"cmd", r.cmd}, {"kmtvd", r.kmtvd}, {"nnaa", r.nnaa}, {"spurious", spurious_json(r.spurious)}});
    };
  });

  // compare
  auto* compare = app.add_subcommand("compare", "Paired comparison of two record files")->fallthrough();
  std::string metrics_a, metrics_b, family = "per_figure";
  compare->add_option("--metrics-a", metrics_a, "Records CSV, side a")->required()->check(CLI::ExistingFile);
  compare->add_option("--metrics-b", metrics_b, "Records CSV, side b")->required()->check(CLI::ExistingFile);
  compare->add_option("--family", family, "Holm family")->check(CLI::IsMember({"per_figure", "per_cell", "global"}));
  compare->add_option("--out", out, "Output JSON")->required();
  compare->callback([&] {
    action = [&] {
      auto records = parse_records(read_file(metrics_a));
      for (auto& r : records) r.strategy = "a";
      auto b = parse_records(read_file(metrics_b));
      for (auto& r : b) r.strategy = "b";
      records.insert(records.end(), b.begin(), b.end());
      const auto fam = family == "per_cell" ? HolmFamily::per_cell
                       : family == "global" ? HolmFamily::global
                                            : HolmFamily::per_figure;
      write_json(out, to_json(aggregate_and_compare(records, {{"a", "b"}}, fam)));
    };
  });

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a configured experiment")->fallthrough();
  std::string config_file, out_dir;
  exp->add_option("--config", config_file, "Experiment JSON")->required()->check(CLI::ExistingFile);
  exp->add_option("--out-dir", out_dir, "Output directory")->required();
  exp->callback([&] {
    action = [&] {
      const auto j = load_json(config_file);
      auto cfg = config_from_json(j, fs::path(config_file).parent_path());
      if (app.get_option("--seed")->count()) cfg.master_seed = g.seed;
      if (app.get_option("--threads")->count() || !j.contains("threads")) cfg.threads = g.threads;
      const auto protocol = j.value("protocol", std::string("quality"));
      if (protocol != "quality" && protocol != "ate") throw DataError("unknown protocol: " + protocol);
      log(Level::info, "running " + protocol + " experiment on " + std::to_string(cfg.threads) + " threads");
      const auto records = protocol == "ate" ? run_ate_experiment(cfg) : run_quality_experiment(cfg);
      json comparisons;
      if (!cfg.comparisons.empty()) comparisons = to_json(aggregate_and_compare(records, cfg.comparisons, cfg.family));
      json sensitivity;
      if (cfg.sensitivity) sensitivity = to_json(sensitivity_from_records(records, cfg.master_seed));
      fs::create_directories(out_dir);
      write_file_atomic(fs::path(out_dir) / "records.csv", format_records(records));
      if (!comparisons.is_null()) write_json(fs::path(out_dir) / "comparisons.json", comparisons);
      if (!sensitivity.is_null()) write_json(fs::path(out_dir) / "sensitivity.json", sensitivity);
      log(Level::info, "wrote " + std::to_string(records.size()) + " records to " + out_dir);
    };
  });

  // bridge-check
  auto* bc = app.add_subcommand("bridge-check", "Handshake with a bridge server")->fallthrough();
  bc->add_option("--bridge-cmd", bridge_cmd, "Bridge server command")->required();
  bc->callback([&] {
    action = [&] {
      BridgeProcess proc(bridge_cmd);
      const auto hs = proc.call({{"op", "handshake"}});
      const int status = proc.shutdown();
      std::cout << hs.dump() << '\n';
      if (hs.value("protocol", -1) != kBridgeProtocol) throw DataError("bridge speaks an unsupported protocol");
      if (status != 0) throw DataError("bridge exited with status " + std::to_string(status));
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  g_level = g.log_level == "error" ? Level::error
            : g.log_level == "warn"  ? Level::warn
            : g.log_level == "debug" ? Level::debug
                                     : Level::info;
  try {
    action();
  } catch (const DataError& e) {
    log(Level::error, e.what());
    return 2;
  } catch (const std::exception& e) {
    log(Level::error, e.what());
    return 2;
  }
  return 0;
}
