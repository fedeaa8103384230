// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
#include "causagen/ci_test.hpp"
#include "causagen/error.hpp"
#include "causagen/experiment.hpp"
#include "causagen/graph.hpp"
#include "causagen/metrics.hpp"
#include "causagen/pc.hpp"
#include "causagen/plan.hpp"
#include "causagen/random.hpp"
#include "causagen/scm.hpp"
#include "causagen/stats.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <sys/wait.h>

using namespace causagen;

namespace {

const std::vector<std::string> kCols{"X0", "X1", "X2", "X3"};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// Random DAG on n nodes whose column order is not a topological order.
CausalDag random_dag(std::size_t n, std::uint64_t seed, double density) {
  Rng rng(seed);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("V" + std::to_string(i));
  const auto rank = shuffled_indices(n, derive_seed(seed, 0, "rank"));
  std::vector<NamedEdge> edges;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (rank[a] < rank[b] && rng.uniform() < density) edges.emplace_back(names[a], names[b]);
  return CausalDag(names, edges);
}

std::vector<std::pair<std::size_t, std::size_t>> edge_pairs(const CausalDag& g) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& e : g.edges()) out.emplace_back(e.from, e.to);
  return out;
}

std::set<std::size_t> as_set(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

// ---------------------------------------------------------------------------

Outcome metric_oracles() {
  double worst = 0.0;
  std::size_t cases = 0, comparisons = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng rng(derive_seed(77, s, "case"));
    const std::size_t n = 2 + rng.index(199);
    const std::size_t d = 1 + rng.index(6);
    const auto real = fixtures::random_mixed(n, d, derive_seed(77, s, "real"));
    // Same schema and size, independent rows.
    const std::size_t m = n;
    const auto pool = fixtures::random_mixed(std::max(n, m) * 2, d, derive_seed(77, s, "real"));
    std::vector<Eigen::Index> rows;
    const auto perm = shuffled_indices(static_cast<std::size_t>(pool.rows()), derive_seed(77, s, "rows"));
    for (std::size_t i = 0; i < m; ++i) rows.push_back(static_cast<Eigen::Index>(perm[i]));
    const auto synth = pool.select_rows(rows);

    auto track = [&](double a, double b) {
      worst = std::max(worst, std::isnan(a) && std::isnan(b) ? 0.0 : std::abs(a - b));
      ++comparisons;
    };
    track(cmd(real, synth), oracle::cmd(real, synth));
    const auto rc = discretize(real, real, 20), sc = discretize(synth, real, 20);
    for (Eigen::Index i = 0; i < real.cols(); ++i)
      for (Eigen::Index j = i + 1; j < real.cols(); ++j)
        track(pair_tvd(rc, sc, i, j), oracle::pair_tvd(real, synth, static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
    if (d > 1) track(kmtvd(real, synth), oracle::kmtvd(real, synth));
    const auto scale = gower_scale(real, synth);
    const auto ranges = oracle::pooled_ranges(real, synth);
    for (int k = 0; k < 20; ++k) {
      const auto a = static_cast<Eigen::Index>(rng.index(n)), b = static_cast<Eigen::Index>(rng.index(m));
      std::vector<double> u(d), v(d);
      for (std::size_t j = 0; j < d; ++j) {
        u[j] = real.values()(a, static_cast<Eigen::Index>(j));
        v[j] = synth.values()(b, static_cast<Eigen::Index>(j));
      }
      track(gower(u, v, scale), oracle::gower(real, a, synth, b, ranges));
    }
    track(nnaa(real, synth), oracle::nnaa(real, synth));
    ++cases;
  }
  return {worst <= 1e-12, std::to_string(cases) + " tables, " + std::to_string(comparisons) +
                              " comparisons, max |diff| " + fmt(worst)};
}

Outcome statistics_oracles() {
  double worst_w = 0.0;
  std::size_t hl_mismatch = 0, holm_mismatch = 0;
  for (std::uint64_t s = 0; s < 300; ++s) {
    Rng rng(derive_seed(5, s, "wilcoxon"));
    const std::size_t n = 1 + rng.index(12);
    std::vector<double> d(n);
    for (auto& x : d) x = rng.uniform() < 0.1 ? 0.0 : rng.normal() + 0.4;
    worst_w = std::max(worst_w, std::abs(wilcoxon_pratt(d) - oracle::wilcoxon_exact(d)));
    std::vector<double> h(1 + rng.index(40));
    for (auto& x : h) x = std::round(rng.normal() * 16) / 8;
    if (hodges_lehmann(h) != oracle::hodges_lehmann(h)) ++hl_mismatch;
  }
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(derive_seed(5, s, "holm"));
    std::vector<double> p(1 + rng.index(20));
    for (auto& x : p) x = rng.uniform() < 0.2 ? 0.01 : rng.uniform() * 0.2;
    const auto got = holm(p), want = oracle::holm(p);
    for (std::size_t i = 0; i < p.size(); ++i)
      if (got[i] != want[i]) ++holm_mismatch;
  }
  return {worst_w <= 1e-12 && hl_mismatch == 0 && holm_mismatch == 0,
          "Wilcoxon max |diff| " + fmt(worst_w) + " over 300 samples (n <= 12); HL mismatches " +
              std::to_string(hl_mismatch) + "/300; Holm mismatches " + std::to_string(holm_mismatch) +
              " over 100 vectors"};
}

Outcome graph_oracles() {
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  const auto g = builtin_collider_scm().dag();
  const auto vs = v_structures(g);
  expect(vs.size() == 1 && vs[0] == VStructure{0, 1, 2}, "v-structure X0 -> X1 <- X2");
  expect(topological_order(g) == std::vector<std::string>{"X0", "X3", "X2", "X1"}, "topological order");
  const auto cp = minimal_cpdag(g);
  expect(cp.directed_edges() == std::vector<Edge>{{0, 1}, {2, 1}}, "minimal CPDAG directed edges");
  expect(cp.undirected_edges() == std::vector<Edge>{{2, 3}}, "minimal CPDAG undirected edge");

  using Sets = std::vector<std::vector<std::size_t>>;
  const auto van = build_plan(Strategy::vanilla, kCols);
  expect(van.order == std::vector<std::size_t>{0, 1, 2, 3} && van.conditioning == Sets{{}, {0}, {0, 1}, {0, 1, 2}},
         "vanilla plan");
  const auto dag = build_plan(Strategy::dag, kCols, g);
  expect(dag.order == std::vector<std::size_t>{0, 3, 2, 1} && dag.conditioning == Sets{{}, {0, 2}, {3}, {}},
         "dag plan");
  const auto cpd = build_plan(Strategy::cpdag, kCols, cp);
  expect(cpd.order == std::vector<std::size_t>{0, 2, 1, 3} && cpd.conditioning == Sets{{}, {0, 2}, {0}, {0, 2, 1}},
         "cpdag plan");

  // Brute-force cross-checks on random graphs.
  std::size_t graphs = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto r = random_dag(2 + s % 6, derive_seed(9, s, "dag"), 0.45);
    const auto pairs = edge_pairs(r);
    const auto want_topo = oracle::topological(r.size(), pairs);
    std::vector<std::string> want_names;
    for (auto i : want_topo) want_names.push_back(r.nodes()[i]);
    expect(topological_order(r) == want_names, "topological order, graph " + std::to_string(s));
    std::set<oracle::Triple> got_vs;
    for (const auto& v : v_structures(r)) got_vs.insert({v.a, v.collider, v.b});
    expect(got_vs == oracle::v_structures(r.size(), pairs), "v-structures, graph " + std::to_string(s));
    const auto m = minimal_cpdag(r);
    std::set<std::pair<std::size_t, std::size_t>> want_dir;
    for (const auto& t : oracle::v_structures(r.size(), pairs)) {
      want_dir.insert({t.a, t.c});
      want_dir.insert({t.b, t.c});
    }
    std::set<std::pair<std::size_t, std::size_t>> got_dir;
    for (const auto& e : m.directed_edges()) got_dir.insert({e.from, e.to});
    expect(got_dir == want_dir, "minimal CPDAG orientation, graph " + std::to_string(s));
    expect(m.directed_count() + m.undirected_count() == pairs.size(), "minimal CPDAG skeleton, graph " + std::to_string(s));
    ++graphs;
  }
  std::string detail = "hand-derived collider values and " + std::to_string(graphs) + " random DAGs";
  if (!failures.empty()) detail += "; first mismatch: " + failures.front();
  return {failures.empty(), detail};
}

Outcome collider_bias() {
  std::vector<RunRecord> all;
  std::map<double, std::pair<double, double>> means;
  for (double sigma : {1e-5, 1e-2}) {
    ExperimentConfig cfg;
    cfg.dataset.name = "collider-" + fmt(sigma);
    cfg.dataset.scm = builtin_collider_scm(sigma);
    cfg.strategies = {make_strategy(Strategy::vanilla, Ordering::reverse), make_strategy(Strategy::dag)};
    cfg.train_sizes = {20};
    cfg.iterations = 100;
    cfg.metrics = {"cmd"};
    cfg.spurious_pairs = {{"X0", "X2"}};
    cfg.master_seed = 20240;
    cfg.threads = 1;
    double sum[2] = {0, 0};
    std::size_t count[2] = {0, 0};
    for (auto r : run_quality_experiment(cfg)) {
      if (r.metric != "rho:X0:X2") continue;
      r.value = std::abs(r.value);
      const int k = r.strategy == "dag-true-dag" ? 1 : 0;
      if (std::isfinite(r.value)) {
        sum[k] += r.value;
        ++count[k];
      }
      all.push_back(r);
    }
    means[sigma] = {sum[0] / static_cast<double>(count[0]), sum[1] / static_cast<double>(count[1])};
  }
  const auto rows = aggregate_and_compare(all, {{"vanilla-reverse", "dag-true-dag"}}, HolmFamily::global);
  bool pass = rows.size() == 2;
  std::string detail;
  for (const auto& row : rows) {
    const double sigma = row.dataset == "collider-" + fmt(1e-5) ? 1e-5 : 1e-2;
    const auto [van, dag] = means[sigma];
    const bool ok = van >= 3 * dag && dag < 0.05 && row.result.p_adjusted < 0.05;
    pass = pass && ok;
    detail += "sigma=" + fmt(sigma) + ": mean|rho| vanilla-reverse " + fmt(van) + ", dag " + fmt(dag) + ", ratio " +
              fmt(van / dag, 3) + ", Holm p " + fmt(row.result.p_adjusted, 3) + "; ";
  }
  return {pass, detail};
}

Outcome cpdag_fallback() {
  std::size_t checked = 0, bad = 0;
  for (std::uint64_t s = 0; s < 300; ++s) {
    const auto g = random_dag(1 + s % 8, derive_seed(21, s, "dag"), 0.4);
    const auto& names = g.nodes().names();
    std::vector<NamedEdge> skeleton;
    for (const auto& e : g.edges()) skeleton.emplace_back(names[e.from], names[e.to]);
    const Cpdag undirected(names, {}, skeleton);
    const auto van = build_plan(Strategy::vanilla, names);
    const auto cp = build_plan(Strategy::cpdag, names, undirected);
    if (cp.order != van.order) ++bad;
    for (std::size_t v = 0; v < names.size(); ++v)
      if (as_set(cp.conditioning[v]) != as_set(van.conditioning[v])) ++bad;

    const Cpdag directed(names, skeleton, {});
    const auto dag = build_plan(Strategy::dag, names, g);
    const auto full = build_plan(Strategy::cpdag, names, directed);
    for (std::size_t v = 0; v < names.size(); ++v) {
      if (g.parents(v).empty() && g.children(v).empty()) continue;
      if (as_set(full.conditioning[v]) != as_set(dag.conditioning[v])) ++bad;
      if (as_set(full.conditioning[v]) != as_set(g.parents(v))) ++bad;
    }
    checked += 2;
  }
  return {bad == 0, std::to_string(checked) + " plans compared, " + std::to_string(bad) + " mismatches"};
}

Outcome pc_recovery() {
  auto recovered = [](const Cpdag& c) {
    const auto truth = builtin_collider_scm().dag();
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = a + 1; b < 4; ++b)
        if (c.adjacent(a, b) != truth.adjacent(a, b)) return false;
    return c.has_directed(0, 1) && c.has_directed(2, 1);
  };
  std::size_t hits = 0, invariant = 0, skeleton_drop = 0, noisy_hits = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto data = sample(builtin_collider_scm(), 5000, derive_seed(31, s, "pc"));
    const auto g = pc_stable(data);
    if (recovered(g)) ++hits;
    if (!g.adjacent(1, 2)) ++skeleton_drop;

    const auto perm = shuffled_indices(4, derive_seed(31, s, "perm"));
    std::vector<std::string> permuted;
    for (auto p : perm) permuted.push_back(kCols[p]);
    const auto h = pc_stable(reorder_columns(data, permuted));
    bool same = true;
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) {
        const auto pa = h.index_of(kCols[a]), pb = h.index_of(kCols[b]);
        same = same && g.has_directed(a, b) == h.has_directed(pa, pb) && g.has_undirected(a, b) == h.has_undirected(pa, pb);
      }
    if (same) ++invariant;
    if (s < 20 && recovered(pc_stable(sample(builtin_collider_scm(1.0), 5000, derive_seed(31, s, "pc-noisy")))))
      ++noisy_hits;
  }
  return {hits >= 95 && invariant == 100,
          "sigma=1e-5: recovered " + std::to_string(hits) + "/100 (X1-X2 removed by X1 _||_ X2 | X3 in " +
              std::to_string(skeleton_drop) + "/100); permutation-invariant " + std::to_string(invariant) +
              "/100; reference at sigma=1: recovered " + std::to_string(noisy_hits) + "/20"};
}

Outcome ci_calibration() {
  std::size_t fz = 0, g2 = 0;
  const int sims = 500;
  for (int s = 0; s < sims; ++s) {
    Rng rng(derive_seed(41, static_cast<std::uint64_t>(s), "fz"));
    Eigen::MatrixXd v(200, 3);
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const double z = rng.normal();
      v(i, 0) = z + rng.normal();
      v(i, 1) = -z + rng.normal();
      v(i, 2) = z;
    }
    const std::size_t cond[] = {2};
    if (!fisher_z(Table(Schema::numeric(std::vector<std::string>{"x", "y", "z"}), v), 0, 1, cond, 0.05).independent)
      ++fz;

    Rng cat(derive_seed(41, static_cast<std::uint64_t>(s), "g2"));
    Eigen::MatrixXi codes(1000, 3);
    for (Eigen::Index i = 0; i < codes.rows(); ++i) {
      const int z = static_cast<int>(cat.index(2));
      codes(i, 2) = z;
      codes(i, 0) = cat.uniform() < 0.6 ? z : static_cast<int>(cat.index(3));
      codes(i, 1) = cat.uniform() < 0.6 ? 2 - z : static_cast<int>(cat.index(3));
    }
    const int levels[] = {3, 3, 2};
    if (!g2_test(codes, levels, 0, 1, cond, 0.05).independent) ++g2;
  }
  const double rf = static_cast<double>(fz) / sims, rg = static_cast<double>(g2) / sims;
  return {std::abs(rf - 0.05) <= 0.02 && std::abs(rg - 0.05) <= 0.02,
          "Fisher-Z rate " + fmt(rf, 3) + ", G2 rate " + fmt(rg, 3) + " over " + std::to_string(sims) +
              " null simulations each"};
}

struct AteRun {
  bool pass = true;
  std::string detail;
};

AteRun ate_run(const std::string& sampler) {
  ExperimentConfig cfg;
  cfg.dataset.name = "collider";
  cfg.dataset.scm = builtin_collider_scm();
  cfg.strategies = {make_strategy(Strategy::vanilla, Ordering::reverse), make_strategy(Strategy::dag)};
  cfg.train_sizes = {20, 100};
  cfg.iterations = 100;
  cfg.master_seed = 4242;
  cfg.sampler = sampler;
  cfg.ate = AteSpec{"X2", "X1", 0.0, 1.0, ArmAssignment::nearest, {}};
  cfg.threads = 1;
  const auto records = run_ate_experiment(cfg);
  const auto rows = aggregate_and_compare(records, {{"vanilla-reverse", "dag-true-dag"}});
  std::map<std::pair<std::string, std::size_t>, std::vector<double>> values;
  for (const auto& r : records)
    if (std::isfinite(r.value)) values[{r.strategy, r.train_size}].push_back(r.value);
  AteRun out{rows.size() == 2, sampler + " sampler: "};
  for (const auto& row : rows) {
    out.pass = out.pass && row.result.hl_estimate > 0 && row.result.p_adjusted < 0.05;
    out.detail += "N=" + std::to_string(row.train_size) + " median dATE vanilla-reverse " +
                  fmt(median(values[{"vanilla-reverse", row.train_size}])) + ", dag " +
                  fmt(median(values[{"dag-true-dag", row.train_size}])) + ", HL " + fmt(row.result.hl_estimate) +
                  ", Holm p " + fmt(row.result.p_adjusted, 3) + "; ";
  }
  return out;
}

// Gated on the linear-Gaussian sampler; the CART run is reported only.
Outcome ate_preservation() {
  const auto linear = ate_run("lingauss");
  const auto cart = ate_run("cart");
  return {linear.pass, "analytic ATE " + fmt(analytic_ate(builtin_collider_scm(), "X2", "X1", 0, 1)) + "; " +
                           linear.detail + "reference " + cart.detail + (cart.pass ? "(passes)" : "(does not pass)")};
}

Outcome order_sensitivity() {
  ExperimentConfig cfg;
  cfg.dataset.name = "collider";
  cfg.dataset.scm = builtin_collider_scm();
  cfg.strategies = {make_strategy(Strategy::vanilla, Ordering::original),
                    make_strategy(Strategy::vanilla, Ordering::topological),
                    make_strategy(Strategy::vanilla, Ordering::reverse)};
  cfg.train_sizes = {20, 100, 500};
  cfg.iterations = 100;
  cfg.metrics = {"cmd"};
  cfg.master_seed = 777;
  cfg.threads = 1;
  const auto cells = run_sensitivity(cfg);
  bool pass = cells.size() == 3;
  std::string detail;
  double previous = std::numeric_limits<double>::infinity();
  for (const auto& c : cells) {
    pass = pass && c.median_range <= previous && c.ci.low <= c.median_range && c.median_range <= c.ci.high;
    previous = c.median_range;
    detail += "N=" + std::to_string(c.train_size) + ": median CMD range " + fmt(c.median_range) + " [" +
              fmt(c.ci.low) + ", " + fmt(c.ci.high) + "]; ";
  }
  return {pass, detail};
}

int run_cli(const std::string& args) {
  const std::string cmd = "'" + std::string(CAUSAGEN_CLI) + "' --log-level error " + args;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

Outcome determinism() {
  fixtures::TempDir dir("acceptance-determinism");
  const nlohmann::json cfg{
      {"dataset", {{"name", "collider"}, {"builtin", "collider"}}},
      {"strategies",
       {{{"strategy", "vanilla"}, {"ordering", "original"}},
        {{"strategy", "vanilla"}, {"ordering", "topological"}},
        {{"strategy", "vanilla"}, {"ordering", "reverse"}},
        {{"strategy", "dag"}},
        {{"strategy", "cpdag"}, {"graph", "minimal-cpdag"}},
        {{"strategy", "cpdag"}, {"graph", "discovered-cpdag"}}}},
      {"train_sizes", {20, 50, 100, 200, 500}},
      {"iterations", 10},
      {"graph_metrics", true},
      {"spurious_pairs", nlohmann::json::parse(R"([["X0", "X2"]])")}};
  {
    std::ofstream f(dir / "exp.json");
    f << cfg.dump(2);
  }
  const int a = run_cli("--seed 3 --threads 1 experiment --config '" + (dir / "exp.json").string() + "' --out-dir '" +
                        (dir / "t1").string() + "'");
  const int b = run_cli("--seed 3 --threads 8 experiment --config '" + (dir / "exp.json").string() + "' --out-dir '" +
                        (dir / "t8").string() + "'");
  const auto r1 = slurp(dir / "t1" / "records.csv"), r8 = slurp(dir / "t8" / "records.csv");
  const auto lines = static_cast<std::size_t>(std::count(r1.begin(), r1.end(), '\n'));
  return {a == 0 && b == 0 && !r1.empty() && r1 == r8,
          "exit codes " + std::to_string(a) + "/" + std::to_string(b) + ", " + std::to_string(lines) +
              " lines, byte-identical: " + (r1 == r8 ? "yes" : "no")};
}

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

// Optional arguments select criteria by name.
int main(int argc, char** argv) {
  const std::set<std::string> only(argv + 1, argv + argc);
  const std::vector<Criterion> criteria{
      {"metric-oracles", 30, metric_oracles},
      {"statistics-oracles", 10, statistics_oracles},
      {"graph-oracles", 60, graph_oracles},
      {"collider-bias", 600, collider_bias},
      {"cpdag-fallback", 60, cpdag_fallback},
      {"pc-recovery", 120, pc_recovery},
      {"ci-calibration", 60, ci_calibration},
      {"ate-preservation", 600, ate_preservation},
      {"order-sensitivity", 1800, order_sensitivity},
      {"determinism", 1800, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.name)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.budget_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::cout << (pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << " (" << fmt(seconds, 3) << " s, budget "
              << c.budget_seconds << " s" << (in_time ? "" : ", over budget") << ")" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
