#include "causagen/error.hpp"
#include "causagen/plan.hpp"
#include "causagen/random.hpp"
#include "causagen/table.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace causagen;

namespace {

const std::vector<std::string> kCols{"X0", "X1", "X2", "X3"};
const std::vector<NamedEdge> kEdges{{"X3", "X2"}, {"X2", "X1"}, {"X0", "X1"}};
using Idx = std::vector<std::size_t>;

std::set<std::size_t> as_set(const Idx& v) { return {v.begin(), v.end()}; }

bool prefix_property(const GenerationPlan& p) {
  for (std::size_t i = 0; i < p.order.size(); ++i) {
    Idx prefix(p.order.begin(), p.order.begin() + static_cast<std::ptrdiff_t>(i));
    if (as_set(p.conditioning[p.order[i]]) != as_set(prefix)) return false;
  }
  return true;
}

Cpdag random_cpdag(std::size_t n, std::uint64_t seed, double directed_share) {
  Rng rng(seed);
  const auto perm = shuffled_indices(n, seed);
  Adjacency dir = Adjacency::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Adjacency und = dir;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() > 0.4) continue;
      const auto u = perm[i], v = perm[j];
      if (rng.uniform() < directed_share) dir(u, v) = 1;
      else und(u, v) = und(v, u) = 1;
    }
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
  return Cpdag(NodeSet(names), dir, und);
}

}  // namespace

TEST_SUITE("plan") {
  TEST_CASE("vanilla plan is the prefix") {
    const auto p = build_plan(Strategy::vanilla, kCols);
    CHECK(p.order == Idx{0, 1, 2, 3});
    CHECK(p.conditioning[0].empty());
    CHECK(p.conditioning[1] == Idx{0});
    CHECK(p.conditioning[2] == Idx{0, 1});
    CHECK(p.conditioning[3] == Idx{0, 1, 2});
    CHECK(p.is_consistent());
  }

  TEST_CASE("dag plan on the collider graph") {
    const auto p = build_plan(Strategy::dag, kCols, CausalDag(kCols, kEdges));
    CHECK(p.order == Idx{0, 3, 2, 1});
    CHECK(p.conditioning[0].empty());
    CHECK(p.conditioning[3].empty());
    CHECK(p.conditioning[2] == Idx{3});
    CHECK(as_set(p.conditioning[1]) == std::set<std::size_t>{0, 2});
  }

  TEST_CASE("cpdag plan on the minimal collider CPDAG") {
    const auto p = build_plan(Strategy::cpdag, kCols, minimal_cpdag(CausalDag(kCols, kEdges)));
    CHECK(p.order == Idx{0, 2, 1, 3});
    CHECK(p.conditioning[0].empty());
    CHECK(p.conditioning[2] == Idx{0});
    CHECK(as_set(p.conditioning[1]) == std::set<std::size_t>{0, 2});
    CHECK(as_set(p.conditioning[3]) == std::set<std::size_t>{0, 1, 2});
  }

  TEST_CASE("graph nodes are mapped onto the column order") {
    const std::vector<std::string> shuffled{"X2", "X0", "X3", "X1"};
    const auto p = build_plan(Strategy::dag, kCols, CausalDag(shuffled, kEdges));
    CHECK(p.order == Idx{0, 3, 2, 1});
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(build_plan(Strategy::dag, kCols), DataError);
    CHECK_THROWS_AS(build_plan(Strategy::cpdag, kCols), DataError);
    const std::vector<std::string> other{"X0", "X1", "X2", "Y"};
    CHECK_THROWS_AS(build_plan(Strategy::dag, other, CausalDag(kCols, kEdges)), DataError);
    CHECK_THROWS_AS(parse_strategy("bogus"), DataError);
  }

  TEST_CASE("cpdag without directed edges equals vanilla") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto g = random_cpdag(6, seed, 0.0);
      const auto c = build_plan(Strategy::cpdag, g.nodes().names(), g);
      const auto v = build_plan(Strategy::vanilla, g.nodes().names());
      CHECK(c.order == v.order);
      for (std::size_t j = 0; j < 6; ++j) CHECK(as_set(c.conditioning[j]) == as_set(v.conditioning[j]));
    }
  }

  TEST_CASE("fully directed cpdag equals the dag plan on non-isolated nodes") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto g = random_cpdag(6, seed, 1.0);
      const auto dag = g.to_dag();
      const auto c = build_plan(Strategy::cpdag, g.nodes().names(), g);
      const auto d = build_plan(Strategy::dag, g.nodes().names(), dag);
      for (std::size_t j = 0; j < 6; ++j) {
        const bool isolated = dag.parents(j).empty() && dag.children(j).empty();
        if (!isolated) CHECK(as_set(c.conditioning[j]) == as_set(d.conditioning[j]));
      }
    }
  }

  TEST_CASE("every plan is consistent") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto g = random_cpdag(7, seed, 0.5);
      const auto c = build_plan(Strategy::cpdag, g.nodes().names(), g);
      CHECK(c.is_consistent());
      std::vector<std::size_t> pos(7);
      for (std::size_t i = 0; i < 7; ++i) pos[c.order[i]] = i;
      for (std::size_t v = 0; v < 7; ++v) {
        for (auto u : c.conditioning[v]) CHECK(pos[u] < pos[v]);
        if (!is_fully_directed(g, v)) {
          Idx prefix(c.order.begin(), c.order.begin() + static_cast<std::ptrdiff_t>(pos[v]));
          CHECK(as_set(c.conditioning[v]) == as_set(prefix));
        } else {
          CHECK(as_set(c.conditioning[v]) == as_set(g.directed_parents(v)));
        }
      }
      CHECK(prefix_property(build_plan(Strategy::vanilla, g.nodes().names())));
    }
  }
}
