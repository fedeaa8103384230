#include "causagen/plan.hpp"

#include "causagen/error.hpp"

#include <algorithm>

namespace causagen {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::vanilla: return "vanilla";
    case Strategy::dag: return "dag";
    case Strategy::cpdag: return "cpdag";
  }
  return "?";
}

Strategy parse_strategy(std::string_view s) {
  if (s == "vanilla") return Strategy::vanilla;
  if (s == "dag") return Strategy::dag;
  if (s == "cpdag") return Strategy::cpdag;
  throw DataError("unknown strategy: " + std::string(s));
}

bool GenerationPlan::is_consistent() const {
  const auto n = columns.size();
  if (order.size() != n || conditioning.size() != n) return false;
  std::vector<std::size_t> position(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (order[i] >= n || position[order[i]] != n) return false;
    position[order[i]] = i;
  }
  for (std::size_t v = 0; v < n; ++v)
    for (auto c : conditioning[v])
      if (c >= n || position[c] >= position[v]) return false;
  return true;
}

namespace {

// Maps a graph adjacency onto the column index space.
Adjacency remap(const NodeSet& graph_nodes, const Adjacency& adj, const NodeSet& columns) {
  if (graph_nodes.size() != columns.size()) throw DataError("graph nodes do not match the columns");
  std::vector<std::size_t> to_col(graph_nodes.size());
  for (std::size_t i = 0; i < graph_nodes.size(); ++i) {
    const auto c = columns.find(graph_nodes[i]);
    if (!c) throw DataError("graph node '" + graph_nodes[i] + "' is not a column");
    to_col[i] = *c;
  }
  Adjacency out = Adjacency::Zero(adj.rows(), adj.cols());
  for (Eigen::Index i = 0; i < adj.rows(); ++i)
    for (Eigen::Index j = 0; j < adj.cols(); ++j)
      out(static_cast<Eigen::Index>(to_col[static_cast<std::size_t>(i)]),
          static_cast<Eigen::Index>(to_col[static_cast<std::size_t>(j)])) = adj(i, j);
  return out;
}

std::vector<std::size_t> prefix_of(const std::vector<std::size_t>& order, std::size_t position) {
  return {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(position)};
}

}  // namespace

GenerationPlan build_plan(Strategy strategy, std::span<const std::string> columns,
                          const PlanGraph& graph) {
  GenerationPlan plan;
  plan.strategy = strategy;
  plan.columns = NodeSet(std::vector<std::string>(columns.begin(), columns.end()));
  const auto n = plan.columns.size();
  plan.conditioning.assign(n, {});

  switch (strategy) {
    case Strategy::vanilla: {
      for (std::size_t i = 0; i < n; ++i) plan.order.push_back(i);
      for (std::size_t i = 0; i < n; ++i) plan.conditioning[i] = prefix_of(plan.order, i);
      break;
    }
    case Strategy::dag: {
      const auto* dag = std::get_if<CausalDag>(&graph);
      if (!dag) throw DataError("dag strategy requires a DAG");
      const Adjacency adj = remap(dag->nodes(), dag->adjacency(), plan.columns);
      plan.order = topological_indices(adj);
      for (std::size_t v = 0; v < n; ++v)
        for (std::size_t u = 0; u < n; ++u)
          if (adj(u, v)) plan.conditioning[v].push_back(u);
      break;
    }
    case Strategy::cpdag: {
      const Cpdag* cpdag = std::get_if<Cpdag>(&graph);
      if (!cpdag) throw DataError("cpdag strategy requires a CPDAG");
      const Adjacency dir = remap(cpdag->nodes(), cpdag->directed(), plan.columns);
      const Adjacency und = remap(cpdag->nodes(), cpdag->undirected(), plan.columns);
      std::vector<bool> in_block(n);
      for (std::size_t v = 0; v < n; ++v) {
        const auto k = static_cast<Eigen::Index>(v);
        in_block[v] = dir.row(k).any() || dir.col(k).any();
      }
      // Oriented block: topological over the directed edges, column order on
      // ties; the remaining nodes follow in column order.
      for (auto v : topological_indices(dir))
        if (in_block[v]) plan.order.push_back(v);
      for (std::size_t v = 0; v < n; ++v)
        if (!in_block[v]) plan.order.push_back(v);
      for (std::size_t i = 0; i < n; ++i) {
        const auto v = plan.order[i];
        const bool fully_directed = in_block[v] && !und.row(static_cast<Eigen::Index>(v)).any();
        if (fully_directed) {
          for (std::size_t u = 0; u < n; ++u)
            if (dir(u, v)) plan.conditioning[v].push_back(u);
        } else {
          plan.conditioning[v] = prefix_of(plan.order, i);
        }
      }
      break;
    }
  }
  if (!plan.is_consistent()) throw DataError("generation plan violates its ordering invariant");
  return plan;
}

}  // namespace causagen
