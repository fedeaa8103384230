#pragma once

#include "causagen/graph.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace causagen {

enum class Strategy { vanilla, dag, cpdag };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view s);

// Executable autoregressive schedule. Indices refer to the column list the
// plan was built for.
struct GenerationPlan {
  Strategy strategy = Strategy::vanilla;
  NodeSet columns;
  std::vector<std::size_t> order;                      // generation order
  std::vector<std::vector<std::size_t>> conditioning;  // per column index

  // Every conditioning variable precedes its target in `order`.
  bool is_consistent() const;
};

using PlanGraph = std::variant<std::monostate, CausalDag, Cpdag>;

// vanilla: order = columns, each target conditions on its whole prefix.
// dag:     order = topological order, each target conditions on its parents.
// cpdag:   nodes touching a directed edge come first, sorted topologically
//          over the directed edges; the rest follow in column order. Nodes
//          whose adjacent edges are all directed condition on their directed
//          parents, every other node on its prefix.
GenerationPlan build_plan(Strategy strategy, std::span<const std::string> columns,
                          const PlanGraph& graph = {});

}  // namespace causagen
