#pragma once

#include "causagen/graph.hpp"

#include <optional>
#include <string>

namespace causagen {

// Undefined entries (no true edges, no estimated edges, no oriented edges)
// are empty optionals.
struct GraphQuality {
  std::optional<double> skeleton_recall;
  std::optional<double> direction_recall;
  std::optional<double> oriented_fraction;
  std::optional<double> direction_precision;
};

// If `mutilate_at` is set, the truth first loses the in-edges of that node.
GraphQuality graph_quality(const Cpdag& estimated, const CausalDag& truth,
                           std::optional<std::string> mutilate_at = std::nullopt);

}  // namespace causagen
