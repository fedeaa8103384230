#include "causagen/graph_quality.hpp"

#include "causagen/error.hpp"

namespace causagen {

GraphQuality graph_quality(const Cpdag& estimated, const CausalDag& truth_in,
                           std::optional<std::string> mutilate_at) {
  const CausalDag truth = mutilate_at ? mutilate(truth_in, truth_in.index_of(*mutilate_at)) : truth_in;
  if (estimated.nodes() != truth.nodes()) throw DataError("graph_quality: node sets differ");
  const auto n = truth.size();

  std::size_t true_edges = 0, skeleton_hits = 0, direction_hits = 0;
  for (const auto& e : truth.edges()) {
    ++true_edges;
    if (estimated.adjacent(e.from, e.to)) ++skeleton_hits;
    if (estimated.has_directed(e.from, e.to)) ++direction_hits;
  }
  std::size_t directed = 0, undirected = 0, correct = 0;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) {
      if (estimated.has_directed(u, v)) {
        ++directed;
        if (truth.has_edge(u, v)) ++correct;
      }
      if (u < v && estimated.has_undirected(u, v)) ++undirected;
    }

  auto ratio = [](std::size_t a, std::size_t b) -> std::optional<double> {
    if (b == 0) return std::nullopt;
    return static_cast<double>(a) / static_cast<double>(b);
  };
  GraphQuality q;
  q.skeleton_recall = ratio(skeleton_hits, true_edges);
  q.direction_recall = ratio(direction_hits, true_edges);
  q.oriented_fraction = ratio(directed, directed + undirected);
  q.direction_precision = ratio(correct, directed);
  return q;
}

}  // namespace causagen
