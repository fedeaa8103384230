#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace causagen {

using Adjacency = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

struct Edge {
  std::size_t from;
  std::size_t to;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

using NamedEdge = std::pair<std::string, std::string>;

// Node names are in column order; every tie in this module is broken by that
// order.
class NodeSet {
 public:
  NodeSet() = default;
  explicit NodeSet(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& operator[](std::size_t i) const { return names_[i]; }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;  // throws DataError

  friend bool operator==(const NodeSet&, const NodeSet&) = default;

 private:
  std::vector<std::string> names_;
};

class CausalDag {
 public:
  CausalDag() = default;
  CausalDag(std::vector<std::string> nodes, std::span<const NamedEdge> edges);
  CausalDag(NodeSet nodes, std::span<const Edge> edges);

  const NodeSet& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t index_of(std::string_view name) const { return nodes_.index_of(name); }

  bool has_edge(std::size_t from, std::size_t to) const { return adj_(from, to) != 0; }
  bool adjacent(std::size_t a, std::size_t b) const { return has_edge(a, b) || has_edge(b, a); }
  std::vector<std::size_t> parents(std::size_t v) const;
  std::vector<std::size_t> children(std::size_t v) const;
  std::vector<Edge> edges() const;  // sorted
  const Adjacency& adjacency() const { return adj_; }

  friend bool operator==(const CausalDag& a, const CausalDag& b) {
    return a.nodes_ == b.nodes_ && a.adj_ == b.adj_;
  }

 private:
  NodeSet nodes_;
  Adjacency adj_;
};

// Directed edges are stored once (from, to); undirected edges symmetrically.
class Cpdag {
 public:
  Cpdag() = default;
  Cpdag(std::vector<std::string> nodes, std::span<const NamedEdge> directed,
        std::span<const NamedEdge> undirected);
  Cpdag(NodeSet nodes, Adjacency directed, Adjacency undirected);

  static Cpdag from_dag(const CausalDag& dag);

  const NodeSet& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t index_of(std::string_view name) const { return nodes_.index_of(name); }

  bool has_directed(std::size_t from, std::size_t to) const { return dir_(from, to) != 0; }
  bool has_undirected(std::size_t a, std::size_t b) const { return und_(a, b) != 0; }
  bool adjacent(std::size_t a, std::size_t b) const {
    return has_directed(a, b) || has_directed(b, a) || has_undirected(a, b);
  }

  std::vector<std::size_t> directed_parents(std::size_t v) const;
  std::vector<Edge> directed_edges() const;    // sorted
  std::vector<Edge> undirected_edges() const;  // sorted, from < to
  std::size_t directed_count() const;
  std::size_t undirected_count() const;

  const Adjacency& directed() const { return dir_; }
  const Adjacency& undirected() const { return und_; }

  // Throws DataError if any undirected edge remains.
  CausalDag to_dag() const;

  friend bool operator==(const Cpdag& a, const Cpdag& b) {
    return a.nodes_ == b.nodes_ && a.dir_ == b.dir_ && a.und_ == b.und_;
  }

 private:
  NodeSet nodes_;
  Adjacency dir_;
  Adjacency und_;
};

// Kahn's algorithm over the directed adjacency; among available nodes the
// smallest column index goes first. Throws DataError on a cycle.
std::vector<std::size_t> topological_indices(const Adjacency& directed);
std::vector<std::string> topological_order(const CausalDag& g);
std::vector<std::string> reverse_topological_order(const CausalDag& g);

// Collider a -> c <- b with a and b non-adjacent; a < b by column index.
struct VStructure {
  std::size_t a;
  std::size_t collider;
  std::size_t b;
  friend auto operator<=>(const VStructure&, const VStructure&) = default;
};

std::vector<VStructure> v_structures(const CausalDag& g);

// Orients exactly the v-structure edges of g and leaves every other skeleton
// edge undirected. No Meek propagation.
Cpdag minimal_cpdag(const CausalDag& g);

// At least one adjacent directed edge (either direction) and no adjacent
// undirected edge.
bool is_fully_directed(const Cpdag& g, std::size_t v);
bool is_fully_directed(const Cpdag& g, std::string_view v);

// The DAG with all in-edges of `node` removed.
CausalDag mutilate(const CausalDag& g, std::size_t node);

bool has_directed_cycle(const Adjacency& directed);

}  // namespace causagen
