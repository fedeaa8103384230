#include "causagen/graph.hpp"

#include "causagen/error.hpp"

#include <algorithm>
#include <unordered_set>

namespace causagen {

NodeSet::NodeSet(std::vector<std::string> names) : names_(std::move(names)) {
  std::unordered_set<std::string> seen;
  for (const auto& n : names_)
    if (!seen.insert(n).second) throw DataError("duplicate node: " + n);
}

std::optional<std::size_t> NodeSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

std::size_t NodeSet::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw DataError("unknown node: " + std::string(name));
}

namespace {

Adjacency empty_adjacency(std::size_t n) {
  return Adjacency::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

std::vector<std::size_t> nonzero_in_column(const Adjacency& a, std::size_t v) {
  std::vector<std::size_t> out;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    if (a(i, static_cast<Eigen::Index>(v))) out.push_back(static_cast<std::size_t>(i));
  return out;
}

void add_directed(Adjacency& adj, std::size_t u, std::size_t v, const NodeSet& nodes) {
  if (u == v) throw DataError("self-loop on " + nodes[u]);
  if (adj(u, v)) throw DataError("duplicate edge " + nodes[u] + " -> " + nodes[v]);
  adj(u, v) = 1;
}

}  // namespace

std::vector<std::size_t> topological_indices(const Adjacency& directed) {
  const auto n = static_cast<std::size_t>(directed.rows());
  std::vector<int> indegree(n, 0);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (directed(u, v)) ++indegree[v];
  std::vector<std::size_t> order;
  std::vector<bool> done(n, false);
  order.reserve(n);
  while (order.size() < n) {
    std::size_t next = n;
    for (std::size_t v = 0; v < n; ++v)
      if (!done[v] && indegree[v] == 0) {
        next = v;
        break;
      }
    if (next == n) throw DataError("graph has a directed cycle");
    done[next] = true;
    order.push_back(next);
    for (std::size_t v = 0; v < n; ++v)
      if (directed(next, v)) --indegree[v];
  }
  return order;
}

bool has_directed_cycle(const Adjacency& directed) {
  try {
    topological_indices(directed);
    return false;
  } catch (const DataError&) {
    return true;
  }
}

CausalDag::CausalDag(std::vector<std::string> nodes, std::span<const NamedEdge> edges)
    : nodes_(std::move(nodes)), adj_(empty_adjacency(nodes_.size())) {
  for (const auto& [u, v] : edges) add_directed(adj_, nodes_.index_of(u), nodes_.index_of(v), nodes_);
  if (has_directed_cycle(adj_)) throw DataError("DAG has a directed cycle");
}

CausalDag::CausalDag(NodeSet nodes, std::span<const Edge> edges)
    : nodes_(std::move(nodes)), adj_(empty_adjacency(nodes_.size())) {
  for (const auto& e : edges) {
    if (e.from >= nodes_.size() || e.to >= nodes_.size()) throw DataError("edge endpoint out of range");
    add_directed(adj_, e.from, e.to, nodes_);
  }
  if (has_directed_cycle(adj_)) throw DataError("DAG has a directed cycle");
}

std::vector<std::size_t> CausalDag::parents(std::size_t v) const { return nonzero_in_column(adj_, v); }

std::vector<std::size_t> CausalDag::children(std::size_t v) const {
  std::vector<std::size_t> out;
  for (Eigen::Index j = 0; j < adj_.cols(); ++j)
    if (adj_(static_cast<Eigen::Index>(v), j)) out.push_back(static_cast<std::size_t>(j));
  return out;
}

std::vector<Edge> CausalDag::edges() const {
  std::vector<Edge> out;
  for (Eigen::Index u = 0; u < adj_.rows(); ++u)
    for (Eigen::Index v = 0; v < adj_.cols(); ++v)
      if (adj_(u, v)) out.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v)});
  return out;
}

Cpdag::Cpdag(std::vector<std::string> nodes, std::span<const NamedEdge> directed,
             std::span<const NamedEdge> undirected)
    : nodes_(std::move(nodes)) {
  const auto n = nodes_.size();
  dir_ = empty_adjacency(n);
  und_ = empty_adjacency(n);
  for (const auto& [u, v] : directed) add_directed(dir_, nodes_.index_of(u), nodes_.index_of(v), nodes_);
  for (const auto& [u, v] : undirected) {
    const auto a = nodes_.index_of(u), b = nodes_.index_of(v);
    if (a == b) throw DataError("self-loop on " + u);
    if (und_(a, b)) throw DataError("duplicate edge " + u + " -- " + v);
    und_(a, b) = und_(b, a) = 1;
  }
  *this = Cpdag(nodes_, dir_, und_);
}

Cpdag::Cpdag(NodeSet nodes, Adjacency directed, Adjacency undirected)
    : nodes_(std::move(nodes)), dir_(std::move(directed)), und_(std::move(undirected)) {
  const auto n = static_cast<Eigen::Index>(nodes_.size());
  if (dir_.rows() != n || dir_.cols() != n || und_.rows() != n || und_.cols() != n)
    throw DataError("adjacency size does not match node count");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (dir_(i, i) || und_(i, i)) throw DataError("self-loop on " + nodes_[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (und_(i, j) != und_(j, i)) throw DataError("undirected adjacency not symmetric");
      if (und_(i, j) && (dir_(i, j) || dir_(j, i)))
        throw DataError("edge " + nodes_[static_cast<std::size_t>(i)] + " -- " +
                        nodes_[static_cast<std::size_t>(j)] + " is both directed and undirected");
      if (dir_(i, j) && dir_(j, i)) throw DataError("edge oriented both ways");
    }
  }
  if (has_directed_cycle(dir_)) throw DataError("directed part of CPDAG has a cycle");
}

Cpdag Cpdag::from_dag(const CausalDag& dag) {
  return Cpdag(dag.nodes(), dag.adjacency(), empty_adjacency(dag.size()));
}

std::vector<std::size_t> Cpdag::directed_parents(std::size_t v) const { return nonzero_in_column(dir_, v); }

std::vector<Edge> Cpdag::directed_edges() const {
  std::vector<Edge> out;
  for (Eigen::Index u = 0; u < dir_.rows(); ++u)
    for (Eigen::Index v = 0; v < dir_.cols(); ++v)
      if (dir_(u, v)) out.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v)});
  return out;
}

std::vector<Edge> Cpdag::undirected_edges() const {
  std::vector<Edge> out;
  for (Eigen::Index u = 0; u < und_.rows(); ++u)
    for (Eigen::Index v = u + 1; v < und_.cols(); ++v)
      if (und_(u, v)) out.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v)});
  return out;
}

std::size_t Cpdag::directed_count() const { return static_cast<std::size_t>((dir_.array() != 0).count()); }
std::size_t Cpdag::undirected_count() const { return static_cast<std::size_t>((und_.array() != 0).count()) / 2; }

CausalDag Cpdag::to_dag() const {
  if (undirected_count() != 0) throw DataError("CPDAG still has undirected edges");
  const auto e = directed_edges();
  return CausalDag(nodes_, e);
}

std::vector<std::string> topological_order(const CausalDag& g) {
  std::vector<std::string> out;
  for (auto i : topological_indices(g.adjacency())) out.push_back(g.nodes()[i]);
  return out;
}

std::vector<std::string> reverse_topological_order(const CausalDag& g) {
  auto out = topological_order(g);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<VStructure> v_structures(const CausalDag& g) {
  std::vector<VStructure> out;
  for (std::size_t c = 0; c < g.size(); ++c) {
    const auto pa = g.parents(c);
    for (std::size_t i = 0; i < pa.size(); ++i)
      for (std::size_t j = i + 1; j < pa.size(); ++j)
        if (!g.adjacent(pa[i], pa[j])) out.push_back({pa[i], c, pa[j]});
  }
  std::sort(out.begin(), out.end());
  return out;
}

Cpdag minimal_cpdag(const CausalDag& g) {
  const auto n = g.size();
  Adjacency dir = empty_adjacency(n);
  Adjacency und = empty_adjacency(n);
  for (const auto& v : v_structures(g)) {
    dir(v.a, v.collider) = 1;
    dir(v.b, v.collider) = 1;
  }
  for (const auto& e : g.edges())
    if (!dir(e.from, e.to)) und(e.from, e.to) = und(e.to, e.from) = 1;
  return Cpdag(g.nodes(), std::move(dir), std::move(und));
}

bool is_fully_directed(const Cpdag& g, std::size_t v) {
  if (v >= g.size()) throw DataError("unknown node index");
  const auto k = static_cast<Eigen::Index>(v);
  const bool any_directed = g.directed().row(k).any() || g.directed().col(k).any();
  return any_directed && !g.undirected().row(k).any();
}

bool is_fully_directed(const Cpdag& g, std::string_view v) { return is_fully_directed(g, g.index_of(v)); }

CausalDag mutilate(const CausalDag& g, std::size_t node) {
  std::vector<Edge> kept;
  for (const auto& e : g.edges())
    if (e.to != node) kept.push_back(e);
  return CausalDag(g.nodes(), kept);
}

}  // namespace causagen
