#include "causagen/pc.hpp"

#include "causagen/error.hpp"

#include <map>

namespace causagen {

namespace {

struct WorkGraph {
  Adjacency dir;
  Adjacency und;

  std::size_t size() const { return static_cast<std::size_t>(dir.rows()); }
  bool directed(std::size_t a, std::size_t b) const { return dir(a, b) != 0; }
  bool undirected(std::size_t a, std::size_t b) const { return und(a, b) != 0; }
  bool adjacent(std::size_t a, std::size_t b) const { return directed(a, b) || directed(b, a) || undirected(a, b); }

  bool reaches(std::size_t from, std::size_t to) const {
    std::vector<bool> seen(size(), false);
    std::vector<std::size_t> stack{from};
    seen[from] = true;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      if (v == to) return true;
      for (std::size_t w = 0; w < size(); ++w)
        if (directed(v, w) && !seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
    }
    return false;
  }

  // Turns the undirected edge a--b into a->b. Returns false (and changes
  // nothing) if that would close a directed cycle and `strict` is off.
  bool orient(std::size_t a, std::size_t b, bool strict) {
    if (reaches(b, a)) {
      if (strict) throw DataError("orientation would create a directed cycle");
      return false;
    }
    und(a, b) = und(b, a) = 0;
    dir(a, b) = 1;
    return true;
  }
};

bool meek_pass(WorkGraph& g, bool strict) {
  const auto n = g.size();
  bool changed = false;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b || !g.undirected(a, b)) continue;
      bool orient = false;
      // R1: c -> a -- b with c, b non-adjacent.
      for (std::size_t c = 0; c < n && !orient; ++c)
        orient = g.directed(c, a) && !g.adjacent(c, b) && c != b;
      // R2: a -> c -> b.
      for (std::size_t c = 0; c < n && !orient; ++c) orient = g.directed(a, c) && g.directed(c, b);
      // R3: a -- c -> b and a -- d -> b with c, d non-adjacent.
      for (std::size_t c = 0; c < n && !orient; ++c) {
        if (!(g.undirected(a, c) && g.directed(c, b))) continue;
        for (std::size_t d = c + 1; d < n && !orient; ++d)
          orient = g.undirected(a, d) && g.directed(d, b) && !g.adjacent(c, d);
      }
      // R4: a -- c -> d -> b with a adjacent to d and c, b non-adjacent.
      for (std::size_t c = 0; c < n && !orient; ++c) {
        if (c == b || !g.undirected(a, c) || g.adjacent(c, b)) continue;
        for (std::size_t d = 0; d < n && !orient; ++d)
          orient = d != a && g.directed(c, d) && g.directed(d, b) && g.adjacent(a, d);
      }
      if (orient && g.orient(a, b, strict)) changed = true;
    }
  }
  return changed;
}

void close_meek(WorkGraph& g, bool strict) {
  while (meek_pass(g, strict)) {
  }
}

// Lexicographic k-subsets of `pool`.
template <typename F>
bool for_each_subset(const std::vector<std::size_t>& pool, std::size_t k, F&& f) {
  if (k > pool.size()) return false;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  std::vector<std::size_t> subset(k);
  for (;;) {
    for (std::size_t i = 0; i < k; ++i) subset[i] = pool[idx[i]];
    if (f(subset)) return true;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == pool.size() - k + i - 1) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

Cpdag meek_closure(const Cpdag& g) {
  WorkGraph w{g.directed(), g.undirected()};
  if (has_directed_cycle(w.dir)) throw DataError("meek_closure: input has a directed cycle");
  close_meek(w, true);
  return Cpdag(g.nodes(), std::move(w.dir), std::move(w.und));
}

Cpdag pc_stable(const NodeSet& nodes, const CiTest& test, const PcOptions& options) {
  const auto n = nodes.size();
  const auto size = static_cast<Eigen::Index>(n);
  Adjacency skel = Adjacency::Ones(size, size);
  for (Eigen::Index i = 0; i < size; ++i) skel(i, i) = 0;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> sepset;

  auto run_test = [&](std::size_t x, std::size_t y, const std::vector<std::size_t>& z) {
    try {
      return test(x, y, z).independent;
    } catch (const DataError&) {
      return true;  // undefined statistic: the pair carries no testable dependence
    }
  };

  for (std::size_t level = 0; static_cast<int>(level) <= options.max_condition_size; ++level) {
    // Neighbourhoods frozen for the whole level.
    std::vector<std::vector<std::size_t>> frozen(n);
    bool any_testable = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j)
        if (skel(i, j)) frozen[i].push_back(j);
      if (frozen[i].size() > level) any_testable = true;
    }
    if (!any_testable) break;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!skel(i, j)) continue;
        for (const auto& [x, y] : {std::pair{i, j}, std::pair{j, i}}) {
          std::vector<std::size_t> pool;
          for (auto k : frozen[x])
            if (k != y) pool.push_back(k);
          const bool removed = for_each_subset(pool, level, [&](const std::vector<std::size_t>& z) {
            if (!run_test(i, j, z)) return false;
            skel(i, j) = skel(j, i) = 0;
            sepset[{i, j}] = z;
            return true;
          });
          if (removed) break;
        }
      }
    }
  }

  WorkGraph g{Adjacency::Zero(size, size), skel};
  // Colliders from separating sets, scanned in column order.
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t a = 0; a < n; ++a) {
      if (a == c || !skel(a, c)) continue;
      for (std::size_t b = a + 1; b < n; ++b) {
        if (b == c || !skel(b, c) || skel(a, b)) continue;
        const auto it = sepset.find({a, b});
        const bool separated_by_c =
            it != sepset.end() && std::find(it->second.begin(), it->second.end(), c) != it->second.end();
        if (separated_by_c) continue;
        for (auto p : {a, b})
          if (g.undirected(p, c)) g.orient(p, c, false);
      }
    }
  }
  close_meek(g, false);
  return Cpdag(nodes, std::move(g.dir), std::move(g.und));
}

Cpdag pc_stable(const Table& data, const PcOptions& options) {
  if (data.cols() < 2) throw DataError("pc_stable needs at least two columns");
  const auto test = make_default_ci_test(data, options.alpha);
  return pc_stable(NodeSet(data.schema().names()), test, options);
}

}  // namespace causagen
