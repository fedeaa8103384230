#include "causagen/scm.hpp"

#include "causagen/error.hpp"
#include "causagen/random.hpp"

#include <cmath>

namespace causagen {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

Scm::Scm(CausalDag dag, std::vector<Equation> equations)
    : dag_(std::move(dag)), equations_(std::move(equations)) {
  if (equations_.size() != dag_.size()) throw DataError("SCM needs exactly one equation per node");
  for (std::size_t v = 0; v < dag_.size(); ++v) {
    const auto& name = dag_.nodes()[v];
    const auto parents = dag_.parents(v);
    std::visit(
        overloaded{
            [&](const GaussianRoot& e) {
              if (!parents.empty()) throw DataError("root equation on non-root node " + name);
              if (!(e.std >= 0)) throw DataError("negative std on " + name);
            },
            [&](const LinearEquation& e) {
              if (e.coefficients.size() != parents.size())
                throw DataError("linear equation of " + name + " does not match its parents");
              if (!(e.noise_std >= 0)) throw DataError("negative noise_std on " + name);
            },
            [&](const CategoricalTable& e) {
              if (e.categories.empty()) throw DataError("categorical node " + name + " has no categories");
              std::size_t configs = 1;
              for (auto p : parents) {
                const auto* pt = std::get_if<CategoricalTable>(&equations_[p]);
                if (!pt) throw DataError("categorical node " + name + " has a non-categorical parent");
                configs *= pt->categories.size();
              }
              if (e.rows.size() != configs)
                throw DataError("CPT of " + name + " has " + std::to_string(e.rows.size()) +
                                " rows, expected " + std::to_string(configs));
              for (const auto& row : e.rows) {
                if (row.size() != e.categories.size()) throw DataError("CPT row width mismatch on " + name);
                double s = 0;
                for (double p : row) {
                  if (!(p >= 0)) throw DataError("negative probability on " + name);
                  s += p;
                }
                if (std::abs(s - 1.0) > 1e-12) throw DataError("CPT row of " + name + " does not sum to 1");
              }
            },
            [&](const Constant&) {
              if (!parents.empty()) throw DataError("constant equation on non-root node " + name);
            },
        },
        equations_[v]);
  }
}

Schema Scm::schema() const {
  std::vector<ColumnSchema> cols;
  for (std::size_t v = 0; v < dag_.size(); ++v) {
    ColumnSchema c{dag_.nodes()[v], ColumnKind::numeric, {}};
    if (const auto* t = std::get_if<CategoricalTable>(&equations_[v])) {
      c.kind = ColumnKind::categorical;
      c.categories = t->categories;
    }
    cols.push_back(std::move(c));
  }
  return Schema(std::move(cols));
}

Scm builtin_collider_scm(double noise_std) {
  if (!(noise_std > 0)) throw DataError("collider SCM noise std must be positive");
  const std::vector<NamedEdge> edges{{"X3", "X2"}, {"X2", "X1"}, {"X0", "X1"}};
  CausalDag dag({"X0", "X1", "X2", "X3"}, edges);
  // X1's parents in column order are (X0, X2).
  std::vector<Equation> eq{
      GaussianRoot{0.0, 1.0},
      LinearEquation{0.0, {5.0, 10.0}, noise_std},
      LinearEquation{0.0, {0.5}, noise_std},
      GaussianRoot{0.0, 1.0},
  };
  return Scm(std::move(dag), std::move(eq));
}

Table sample(const Scm& scm, std::size_t n, std::uint64_t seed) {
  const auto& dag = scm.dag();
  const auto d = dag.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (auto v : topological_indices(dag.adjacency())) {
    // One noise stream per node, keyed by the node's column index.
    Rng rng(derive_seed(seed, v, "scm-node"));
    const auto parents = dag.parents(v);
    auto out = x.col(static_cast<Eigen::Index>(v));
    std::visit(overloaded{
                   [&](const GaussianRoot& e) {
                     for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i)) = e.mean + e.std * rng.normal();
                   },
                   [&](const LinearEquation& e) {
                     out.setConstant(e.intercept);
                     for (std::size_t k = 0; k < parents.size(); ++k)
                       out += e.coefficients[k] * x.col(static_cast<Eigen::Index>(parents[k]));
                     if (e.noise_std > 0)
                       for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i)) += e.noise_std * rng.normal();
                   },
                   [&](const CategoricalTable& e) {
                     for (std::size_t i = 0; i < n; ++i) {
                       std::size_t config = 0;
                       for (auto p : parents) {
                         const auto& pt = std::get<CategoricalTable>(scm.equation(p));
                         config = config * pt.categories.size() +
                                  static_cast<std::size_t>(x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)));
                       }
                       const auto& row = e.rows[config];
                       const double u = rng.uniform();
                       double acc = 0.0;
                       std::size_t k = 0;
                       for (; k + 1 < row.size(); ++k) {
                         acc += row[k];
                         if (u < acc) break;
                       }
                       out(static_cast<Eigen::Index>(i)) = static_cast<double>(k);
                     }
                   },
                   [&](const Constant& e) { out.setConstant(e.value); },
               },
               scm.equation(v));
  }
  return Table(scm.schema(), std::move(x));
}

Scm intervene(const Scm& scm, const Intervention& iv) {
  const auto& dag = scm.dag();
  const auto node = dag.index_of(iv.node);
  auto equations = scm.equations();
  if (const auto* t = std::get_if<CategoricalTable>(&equations[node])) {
    if (iv.value < 0 || iv.value != std::floor(iv.value) || iv.value >= static_cast<double>(t->categories.size()))
      throw DataError("intervention value is not a category of " + iv.node);
    // A categorical node keeps its category set; the CPT collapses to a point mass.
    CategoricalTable point{t->categories, {std::vector<double>(t->categories.size(), 0.0)}};
    point.rows[0][static_cast<std::size_t>(iv.value)] = 1.0;
    equations[node] = std::move(point);
  } else {
    equations[node] = Constant{iv.value};
  }
  // Children of a categorical node index their CPT by its categories only, so
  // their tables are unaffected.
  return Scm(mutilate(dag, node), std::move(equations));
}

Table interventional_arms(const Scm& scm, std::string_view treatment, double x0, double x1,
                          std::size_t n_per_arm, std::uint64_t seed) {
  if (n_per_arm == 0) throw DataError("n_per_arm must be at least 1");
  const std::string t(treatment);
  const auto arm0 = sample(intervene(scm, {t, x0}), n_per_arm, derive_seed(seed, 0, "arm"));
  const auto arm1 = sample(intervene(scm, {t, x1}), n_per_arm, derive_seed(seed, 1, "arm"));
  return vstack(arm0, arm1);
}

double analytic_ate(const Scm& scm, std::string_view treatment, std::string_view outcome, double x0,
                    double x1) {
  const auto& dag = scm.dag();
  const auto t = dag.index_of(treatment);
  const auto y = dag.index_of(outcome);
  const auto n = dag.size();
  // Nodes that are both descendants of t and ancestors of y.
  std::vector<bool> from_t(n, false), to_y(n, false);
  from_t[t] = true;
  const auto topo = topological_indices(dag.adjacency());
  for (auto v : topo)
    if (from_t[v])
      for (auto c : dag.children(v)) from_t[c] = true;
  to_y[y] = true;
  for (auto it = topo.rbegin(); it != topo.rend(); ++it)
    for (auto c : dag.children(*it))
      if (to_y[c]) to_y[*it] = true;

  std::vector<double> effect(n, 0.0);
  effect[t] = 1.0;
  for (auto v : topo) {
    if (v == t || !from_t[v] || !to_y[v]) continue;
    const auto* lin = std::get_if<LinearEquation>(&scm.equation(v));
    if (!lin) throw DataError("analytic_ate: non-linear equation on " + dag.nodes()[v]);
    const auto parents = dag.parents(v);
    for (std::size_t k = 0; k < parents.size(); ++k) effect[v] += lin->coefficients[k] * effect[parents[k]];
  }
  if (t == y) return x1 - x0;
  return effect[y] * (x1 - x0);
}

}  // namespace causagen
