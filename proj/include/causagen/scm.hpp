#pragma once

#include "causagen/graph.hpp"
#include "causagen/table.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace causagen {

struct GaussianRoot {
  double mean = 0.0;
  double std = 1.0;
};

// value = intercept + sum_k coefficients[k] * parent_k + N(0, noise_std^2).
// Coefficients follow the node's parent order in the DAG.
struct LinearEquation {
  double intercept = 0.0;
  std::vector<double> coefficients;
  double noise_std = 0.0;
};

// Conditional probability table over categorical parents. Row r holds the
// distribution for the parent configuration whose mixed-radix index is r,
// with the last parent varying fastest.
struct CategoricalTable {
  std::vector<std::string> categories;
  std::vector<std::vector<double>> rows;
};

struct Constant {
  double value = 0.0;
};

using Equation = std::variant<GaussianRoot, LinearEquation, CategoricalTable, Constant>;

class Scm {
 public:
  Scm(CausalDag dag, std::vector<Equation> equations);

  const CausalDag& dag() const { return dag_; }
  const std::vector<Equation>& equations() const { return equations_; }
  const Equation& equation(std::size_t node) const { return equations_[node]; }
  Schema schema() const;

 private:
  CausalDag dag_;
  std::vector<Equation> equations_;
};

struct Intervention {
  std::string node;
  double value = 0.0;  // category index for categorical nodes
};

// X3 -> X2 -> X1 <- X0 with near-deterministic linear links.
Scm builtin_collider_scm(double noise_std = 1e-5);

Table sample(const Scm& scm, std::size_t n, std::uint64_t seed);

Scm intervene(const Scm& scm, const Intervention& iv);

// n_per_arm rows under do(treatment = x0) followed by n_per_arm rows under
// do(treatment = x1).
Table interventional_arms(const Scm& scm, std::string_view treatment, double x0,
                          double x1, std::size_t n_per_arm, std::uint64_t seed);

// Sum over directed treatment->outcome paths of the product of linear
// coefficients, times (x1 - x0). Throws DataError on a non-linear equation
// along such a path.
double analytic_ate(const Scm& scm, std::string_view treatment,
                    std::string_view outcome, double x0, double x1);

}  // namespace causagen
