#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <vector>

namespace causagen {

// Bin edges for one numeric column: the j/bins quantiles (linear
// interpolation between order statistics) for j = 1..bins-1, duplicates
// removed. Tied quantiles therefore collapse bins.
std::vector<double> quantile_edges(const Eigen::VectorXd& x, int bins);

// A value v falls into bin #{edges e : e < v}, i.e. bins are right-closed.
inline int bin_of(const std::vector<double>& edges, double v) {
  return static_cast<int>(std::lower_bound(edges.begin(), edges.end(), v) - edges.begin());
}

Eigen::VectorXi quantile_codes(const Eigen::VectorXd& x, int bins);

}  // namespace causagen
