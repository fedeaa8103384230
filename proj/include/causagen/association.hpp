#pragma once

#include "causagen/table.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace causagen {

// Pearson correlation; empty when either column is constant.
template <typename DerivedX, typename DerivedY>
std::optional<typename DerivedX::Scalar> pearson(const Eigen::MatrixBase<DerivedX>& x,
                                                 const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  const auto xc = (x.array() - x.mean()).matrix().eval();
  const auto yc = (y.array() - y.mean()).matrix().eval();
  const Scalar sxx = xc.squaredNorm();
  const Scalar syy = yc.squaredNorm();
  if (!(sxx > 0) || !(syy > 0)) return std::nullopt;
  const Scalar r = xc.dot(yc) / std::sqrt(sxx * syy);
  return std::clamp(r, Scalar(-1), Scalar(1));
}

// 1-based ranks, ties get their average rank.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> average_ranks(
    const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return x(a) < x(b); });
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> ranks(n);
  for (Eigen::Index i = 0; i < n;) {
    Eigen::Index j = i + 1;
    while (j < n && x(idx[static_cast<std::size_t>(j)]) == x(idx[static_cast<std::size_t>(i)])) ++j;
    const Scalar avg = Scalar(i + j + 1) / Scalar(2);
    for (Eigen::Index k = i; k < j; ++k) ranks(idx[static_cast<std::size_t>(k)]) = avg;
    i = j;
  }
  return ranks;
}

template <typename DerivedX, typename DerivedY>
std::optional<typename DerivedX::Scalar> spearman(const Eigen::MatrixBase<DerivedX>& x,
                                                  const Eigen::MatrixBase<DerivedY>& y) {
  return pearson(average_ranks(x), average_ranks(y));
}

// Bias-uncorrected Cramer's V over the observed levels of two code columns.
std::optional<double> cramers_v(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Correlation ratio eta = sqrt(SS_between / SS_total), grouping `values` by
// the category codes in `groups`.
std::optional<double> correlation_ratio(const Eigen::VectorXd& groups,
                                        const Eigen::VectorXd& values);

enum class AssociationMethod { cramers_v, eta, spearman };

struct MixedCorrelationMatrix {
  Eigen::MatrixXd values;  // symmetric, unit diagonal
  Eigen::Matrix<AssociationMethod, Eigen::Dynamic, Eigen::Dynamic> methods;
  // Pairs whose association was undefined (a constant column) and set to 0.
  std::vector<std::pair<std::size_t, std::size_t>> degenerate;
};

MixedCorrelationMatrix mixed_correlation(const Table& t);

}  // namespace causagen
