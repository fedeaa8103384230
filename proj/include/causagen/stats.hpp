#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace causagen {

// Two-sided Wilcoxon signed-rank p-value with Pratt's zero handling: zeros
// take part in ranking, then their ranks are dropped from both sums. Exact
// when there are at most 25 non-zero differences and no ties among their
// magnitudes; otherwise the normal approximation with tie-corrected variance
// and continuity correction. All-zero input gives p = 1.
double wilcoxon_pratt(std::span<const double> diffs);

inline constexpr int kWilcoxonExactLimit = 25;

// Holm step-down adjustment, results in input order.
std::vector<double> holm(std::span<const double> p_values);

// Median of the Walsh averages (d_i + d_j) / 2, i <= j.
double hodges_lehmann(std::span<const double> diffs);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

// Confidence interval for the Hodges-Lehmann estimate: order statistics of
// the Walsh averages from the exact signed-rank distribution when n <= 25,
// percentile bootstrap of the estimate otherwise.
Interval hodges_lehmann_ci(std::span<const double> diffs, double alpha = 0.05,
                           std::size_t resamples = 10000, std::uint64_t seed = 0);

struct ComparisonResult {
  double hl_estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_raw = 1.0;
  double p_adjusted = 1.0;
  bool significant = false;  // p_adjusted < 0.05
  std::size_t n_pairs = 0;
};

// Everything except the family-wise adjustment, which needs the whole family.
ComparisonResult compare_paired(std::span<const double> diffs, std::uint64_t seed = 0);

// Max minus min of the per-ordering values of one iteration.
double sensitivity_range(std::span<const double> values);

double median(std::vector<double> values);

// Percentile bootstrap CI of the median of `ranges`.
Interval median_range_ci(std::span<const double> ranges, std::size_t resamples = 1000,
                         double alpha = 0.05, std::uint64_t seed = 0);

// Linear-interpolation quantile of sorted data, q in [0, 1].
double sorted_quantile(std::span<const double> sorted, double q);

}  // namespace causagen
