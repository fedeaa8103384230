#include "causagen/stats.hpp"

#include "causagen/association.hpp"
#include "causagen/error.hpp"
#include "causagen/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace causagen {

namespace {

// Number of sign assignments with positive-rank sum t, for integer ranks.
std::vector<double> signed_rank_counts(std::span<const long> ranks) {
  const long total = std::accumulate(ranks.begin(), ranks.end(), 0L);
  std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
  counts[0] = 1.0;
  long reach = 0;
  for (long r : ranks) {
    reach += r;
    for (long t = reach; t >= r; --t) counts[static_cast<std::size_t>(t)] += counts[static_cast<std::size_t>(t - r)];
  }
  return counts;
}

}  // namespace

double wilcoxon_pratt(std::span<const double> diffs) {
  if (diffs.empty()) throw DataError("wilcoxon_pratt: no differences");
  const Eigen::Map<const Eigen::VectorXd> d(diffs.data(), static_cast<Eigen::Index>(diffs.size()));
  const Eigen::VectorXd ranks = average_ranks(d.cwiseAbs());

  std::vector<double> nonzero_ranks;
  std::vector<double> nonzero_abs;
  double t_plus = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) == 0.0) continue;
    nonzero_ranks.push_back(ranks(i));
    nonzero_abs.push_back(std::abs(d(i)));
    if (d(i) > 0) t_plus += ranks(i);
  }
  if (nonzero_ranks.empty()) return 1.0;

  std::sort(nonzero_abs.begin(), nonzero_abs.end());
  const bool ties = std::adjacent_find(nonzero_abs.begin(), nonzero_abs.end()) != nonzero_abs.end();
  const auto m = nonzero_ranks.size();

  if (!ties && m <= static_cast<std::size_t>(kWilcoxonExactLimit)) {
    // Without ties the non-zero ranks are the integers zeros+1 .. n.
    std::vector<long> int_ranks;
    for (double r : nonzero_ranks) int_ranks.push_back(std::lround(r));
    const auto counts = signed_rank_counts(int_ranks);
    const double all = std::ldexp(1.0, static_cast<int>(m));
    const auto t = static_cast<std::size_t>(std::lround(t_plus));
    double lower = 0.0, upper = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (k <= t) lower += counts[k];
      if (k >= t) upper += counts[k];
    }
    return std::min(1.0, 2.0 * std::min(lower, upper) / all);
  }

  double sum = 0.0, sum_sq = 0.0;
  for (double r : nonzero_ranks) {
    sum += r;
    sum_sq += r * r;
  }
  const double mean = sum / 2.0;
  const double sd = std::sqrt(sum_sq / 4.0);
  if (!(sd > 0)) return 1.0;
  const double z = std::max(0.0, std::abs(t_plus - mean) - 0.5) / sd;
  return std::min(1.0, std::erfc(z / std::numbers::sqrt2));
}

std::vector<double> holm(std::span<const double> p_values) {
  const auto m = p_values.size();
  for (double p : p_values)
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("holm: p-value outside [0, 1]");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  std::vector<double> adjusted(m);
  double running = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double scaled = std::min(1.0, static_cast<double>(m - k) * p_values[order[k]]);
    running = std::max(running, scaled);
    adjusted[order[k]] = running;
  }
  return adjusted;
}

namespace {

std::vector<double> walsh_averages(std::span<const double> d) {
  std::vector<double> w;
  w.reserve(d.size() * (d.size() + 1) / 2);
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i; j < d.size(); ++j) w.push_back((d[i] + d[j]) / 2.0);
  return w;
}

double median_in_place(std::vector<double>& v) {
  if (v.empty()) throw DataError("median of an empty sample");
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lo + hi) / 2.0;
}

}  // namespace

double median(std::vector<double> values) { return median_in_place(values); }

double hodges_lehmann(std::span<const double> diffs) {
  if (diffs.empty()) throw DataError("hodges_lehmann: no differences");
  auto w = walsh_averages(diffs);
  return median_in_place(w);
}

double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DataError("quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Interval hodges_lehmann_ci(std::span<const double> diffs, double alpha, std::size_t resamples, std::uint64_t seed) {
  if (diffs.empty()) throw DataError("hodges_lehmann_ci: no differences");
  const auto n = diffs.size();
  const double estimate = hodges_lehmann(diffs);
  Interval ci;
  if (n <= static_cast<std::size_t>(kWilcoxonExactLimit)) {
    std::vector<long> ranks(n);
    std::iota(ranks.begin(), ranks.end(), 1L);
    const auto counts = signed_rank_counts(ranks);
    const double all = std::ldexp(1.0, static_cast<int>(n));
    // Largest c with P(T <= c - 1) <= alpha / 2.
    std::size_t c = 1;
    double cdf = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      cdf += counts[k] / all;
      if (cdf > alpha / 2.0) break;
      c = k + 1;
    }
    auto w = walsh_averages(diffs);
    std::sort(w.begin(), w.end());
    c = std::min(c, (w.size() + 1) / 2);
    ci = {w[c - 1], w[w.size() - c]};
  } else {
    std::vector<double> estimates(resamples);
    std::vector<double> sample(n);
    for (std::size_t b = 0; b < resamples; ++b) {
      Rng rng(derive_seed(seed, b, "hl-bootstrap"));
      for (auto& x : sample) x = diffs[rng.index(n)];
      estimates[b] = hodges_lehmann(sample);
    }
    std::sort(estimates.begin(), estimates.end());
    ci = {sorted_quantile(estimates, alpha / 2.0), sorted_quantile(estimates, 1.0 - alpha / 2.0)};
  }
  ci.low = std::min(ci.low, estimate);
  ci.high = std::max(ci.high, estimate);
  return ci;
}

ComparisonResult compare_paired(std::span<const double> diffs, std::uint64_t seed) {
  ComparisonResult r;
  r.n_pairs = diffs.size();
  if (diffs.empty()) return r;
  r.hl_estimate = hodges_lehmann(diffs);
  const auto ci = hodges_lehmann_ci(diffs, 0.05, 10000, seed);
  r.ci_low = ci.low;
  r.ci_high = ci.high;
  r.p_raw = wilcoxon_pratt(diffs);
  r.p_adjusted = r.p_raw;
  r.significant = r.p_adjusted < 0.05;
  return r;
}

double sensitivity_range(std::span<const double> values) {
  if (values.empty()) throw DataError("sensitivity_range: no values");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

Interval median_range_ci(std::span<const double> ranges, std::size_t resamples, double alpha, std::uint64_t seed) {
  if (ranges.empty()) throw DataError("median_range_ci: no ranges");
  const auto n = ranges.size();
  std::vector<double> medians(resamples);
  std::vector<double> sample(n);
  for (std::size_t b = 0; b < resamples; ++b) {
    Rng rng(derive_seed(seed, b, "median-bootstrap"));
    for (auto& x : sample) x = ranges[rng.index(n)];
    medians[b] = median_in_place(sample);
  }
  std::sort(medians.begin(), medians.end());
  return {sorted_quantile(medians, alpha / 2.0), sorted_quantile(medians, 1.0 - alpha / 2.0)};
}

}  // namespace causagen
