#include "causagen/metrics.hpp"

#include "causagen/error.hpp"
#include "causagen/parallel.hpp"

#include <cstdint>
#include <limits>
#include <unordered_map>

namespace causagen {

namespace {

void require_same_schema(const Table& a, const Table& b, const char* what) {
  if (!(a.schema() == b.schema())) throw DataError(std::string(what) + ": schema mismatch");
}

}  // namespace

double cmd(const Table& real, const Table& synth) {
  require_same_schema(real, synth, "cmd");
  return (mixed_correlation(real).values - mixed_correlation(synth).values).norm();
}

Eigen::MatrixXi discretize(const Table& t, const Table& reference, int bins) {
  require_same_schema(t, reference, "discretize");
  Eigen::MatrixXi codes(t.rows(), t.cols());
  for (Eigen::Index j = 0; j < t.cols(); ++j) {
    if (t.schema()[static_cast<std::size_t>(j)].is_categorical()) {
      codes.col(j) = t.col(j).cast<int>();
      continue;
    }
    const auto edges = quantile_edges(reference.col(j), bins);
    for (Eigen::Index i = 0; i < t.rows(); ++i) codes(i, j) = bin_of(edges, t.values()(i, j));
  }
  return codes;
}

double pair_tvd(const Eigen::MatrixXi& real_codes, const Eigen::MatrixXi& synth_codes, Eigen::Index i,
                Eigen::Index j) {
  auto key = [](int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
  };
  std::unordered_map<std::uint64_t, std::pair<std::int64_t, std::int64_t>> cells;
  for (Eigen::Index r = 0; r < real_codes.rows(); ++r) cells[key(real_codes(r, i), real_codes(r, j))].first += 1;
  for (Eigen::Index r = 0; r < synth_codes.rows(); ++r) cells[key(synth_codes(r, i), synth_codes(r, j))].second += 1;
  const std::int64_t nr = real_codes.rows();
  const std::int64_t ns = synth_codes.rows();
  // Integer numerator over nr * ns keeps the sum exact.
  std::int64_t numerator = 0;
  for (const auto& [_, c] : cells) numerator += std::abs(c.first * ns - c.second * nr);
  return static_cast<double>(numerator) / (2.0 * static_cast<double>(nr) * static_cast<double>(ns));
}

double kmtvd(const Table& real, const Table& synth, int bins) {
  require_same_schema(real, synth, "kmtvd");
  if (real.rows() == 0 || synth.rows() == 0) throw DataError("kmtvd: empty table");
  const auto rc = discretize(real, real, bins);
  const auto sc = discretize(synth, real, bins);
  const auto d = real.cols();
  if (d == 1) return pair_tvd(rc, sc, 0, 0);
  double total = 0.0;
  int pairs = 0;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) {
      total += pair_tvd(rc, sc, i, j);
      ++pairs;
    }
  return std::clamp(total / pairs, 0.0, 1.0);
}

GowerScale gower_scale(const Table& real, const Table& synth) {
  require_same_schema(real, synth, "gower");
  GowerScale s;
  s.range = Eigen::VectorXd::Zero(real.cols());
  for (Eigen::Index j = 0; j < real.cols(); ++j) {
    const bool cat = real.schema()[static_cast<std::size_t>(j)].is_categorical();
    s.categorical.push_back(cat);
    if (cat) continue;
    const double lo = std::min(real.col(j).minCoeff(), synth.col(j).minCoeff());
    const double hi = std::max(real.col(j).maxCoeff(), synth.col(j).maxCoeff());
    s.range(j) = hi - lo;
  }
  return s;
}

double gower(std::span<const double> u, std::span<const double> v, const GowerScale& scale) {
  const auto d = scale.categorical.size();
  double sum = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    if (scale.categorical[j]) {
      sum += u[j] != v[j] ? 1.0 : 0.0;
    } else {
      const double r = scale.range(static_cast<Eigen::Index>(j));
      sum += r > 0 ? std::abs(u[j] - v[j]) / r : 0.0;
    }
  }
  return sum / static_cast<double>(d);
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Nearest distance from row i of `from` into `to`, skipping row i itself when
// the two sets are the same.
double nearest(const RowMatrix& from, Eigen::Index i, const RowMatrix& to, bool same_set, const GowerScale& scale) {
  const auto d = static_cast<std::size_t>(from.cols());
  const std::span<const double> u(from.row(i).data(), d);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < to.rows(); ++k) {
    if (same_set && k == i) continue;
    best = std::min(best, gower(u, std::span<const double>(to.row(k).data(), d), scale));
  }
  return best;
}

}  // namespace

double nnaa(const Table& real, const Table& synth, unsigned threads) {
  require_same_schema(real, synth, "nnaa");
  if (real.rows() != synth.rows()) throw DataError("nnaa: real and synthetic sizes differ");
  if (real.rows() < 2) throw DataError("nnaa: need at least two rows");
  const auto scale = gower_scale(real, synth);
  const RowMatrix t = real.values();
  const RowMatrix s = synth.values();
  const auto n = static_cast<std::size_t>(t.rows());
  std::vector<char> real_hit(n), synth_hit(n);
  parallel_for(n, threads, [&](std::size_t r) {
    const auto i = static_cast<Eigen::Index>(r);
    real_hit[r] = nearest(t, i, s, false, scale) > nearest(t, i, t, true, scale);
    synth_hit[r] = nearest(s, i, t, false, scale) > nearest(s, i, s, true, scale);
  });
  const double a = static_cast<double>(std::count(real_hit.begin(), real_hit.end(), 1));
  const double b = static_cast<double>(std::count(synth_hit.begin(), synth_hit.end(), 1));
  return 0.5 * (a / static_cast<double>(n) + b / static_cast<double>(n));
}

std::vector<SpuriousEntry> spurious_report(const Table& t,
                                           const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<SpuriousEntry> out;
  for (const auto& [a, b] : pairs) {
    const auto ia = t.schema().index_of(a), ib = t.schema().index_of(b);
    if (t.schema()[ia].is_categorical() || t.schema()[ib].is_categorical())
      throw DataError("spurious_report: pair " + a + ":" + b + " is not numeric");
    out.push_back({a, b, pearson(t.col(static_cast<Eigen::Index>(ia)), t.col(static_cast<Eigen::Index>(ib)))});
  }
  return out;
}

double ate_from_table(const Table& t, std::string_view treatment, std::string_view outcome, double x0, double x1,
                      ArmAssignment arms) {
  const auto tx = t.col(treatment);
  const auto y = t.col(outcome);
  double sum[2] = {0, 0}, count[2] = {0, 0};
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    int arm = -1;
    const double v = tx(i);
    if (arms == ArmAssignment::exact) {
      if (v == x0) arm = 0;
      else if (v == x1) arm = 1;
    } else {
      arm = std::abs(v - x0) <= std::abs(v - x1) ? 0 : 1;
    }
    if (arm < 0) continue;
    sum[arm] += y(i);
    count[arm] += 1;
  }
  if (count[0] == 0 || count[1] == 0) throw DataError("ate_from_table: an intervention arm is empty");
  return sum[1] / count[1] - sum[0] / count[0];
}

MetricReport evaluate(const Table& real, const Table& synth,
                      const std::vector<std::pair<std::string, std::string>>& spurious_pairs, unsigned threads) {
  MetricReport r;
  r.cmd = cmd(real, synth);
  r.kmtvd = kmtvd(real, synth);
  r.nnaa = nnaa(real, synth, threads);
  r.spurious = spurious_report(synth, spurious_pairs);
  return r;
}

}  // namespace causagen
