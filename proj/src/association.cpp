#include "causagen/association.hpp"

#include "causagen/error.hpp"

#include <map>

namespace causagen {

namespace {

// Dense 0..k-1 relabelling of the distinct values of a code column.
std::vector<std::size_t> relabel(const Eigen::VectorXd& codes, std::size_t& levels) {
  std::map<double, std::size_t> ids;
  for (Eigen::Index i = 0; i < codes.size(); ++i) ids.emplace(codes(i), 0);
  std::size_t next = 0;
  for (auto& [_, id] : ids) id = next++;
  levels = next;
  std::vector<std::size_t> out(static_cast<std::size_t>(codes.size()));
  for (Eigen::Index i = 0; i < codes.size(); ++i) out[static_cast<std::size_t>(i)] = ids[codes(i)];
  return out;
}

}  // namespace

std::optional<double> cramers_v(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw DataError("cramers_v: length mismatch");
  std::size_t ra = 0, rb = 0;
  const auto la = relabel(a, ra);
  const auto lb = relabel(b, rb);
  if (std::min(ra, rb) < 2) return std::nullopt;
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ra), static_cast<Eigen::Index>(rb));
  for (std::size_t i = 0; i < la.size(); ++i) counts(static_cast<Eigen::Index>(la[i]), static_cast<Eigen::Index>(lb[i])) += 1;
  const double n = static_cast<double>(a.size());
  const Eigen::VectorXd rows = counts.rowwise().sum();
  const Eigen::RowVectorXd cols = counts.colwise().sum();
  const Eigen::MatrixXd expected = rows * cols / n;
  const double chi2 = ((counts - expected).array().square() / expected.array()).sum();
  const double v = std::sqrt(chi2 / (n * static_cast<double>(std::min(ra, rb) - 1)));
  return std::clamp(v, 0.0, 1.0);
}

std::optional<double> correlation_ratio(const Eigen::VectorXd& groups, const Eigen::VectorXd& values) {
  if (groups.size() != values.size()) throw DataError("correlation_ratio: length mismatch");
  const double mean = values.mean();
  const double total = (values.array() - mean).square().sum();
  if (!(total > 0)) return std::nullopt;
  std::map<double, std::pair<double, double>> sums;  // group -> (count, sum)
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    auto& s = sums[groups(i)];
    s.first += 1;
    s.second += values(i);
  }
  double between = 0.0;
  for (const auto& [_, s] : sums) {
    const double gm = s.second / s.first;
    between += s.first * (gm - mean) * (gm - mean);
  }
  return std::sqrt(std::clamp(between / total, 0.0, 1.0));
}

MixedCorrelationMatrix mixed_correlation(const Table& t) {
  if (t.rows() < 2) throw DataError("mixed_correlation needs at least two rows");
  const auto d = t.cols();
  MixedCorrelationMatrix m;
  m.values = Eigen::MatrixXd::Identity(d, d);
  m.methods.resize(d, d);
  const auto& schema = t.schema();
  for (Eigen::Index i = 0; i < d; ++i) {
    const bool ci = schema[static_cast<std::size_t>(i)].is_categorical();
    m.methods(i, i) = ci ? AssociationMethod::cramers_v : AssociationMethod::spearman;
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const bool cj = schema[static_cast<std::size_t>(j)].is_categorical();
      std::optional<double> v;
      AssociationMethod method;
      const Eigen::VectorXd a = t.col(i), b = t.col(j);
      if (ci && cj) {
        method = AssociationMethod::cramers_v;
        v = cramers_v(a, b);
      } else if (ci) {
        method = AssociationMethod::eta;
        v = correlation_ratio(a, b);
      } else if (cj) {
        method = AssociationMethod::eta;
        v = correlation_ratio(b, a);
      } else {
        method = AssociationMethod::spearman;
        v = spearman(a, b);
      }
      if (!v) m.degenerate.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      m.values(i, j) = m.values(j, i) = v.value_or(0.0);
      m.methods(i, j) = m.methods(j, i) = method;
    }
  }
  return m;
}

}  // namespace causagen
