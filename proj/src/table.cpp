#include "causagen/table.hpp"

#include "causagen/error.hpp"
#include "causagen/random.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace causagen {

std::optional<std::size_t> ColumnSchema::category_index(std::string_view label) const {
  for (std::size_t i = 0; i < categories.size(); ++i)
    if (categories[i] == label) return i;
  return std::nullopt;
}

Schema::Schema(std::vector<ColumnSchema> columns) : columns_(std::move(columns)) {
  std::unordered_set<std::string> seen;
  for (const auto& c : columns_) {
    if (c.name.empty()) throw DataError("empty column name");
    if (!seen.insert(c.name).second) throw DataError("duplicate column name: " + c.name);
    if (c.kind == ColumnKind::numeric && !c.categories.empty())
      throw DataError("numeric column '" + c.name + "' has categories");
    if (c.kind == ColumnKind::categorical) {
      if (c.categories.empty())
        throw DataError("categorical column '" + c.name + "' has no categories");
      std::unordered_set<std::string> labels(c.categories.begin(), c.categories.end());
      if (labels.size() != c.categories.size())
        throw DataError("duplicate category label in column '" + c.name + "'");
    }
  }
}

Schema Schema::numeric(const std::vector<std::string>& names) {
  std::vector<ColumnSchema> cols;
  cols.reserve(names.size());
  for (const auto& n : names) cols.push_back({n, ColumnKind::numeric, {}});
  return Schema(std::move(cols));
}

std::vector<std::string> Schema::names() const {
  std::vector<std::string> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c.name);
  return out;
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].name == name) return i;
  return std::nullopt;
}

std::size_t Schema::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw DataError("unknown column: " + std::string(name));
}

Table::Table(Schema schema, Eigen::MatrixXd values)
    : schema_(std::move(schema)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.cols()) != schema_.size())
    throw DataError("table has " + std::to_string(values_.cols()) + " columns, schema has " +
                    std::to_string(schema_.size()));
  for (Eigen::Index j = 0; j < values_.cols(); ++j) {
    const auto& c = schema_[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
      const double v = values_(i, j);
      if (!std::isfinite(v)) throw DataError("non-finite cell in column '" + c.name + "'");
      if (c.is_categorical()) {
        if (v < 0 || v != std::floor(v) || v >= static_cast<double>(c.categories.size()))
          throw DataError("category index out of range in column '" + c.name + "'");
      }
    }
  }
}

Table Table::select_rows(std::span<const Eigen::Index> rows) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), values_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = values_.row(rows[i]);
  return Table(schema_, std::move(out));
}

std::uint64_t Table::hash() const {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(values_.rows()) * kGolden +
                          static_cast<std::uint64_t>(values_.cols()));
  for (const auto& c : schema_.columns()) h = mix64(h ^ tag_hash(c.name));
  const double* p = values_.data();
  for (Eigen::Index k = 0; k < values_.size(); ++k)
    h = mix64(h ^ std::bit_cast<std::uint64_t>(p[k]));
  return h;
}

Table vstack(const Table& top, const Table& bottom) {
  if (!(top.schema() == bottom.schema())) throw DataError("vstack: schema mismatch");
  Eigen::MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out << top.values(), bottom.values();
  return Table(top.schema(), std::move(out));
}

std::vector<Eigen::Index> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.index(i)]);
  return idx;
}

Split fixed_split(const Table& pool, const SplitSpec& spec) {
  const auto n = static_cast<std::size_t>(pool.rows());
  if (spec.test_size + spec.train_size > n)
    throw DataError("fixed_split: need " + std::to_string(spec.test_size + spec.train_size) +
                    " rows, pool has " + std::to_string(n));
  const auto perm = shuffled_indices(n, derive_seed(spec.master_seed, 0, "test-split"));
  std::vector<Eigen::Index> test(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(spec.test_size));
  std::vector<Eigen::Index> rest(perm.begin() + static_cast<std::ptrdiff_t>(spec.test_size), perm.end());
  std::sort(rest.begin(), rest.end());
  const auto pick = shuffled_indices(rest.size(), derive_seed(spec.master_seed, spec.iteration, "train-split"));
  std::vector<Eigen::Index> train(spec.train_size);
  for (std::size_t i = 0; i < spec.train_size; ++i) train[i] = rest[static_cast<std::size_t>(pick[i])];
  return {pool.select_rows(train), pool.select_rows(test)};
}

Table reorder_columns(const Table& t, std::span<const std::string> order) {
  const auto& schema = t.schema();
  if (order.size() != schema.size()) throw DataError("reorder_columns: not a permutation of the columns");
  std::vector<ColumnSchema> cols;
  std::vector<bool> used(schema.size(), false);
  Eigen::MatrixXd values(t.rows(), t.cols());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto src = schema.find(order[k]);
    if (!src || used[*src]) throw DataError("reorder_columns: not a permutation of the columns");
    used[*src] = true;
    cols.push_back(schema[*src]);
    values.col(static_cast<Eigen::Index>(k)) = t.values().col(static_cast<Eigen::Index>(*src));
  }
  return Table(Schema(std::move(cols)), std::move(values));
}

}  // namespace causagen
