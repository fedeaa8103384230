#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace causagen {

enum class ColumnKind { numeric, categorical };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<std::string> categories;  // categorical only, closed set

  bool is_categorical() const { return kind == ColumnKind::categorical; }
  std::optional<std::size_t> category_index(std::string_view label) const;

  friend bool operator==(const ColumnSchema&, const ColumnSchema&) = default;
};

// Ordered column list with unique names.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<ColumnSchema> columns);

  static Schema numeric(const std::vector<std::string>& names);

  std::size_t size() const { return columns_.size(); }
  const ColumnSchema& operator[](std::size_t i) const { return columns_[i]; }
  const std::vector<ColumnSchema>& columns() const { return columns_; }
  std::vector<std::string> names() const;

  std::optional<std::size_t> find(std::string_view name) const;
  // Throws DataError for unknown names.
  std::size_t index_of(std::string_view name) const;

  friend bool operator==(const Schema&, const Schema&) = default;

 private:
  std::vector<ColumnSchema> columns_;
};

// Rectangular, fully observed mixed-type table. Cells are stored as doubles
// in an n x d matrix; categorical cells hold the category index.
class Table {
 public:
  Table() = default;
  Table(Schema schema, Eigen::MatrixXd values);

  const Schema& schema() const { return schema_; }
  const Eigen::MatrixXd& values() const { return values_; }

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }

  auto col(Eigen::Index j) const { return values_.col(j); }
  auto col(std::string_view name) const {
    return values_.col(static_cast<Eigen::Index>(schema_.index_of(name)));
  }

  Table select_rows(std::span<const Eigen::Index> rows) const;

  // Stable content hash; used to assert that paired runs saw identical data.
  std::uint64_t hash() const;

  friend bool operator==(const Table& a, const Table& b) {
    return a.schema_ == b.schema_ && a.values_.rows() == b.values_.rows() &&
           a.values_.cols() == b.values_.cols() && a.values_ == b.values_;
  }

 private:
  Schema schema_;
  Eigen::MatrixXd values_;
};

Table vstack(const Table& top, const Table& bottom);

struct SplitSpec {
  std::size_t test_size = 2000;
  std::size_t train_size = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t iteration = 0;
};

struct Split {
  Table train;
  Table test;
};

// The test rows depend on master_seed only, so they are identical for every
// iteration. Train rows are drawn from the remainder with a per-iteration seed.
Split fixed_split(const Table& pool, const SplitSpec& spec);

// Permutes columns by name.
Table reorder_columns(const Table& t, std::span<const std::string> order);

// Deterministic Fisher-Yates shuffle of 0..n-1.
std::vector<Eigen::Index> shuffled_indices(std::size_t n, std::uint64_t seed);

}  // namespace causagen
