#pragma once

#include "causagen/random.hpp"
#include "causagen/table.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace fixtures {

// Random mixed table: numeric columns are rounded normals (so ties occur),
// categorical columns draw from 2-4 levels.
inline causagen::Table random_mixed(std::size_t n, std::size_t d, std::uint64_t seed, double cat_share = 0.4) {
  causagen::Rng rng(seed);
  std::vector<causagen::ColumnSchema> cols;
  for (std::size_t j = 0; j < d; ++j) {
    causagen::ColumnSchema c{"c" + std::to_string(j)};
    if (rng.uniform() < cat_share) {
      c.kind = causagen::ColumnKind::categorical;
      const auto levels = 2 + rng.index(3);
      for (std::size_t k = 0; k < levels; ++k) c.categories.push_back("l" + std::to_string(k));
    }
    cols.push_back(std::move(c));
  }
  Eigen::MatrixXd v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) {
    const double scale = 0.5 + 3 * rng.uniform();
    for (std::size_t i = 0; i < n; ++i) {
      auto& cell = v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (cols[j].is_categorical()) cell = static_cast<double>(rng.index(cols[j].categories.size()));
      else cell = std::round(rng.normal() * scale * 8) / 8;
    }
  }
  return causagen::Table(causagen::Schema(std::move(cols)), std::move(v));
}

inline causagen::Table numeric_table(const std::vector<std::string>& names, const std::vector<std::vector<double>>& rows) {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < names.size(); ++j) v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return causagen::Table(causagen::Schema::numeric(names), std::move(v));
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("causagen-" + tag + "-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
