#include "causagen/csv.hpp"
#include "causagen/error.hpp"
#include "causagen/sampler.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace causagen {

CartTree::CartTree(std::vector<std::string> feature_names, std::vector<Node> nodes)
    : feature_names_(std::move(feature_names)), nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw DataError("CART tree without nodes");
}

const std::vector<double>& CartTree::leaf(std::span<const double> context) const {
  int k = 0;
  while (nodes_[static_cast<std::size_t>(k)].feature >= 0) {
    const auto& node = nodes_[static_cast<std::size_t>(k)];
    const double x = context[static_cast<std::size_t>(node.feature)];
    const bool left = node.categorical_split ? x == node.threshold : x <= node.threshold;
    k = left ? node.left : node.right;
  }
  return nodes_[static_cast<std::size_t>(k)].values;
}

double CartTree::sample(std::span<const double> context, Rng& rng) const {
  const auto& values = leaf(context);
  return values[rng.index(values.size())];
}

std::size_t CartTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

int CartTree::depth() const {
  std::vector<int> d(nodes_.size(), 0);
  int best = 0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const auto& n = nodes_[k];
    if (n.feature < 0) continue;
    d[static_cast<std::size_t>(n.left)] = d[static_cast<std::size_t>(n.right)] = d[k] + 1;
    best = std::max(best, d[k] + 1);
  }
  return best;
}

std::string CartTree::describe() const {
  std::ostringstream out;
  auto visit = [&](auto&& self, int k, int indent) -> void {
    const auto& n = nodes_[static_cast<std::size_t>(k)];
    out << std::string(static_cast<std::size_t>(indent) * 2, ' ');
    if (n.feature < 0) {
      out << "leaf n=" << n.values.size() << '\n';
      return;
    }
    out << feature_names_[static_cast<std::size_t>(n.feature)] << (n.categorical_split ? " == " : " <= ")
        << format_double(n.threshold) << '\n';
    self(self, n.left, indent + 1);
    self(self, n.right, indent + 1);
  };
  visit(visit, 0, 0);
  return out.str();
}

namespace {

struct SplitChoice {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
  bool categorical = false;
};

class CartBuilder {
 public:
  CartBuilder(const ConditionalData& data, const CartParams& params)
      : data_(data), params_(params), classes_(data.target_schema.is_categorical()
                                                   ? data.target_schema.categories.size()
                                                   : 0) {
    feature_order_.resize(data.context_schema.size());
    std::iota(feature_order_.begin(), feature_order_.end(), 0);
    std::sort(feature_order_.begin(), feature_order_.end(), [&](std::size_t a, std::size_t b) {
      return data.context_schema[a].name < data.context_schema[b].name;
    });
  }

  std::vector<CartTree::Node> build() {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(data_.target.size()));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  double target(Eigen::Index i) const { return data_.target(i); }
  double feature(Eigen::Index i, std::size_t f) const { return data_.context(i, static_cast<Eigen::Index>(f)); }

  // Impurity scaled by node size: SSE for regression, n * Gini otherwise.
  double impurity(const std::vector<Eigen::Index>& rows) const {
    if (rows.empty()) return 0.0;
    const double n = static_cast<double>(rows.size());
    if (classes_ == 0) {
      double mean = 0;
      for (auto i : rows) mean += target(i);
      mean /= n;
      double sse = 0;
      for (auto i : rows) sse += (target(i) - mean) * (target(i) - mean);
      return sse;
    }
    std::vector<double> counts(classes_, 0.0);
    for (auto i : rows) counts[static_cast<std::size_t>(target(i))] += 1;
    return gini_mass(counts, n);
  }

  static double gini_mass(const std::vector<double>& counts, double n) {
    if (n <= 0) return 0.0;
    double sq = 0;
    for (double c : counts) sq += c * c;
    return n - sq / n;
  }

  void consider(SplitChoice& best, double gain, std::size_t f, double threshold, bool categorical) const {
    if (gain > best.gain) best = {gain, static_cast<int>(f), threshold, categorical};
  }

  void search_numeric(const std::vector<Eigen::Index>& rows, std::size_t f, double parent, double center,
                      SplitChoice& best) const {
    std::vector<Eigen::Index> sorted = rows;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return feature(a, f) < feature(b, f); });
    const std::size_t n = sorted.size();
    const std::size_t min_leaf = std::max<std::size_t>(1, params_.min_leaf);
    if (classes_ == 0) {
      double total_s = 0, total_q = 0;
      for (auto i : sorted) {
        const double y = target(i) - center;
        total_s += y;
        total_q += y * y;
      }
      double s = 0, q = 0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const double y = target(sorted[k]) - center;
        s += y;
        q += y * y;
        const std::size_t nl = k + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double a = feature(sorted[k], f), b = feature(sorted[k + 1], f);
        if (!(a < b)) continue;
        const double sse_l = q - s * s / static_cast<double>(nl);
        const double rs = total_s - s, rq = total_q - q;
        const double sse_r = rq - rs * rs / static_cast<double>(nr);
        consider(best, parent - (sse_l + sse_r), f, split_point(a, b), false);
      }
    } else {
      std::vector<double> left(classes_, 0.0), right(classes_, 0.0);
      for (auto i : sorted) right[static_cast<std::size_t>(target(i))] += 1;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const auto c = static_cast<std::size_t>(target(sorted[k]));
        left[c] += 1;
        right[c] -= 1;
        const std::size_t nl = k + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double a = feature(sorted[k], f), b = feature(sorted[k + 1], f);
        if (!(a < b)) continue;
        const double g = gini_mass(left, static_cast<double>(nl)) + gini_mass(right, static_cast<double>(nr));
        consider(best, parent - g, f, split_point(a, b), false);
      }
    }
  }

  void search_categorical(const std::vector<Eigen::Index>& rows, std::size_t f, double parent,
                          SplitChoice& best) const {
    const auto levels = data_.context_schema[f].categories.size();
    const std::size_t min_leaf = std::max<std::size_t>(1, params_.min_leaf);
    for (std::size_t c = 0; c < levels; ++c) {
      std::vector<Eigen::Index> left, right;
      for (auto i : rows) (feature(i, f) == static_cast<double>(c) ? left : right).push_back(i);
      if (left.size() < min_leaf || right.size() < min_leaf) continue;
      consider(best, parent - (impurity(left) + impurity(right)), f, static_cast<double>(c), true);
    }
  }

  static double split_point(double a, double b) {
    const double mid = a + (b - a) / 2;
    return (mid < b) ? mid : a;
  }

  int grow(const std::vector<Eigen::Index>& rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    const double parent = impurity(rows);
    SplitChoice best;
    const bool can_split = depth < params_.max_depth && rows.size() >= 2 * std::max<std::size_t>(1, params_.min_leaf) &&
                           parent > 0;
    if (can_split) {
      double center = 0;
      if (classes_ == 0) {
        for (auto i : rows) center += target(i);
        center /= static_cast<double>(rows.size());
      }
      // Gains below this are rounding noise in the prefix-sum updates.
      best.gain = 1e-12 * parent;
      for (auto f : feature_order_) {
        if (data_.context_schema[f].is_categorical())
          search_categorical(rows, f, parent, best);
        else
          search_numeric(rows, f, parent, center, best);
      }
    }
    if (best.feature < 0) {
      auto& leaf = nodes_[static_cast<std::size_t>(id)];
      leaf.values.reserve(rows.size());
      for (auto i : rows) leaf.values.push_back(target(i));
      return id;
    }
    std::vector<Eigen::Index> left, right;
    const auto f = static_cast<std::size_t>(best.feature);
    for (auto i : rows) {
      const double x = feature(i, f);
      const bool go_left = best.categorical ? x == best.threshold : x <= best.threshold;
      (go_left ? left : right).push_back(i);
    }
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.categorical_split = best.categorical;
    node.left = l;
    node.right = r;
    return id;
  }

  const ConditionalData& data_;
  CartParams params_;
  std::size_t classes_;
  std::vector<std::size_t> feature_order_;
  std::vector<CartTree::Node> nodes_;
};

class CartConditional final : public FittedConditional {
 public:
  explicit CartConditional(CartTree tree) : tree_(std::move(tree)) {}
  double sample(std::span<const double> context, Rng& rng) const override { return tree_.sample(context, rng); }

 private:
  CartTree tree_;
};

}  // namespace

CartTree fit_cart(const ConditionalData& data, const CartParams& params) {
  if (data.target.size() == 0) throw DataError("CART fit on an empty table");
  if (data.context.rows() != data.target.size()) throw DataError("context and target row counts differ");
  std::vector<std::string> names;
  for (const auto& c : data.context_schema) names.push_back(c.name);
  return CartTree(std::move(names), CartBuilder(data, params).build());
}

std::unique_ptr<FittedConditional> CartSampler::fit(const ConditionalData& data) const {
  return std::make_unique<CartConditional>(fit_cart(data, params_));
}

std::unique_ptr<ConditionalSampler> make_sampler(std::string_view name) {
  if (name == "cart") return std::make_unique<CartSampler>();
  if (name == "lingauss") return std::make_unique<LinearGaussianSampler>();
  throw DataError("unknown sampler: " + std::string(name));
}

}  // namespace causagen
