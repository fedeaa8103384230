#pragma once

#include "causagen/random.hpp"
#include "causagen/table.hpp"

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace causagen {

// Training data for one conditional p(target | context).
struct ConditionalData {
  std::vector<ColumnSchema> context_schema;
  Eigen::MatrixXd context;  // n x k, columns follow context_schema
  ColumnSchema target_schema;
  Eigen::VectorXd target;
  int permutations = 3;  // advisory; built-in samplers are order-invariant
};

class FittedConditional {
 public:
  virtual ~FittedConditional() = default;
  // `context` follows the context_schema order used at fit time.
  virtual double sample(std::span<const double> context, Rng& rng) const = 0;
};

// Contract: with an empty context the fitted conditional reproduces the
// target's training marginal; categorical draws stay inside the schema's
// category set.
class ConditionalSampler {
 public:
  virtual ~ConditionalSampler() = default;
  virtual std::string_view name() const = 0;
  virtual bool supports_categorical() const = 0;
  virtual std::unique_ptr<FittedConditional> fit(const ConditionalData& data) const = 0;
};

// Draws a uniformly chosen training value: floor(u * n) on the cell stream.
double bootstrap_draw(const Eigen::VectorXd& values, Rng& rng);

// ---------------------------------------------------------------------------
// Linear-Gaussian stand-in.

struct LinearGaussianModel {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd residuals;
  bool ridge = false;  // rank-deficient design fell back to a ridge solve

  double predict(std::span<const double> x) const;
  // Prediction plus a residual drawn from the training residuals.
  double sample(std::span<const double> x, Rng& rng) const;
};

// Least squares with intercept. Rank-deficient designs are solved with a
// ridge penalty of 1e-8 * trace(X'X) / k on the centred normal equations.
LinearGaussianModel fit_linear_gaussian(const Eigen::MatrixXd& context,
                                        const Eigen::VectorXd& target);

// Numeric targets only. Categorical context columns are one-hot encoded.
class LinearGaussianSampler final : public ConditionalSampler {
 public:
  std::string_view name() const override { return "lingauss"; }
  bool supports_categorical() const override { return false; }
  std::unique_ptr<FittedConditional> fit(const ConditionalData& data) const override;
};

// ---------------------------------------------------------------------------
// CART stand-in.

struct CartParams {
  int max_depth = 12;
  std::size_t min_leaf = 5;
};

class CartTree {
 public:
  struct Node {
    // Internal nodes: numeric feature goes left when x <= threshold;
    // categorical feature goes left when x == category.
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    bool categorical_split = false;
    int left = -1;
    int right = -1;
    std::vector<double> values;  // leaf training targets
  };

  CartTree(std::vector<std::string> feature_names, std::vector<Node> nodes);

  // Leaf values reached by `context` (context_schema order at fit time).
  const std::vector<double>& leaf(std::span<const double> context) const;
  double sample(std::span<const double> context, Rng& rng) const;

  std::size_t leaf_count() const;
  int depth() const;
  // Canonical text form; features are referred to by name.
  std::string describe() const;

 private:
  std::vector<std::string> feature_names_;
  std::vector<Node> nodes_;
};

// Greedy splits: variance reduction for numeric targets, Gini for
// categorical ones. Features are scanned in name order, so the tree does not
// depend on the context column order.
CartTree fit_cart(const ConditionalData& data, const CartParams& params = {});

class CartSampler final : public ConditionalSampler {
 public:
  explicit CartSampler(CartParams params = {}) : params_(params) {}
  std::string_view name() const override { return "cart"; }
  bool supports_categorical() const override { return true; }
  std::unique_ptr<FittedConditional> fit(const ConditionalData& data) const override;

 private:
  CartParams params_;
};

std::unique_ptr<ConditionalSampler> make_sampler(std::string_view name);

}  // namespace causagen
