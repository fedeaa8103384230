#include "causagen/error.hpp"
#include "causagen/sampler.hpp"
#include "causagen/scm.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace causagen;

namespace {

ConditionalData numeric_data(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::string> names = {}) {
  ConditionalData d;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    d.context_schema.push_back({names.empty() ? "f" + std::to_string(j) : names[static_cast<std::size_t>(j)]});
  d.context = x;
  d.target_schema = {"y"};
  d.target = y;
  return d;
}

double marginal_tvd(const std::vector<double>& a, const std::vector<double>& b, int bins) {
  const auto edges = oracle::quantile_edges(a, bins);
  std::map<int, double> p, q;
  for (double v : a) p[oracle::bin(edges, v)] += 1.0 / static_cast<double>(a.size());
  for (double v : b) q[oracle::bin(edges, v)] += 1.0 / static_cast<double>(b.size());
  double s = 0;
  for (int k = 0; k <= static_cast<int>(edges.size()); ++k) s += std::abs(p[k] - q[k]);
  return s / 2;
}

}  // namespace

TEST_SUITE("samplers") {
  TEST_CASE("linear-Gaussian recovers an exact line") {
    Eigen::MatrixXd x(50, 1);
    Eigen::VectorXd y(50);
    for (int i = 0; i < 50; ++i) {
      x(i, 0) = i * 0.37 - 4;
      y(i) = 2 * x(i, 0);
    }
    const auto m = fit_linear_gaussian(x, y);
    CHECK(std::abs(m.coefficients(0) - 2.0) < 1e-9);
    CHECK(m.residuals.cwiseAbs().maxCoeff() < 1e-9);
    CHECK_FALSE(m.ridge);
  }

  TEST_CASE("linear-Gaussian with empty context bootstraps around the mean") {
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 10;
    const auto m = fit_linear_gaussian(Eigen::MatrixXd(4, 0), y);
    CHECK(m.intercept == doctest::Approx(4.0));
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
      const double v = m.sample({}, rng);
      CHECK((std::abs(v - 1) < 1e-12 || std::abs(v - 2) < 1e-12 || std::abs(v - 3) < 1e-12 || std::abs(v - 10) < 1e-12));
    }
  }

  TEST_CASE("linear-Gaussian on the collider recovers the structural coefficients") {
    const auto t = sample(builtin_collider_scm(1e-5), 500, 8);
    Eigen::MatrixXd x(500, 2);
    x.col(0) = t.col("X0");
    x.col(1) = t.col("X2");
    const auto m = fit_linear_gaussian(x, t.col("X1"));
    CHECK(std::abs(m.coefficients(0) - 5.0) < 1e-2);
    CHECK(std::abs(m.coefficients(1) - 10.0) < 1e-2);
  }

  TEST_CASE("rank-deficient designs fall back to ridge") {
    Eigen::MatrixXd x(20, 2);
    Eigen::VectorXd y(20);
    for (int i = 0; i < 20; ++i) {
      x(i, 0) = i;
      x(i, 1) = 2 * i;
      y(i) = 3 * i + 1;
    }
    const auto m = fit_linear_gaussian(x, y);
    CHECK(m.ridge);
    for (int i = 0; i < 20; ++i) {
      const double row[] = {x(i, 0), x(i, 1)};
      CHECK(m.predict(row) == doctest::Approx(y(i)).epsilon(1e-6));
    }
  }

  TEST_CASE("linear-Gaussian sampler one-hot encodes categorical context") {
    ConditionalData d;
    d.context_schema = {{"c", ColumnKind::categorical, {"a", "b", "c"}}};
    d.context.resize(30, 1);
    d.target_schema = {"y"};
    d.target.resize(30);
    for (int i = 0; i < 30; ++i) {
      d.context(i, 0) = i % 3;
      d.target(i) = 10.0 * (i % 3);
    }
    const auto f = LinearGaussianSampler().fit(d);
    Rng rng(2);
    for (double c : {0.0, 1.0, 2.0}) {
      const double row[] = {c};
      CHECK(f->sample(row, rng) == doctest::Approx(10.0 * c));
    }
    d.target_schema = {"y", ColumnKind::categorical, {"u", "v"}};
    CHECK_THROWS_AS(LinearGaussianSampler().fit(d), DataError);
  }

  TEST_CASE("CART reproduces a deterministic categorical rule") {
    ConditionalData d;
    d.context_schema = {{"c", ColumnKind::categorical, {"a", "b", "c", "d"}}};
    d.target_schema = {"y", ColumnKind::categorical, {"p", "q", "r"}};
    const int rule[] = {2, 0, 1, 2};
    d.context.resize(80, 1);
    d.target.resize(80);
    for (int i = 0; i < 80; ++i) {
      d.context(i, 0) = i % 4;
      d.target(i) = rule[i % 4];
    }
    const auto f = CartSampler().fit(d);
    Rng rng(4);
    for (int c = 0; c < 4; ++c)
      for (int k = 0; k < 20; ++k) {
        const double row[] = {static_cast<double>(c)};
        CHECK(f->sample(row, rng) == rule[c]);
      }
  }

  TEST_CASE("CART with min_leaf >= n is a single leaf") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 2);
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(10, 0, 9);
    const auto tree = fit_cart(numeric_data(x, y), {12, 10});
    CHECK(tree.leaf_count() == 1);
    CHECK(tree.depth() == 0);
    const double row[] = {0.0, 0.0};
    CHECK(tree.leaf(row).size() == 10);
  }

  TEST_CASE("CART respects max_depth and min_leaf") {
    Rng rng(5);
    Eigen::MatrixXd x(400, 3);
    Eigen::VectorXd y(400);
    for (int i = 0; i < 400; ++i) {
      for (int j = 0; j < 3; ++j) x(i, j) = rng.normal();
      y(i) = x(i, 0) * x(i, 1) + rng.normal();
    }
    const auto tree = fit_cart(numeric_data(x, y), {4, 7});
    CHECK(tree.depth() <= 4);
    for (int i = 0; i < 400; ++i) {
      const double row[] = {x(i, 0), x(i, 1), x(i, 2)};
      CHECK(tree.leaf(row).size() >= 7);
    }
  }

  TEST_CASE("CART with irrelevant context keeps the marginal") {
    Rng rng(6);
    const int n = 1000;
    Eigen::MatrixXd x(n, 1);
    Eigen::VectorXd y(n);
    std::vector<double> train, drawn;
    for (int i = 0; i < n; ++i) {
      x(i, 0) = rng.normal();
      y(i) = rng.normal();
      train.push_back(y(i));
    }
    const auto f = CartSampler().fit(numeric_data(x, y));
    for (int i = 0; i < n; ++i) {
      Rng r = cell_rng(1, 0, static_cast<std::uint64_t>(i));
      const double row[] = {rng.normal()};
      drawn.push_back(f->sample(row, r));
    }
    CHECK(marginal_tvd(train, drawn, 20) < 0.1);
  }

  TEST_CASE("CART does not depend on context column order") {
    Rng rng(7);
    Eigen::MatrixXd x(200, 3);
    Eigen::VectorXd y(200);
    for (int i = 0; i < 200; ++i) {
      for (int j = 0; j < 3; ++j) x(i, j) = rng.normal();
      y(i) = x(i, 2) - x(i, 0) + 0.1 * rng.normal();
    }
    Eigen::MatrixXd shuffled(200, 3);
    shuffled.col(0) = x.col(2);
    shuffled.col(1) = x.col(0);
    shuffled.col(2) = x.col(1);
    const auto a = fit_cart(numeric_data(x, y, {"a", "b", "c"}));
    const auto b = fit_cart(numeric_data(shuffled, y, {"c", "a", "b"}));
    CHECK(a.describe() == b.describe());
    const auto fa = CartSampler().fit(numeric_data(x, y, {"a", "b", "c"}));
    const auto fb = CartSampler().fit(numeric_data(shuffled, y, {"c", "a", "b"}));
    for (int i = 0; i < 50; ++i) {
      Rng ra(static_cast<std::uint64_t>(i)), rb(static_cast<std::uint64_t>(i));
      const double ra_row[] = {x(i, 0), x(i, 1), x(i, 2)};
      const double rb_row[] = {x(i, 2), x(i, 0), x(i, 1)};
      CHECK(fa->sample(ra_row, ra) == fb->sample(rb_row, rb));
    }
  }

  TEST_CASE("permutations are advisory for built-in samplers") {
    const auto t = sample(builtin_collider_scm(), 100, 3);
    Eigen::MatrixXd x(100, 2);
    x.col(0) = t.col("X0");
    x.col(1) = t.col("X2");
    for (const auto* name : {"cart", "lingauss"}) {
      auto d1 = numeric_data(x, t.col("X1"));
      auto d3 = d1;
      d1.permutations = 1;
      d3.permutations = 3;
      const auto s = make_sampler(name);
      const auto f1 = s->fit(d1), f3 = s->fit(d3);
      for (int i = 0; i < 20; ++i) {
        Rng r1(static_cast<std::uint64_t>(i)), r3(static_cast<std::uint64_t>(i));
        const double row[] = {x(i, 0), x(i, 1)};
        CHECK(f1->sample(row, r1) == f3->sample(row, r3));
      }
    }
    CHECK_THROWS_AS(make_sampler("tabpfn"), DataError);
  }

  TEST_CASE("categorical draws stay in the category set") {
    ConditionalData d;
    d.target_schema = {"y", ColumnKind::categorical, {"a", "b", "c"}};
    d.context.resize(9, 0);
    d.target.resize(9);
    d.target << 0, 1, 2, 0, 1, 2, 2, 2, 2;
    const auto f = CartSampler().fit(d);
    for (std::uint64_t i = 0; i < 200; ++i) {
      Rng r(i);
      const double v = f->sample({}, r);
      CHECK((v == 0 || v == 1 || v == 2));
    }
  }

  TEST_CASE("bootstrap_draw follows floor(u * n)") {
    Eigen::VectorXd v(7);
    v << 0, 1, 2, 3, 4, 5, 6;
    for (std::uint64_t s = 0; s < 100; ++s) {
      Rng a(s), b(s);
      const double u = b.uniform();
      CHECK(bootstrap_draw(v, a) == std::floor(u * 7));
    }
  }
}
