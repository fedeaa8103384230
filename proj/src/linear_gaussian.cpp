#include "causagen/error.hpp"
#include "causagen/sampler.hpp"

#include <Eigen/QR>

namespace causagen {

double bootstrap_draw(const Eigen::VectorXd& values, Rng& rng) {
  return values(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(values.size()))));
}

double LinearGaussianModel::predict(std::span<const double> x) const {
  double y = intercept;
  for (Eigen::Index k = 0; k < coefficients.size(); ++k) y += coefficients(k) * x[static_cast<std::size_t>(k)];
  return y;
}

double LinearGaussianModel::sample(std::span<const double> x, Rng& rng) const {
  return predict(x) + bootstrap_draw(residuals, rng);
}

LinearGaussianModel fit_linear_gaussian(const Eigen::MatrixXd& context, const Eigen::VectorXd& target) {
  const Eigen::Index n = target.size();
  if (n == 0) throw DataError("linear-Gaussian fit on an empty table");
  if (context.rows() != n) throw DataError("context and target row counts differ");
  LinearGaussianModel m;
  const double y_mean = target.mean();
  if (context.cols() == 0) {
    m.intercept = y_mean;
    m.coefficients.resize(0);
    m.residuals = target.array() - y_mean;
    return m;
  }
  const Eigen::RowVectorXd x_mean = context.colwise().mean();
  const Eigen::MatrixXd xc = context.rowwise() - x_mean;
  const Eigen::VectorXd yc = target.array() - y_mean;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xc);
  if (qr.rank() == xc.cols()) {
    m.coefficients = qr.solve(yc);
  } else {
    const Eigen::MatrixXd gram = xc.transpose() * xc;
    const double trace = gram.trace();
    const double lambda = 1e-8 * (trace > 0 ? trace / static_cast<double>(gram.rows()) : 1.0);
    m.coefficients = (gram + lambda * Eigen::MatrixXd::Identity(gram.rows(), gram.cols()))
                         .ldlt()
                         .solve(xc.transpose() * yc);
    m.ridge = true;
  }
  m.intercept = y_mean - x_mean.dot(m.coefficients);
  m.residuals = yc - xc * m.coefficients;
  return m;
}

namespace {

// Expands categorical context columns to drop-first indicators.
struct Encoding {
  std::vector<ColumnSchema> schema;
  std::size_t width = 0;

  std::size_t encode(std::span<const double> x, std::span<double> out) const {
    std::size_t k = 0;
    for (std::size_t j = 0; j < schema.size(); ++j) {
      if (schema[j].is_categorical()) {
        const auto levels = schema[j].categories.size();
        for (std::size_t c = 1; c < levels; ++c) out[k++] = (x[j] == static_cast<double>(c)) ? 1.0 : 0.0;
      } else {
        out[k++] = x[j];
      }
    }
    return k;
  }
};

class LinearGaussianConditional final : public FittedConditional {
 public:
  LinearGaussianConditional(Encoding enc, LinearGaussianModel model)
      : enc_(std::move(enc)), model_(std::move(model)) {}

  double sample(std::span<const double> context, Rng& rng) const override {
    thread_local std::vector<double> row;
    row.resize(enc_.width);
    enc_.encode(context, row);
    return model_.sample(row, rng);
  }

 private:
  Encoding enc_;
  LinearGaussianModel model_;
};

}  // namespace

std::unique_ptr<FittedConditional> LinearGaussianSampler::fit(const ConditionalData& data) const {
  if (data.target_schema.is_categorical())
    throw DataError("lingauss sampler cannot generate categorical column '" + data.target_schema.name + "'");
  Encoding enc{data.context_schema, 0};
  for (const auto& c : enc.schema) enc.width += c.is_categorical() ? c.categories.size() - 1 : 1;
  Eigen::MatrixXd design(data.context.rows(), static_cast<Eigen::Index>(enc.width));
  std::vector<double> in(enc.schema.size()), out(enc.width);
  for (Eigen::Index i = 0; i < data.context.rows(); ++i) {
    for (std::size_t j = 0; j < in.size(); ++j) in[j] = data.context(i, static_cast<Eigen::Index>(j));
    enc.encode(in, out);
    for (std::size_t k = 0; k < out.size(); ++k) design(i, static_cast<Eigen::Index>(k)) = out[k];
  }
  return std::make_unique<LinearGaussianConditional>(std::move(enc), fit_linear_gaussian(design, data.target));
}

}  // namespace causagen
