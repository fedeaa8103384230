#include "causagen/engine.hpp"

#include "causagen/error.hpp"
#include "causagen/parallel.hpp"

namespace causagen {

AutoregressiveEngine::AutoregressiveEngine(std::shared_ptr<const ConditionalSampler> sampler)
    : sampler_(std::move(sampler)) {
  if (!sampler_) throw DataError("engine needs a sampler");
}

Table AutoregressiveEngine::generate(const GenerationRequest& req) const {
  const auto& train = req.train;
  const auto& schema = train.schema();
  const auto& plan = req.plan;
  if (train.rows() == 0) throw DataError("generate: empty training table");
  if (req.n_samples == 0) throw DataError("generate: n_samples must be at least 1");
  if (plan.columns.names() != schema.names())
    throw DataError("generate: plan columns do not match the training schema");
  if (!plan.is_consistent()) throw DataError("generate: inconsistent generation plan");

  const auto n = static_cast<Eigen::Index>(req.n_samples);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, train.cols());
  std::vector<bool> generated(schema.size(), false);

  for (const auto target : plan.order) {
    const auto& target_schema = schema[target];
    if (target_schema.is_categorical() && !sampler_->supports_categorical())
      throw DataError("sampler '" + std::string(sampler_->name()) + "' cannot generate categorical column '" +
                      target_schema.name + "'");
    const auto& cond = plan.conditioning[target];
    ConditionalData data;
    data.target_schema = target_schema;
    data.target = train.values().col(static_cast<Eigen::Index>(target));
    data.context.resize(train.rows(), static_cast<Eigen::Index>(cond.size()));
    data.permutations = req.permutations;
    for (std::size_t k = 0; k < cond.size(); ++k) {
      if (!generated[cond[k]])
        throw DataError("conditioning column '" + schema[cond[k]].name + "' not generated before '" +
                        target_schema.name + "'");
      data.context_schema.push_back(schema[cond[k]]);
      data.context.col(static_cast<Eigen::Index>(k)) = train.values().col(static_cast<Eigen::Index>(cond[k]));
    }
    const auto model = sampler_->fit(data);

    parallel_for(req.n_samples, req.threads, [&](std::size_t i) {
      thread_local std::vector<double> row;
      row.resize(cond.size());
      const auto r = static_cast<Eigen::Index>(i);
      for (std::size_t k = 0; k < cond.size(); ++k) row[k] = out(r, static_cast<Eigen::Index>(cond[k]));
      Rng rng = cell_rng(req.seed, target, i);
      out(r, static_cast<Eigen::Index>(target)) = model->sample(row, rng);
    });
    generated[target] = true;
  }
  return Table(schema, std::move(out));
}

}  // namespace causagen
