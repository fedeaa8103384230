#pragma once

#include "causagen/plan.hpp"
#include "causagen/sampler.hpp"
#include "causagen/table.hpp"

#include <cstdint>
#include <memory>

namespace causagen {

struct GenerationRequest {
  Table train;
  GenerationPlan plan;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  int permutations = 3;
  unsigned threads = 1;  // output does not depend on this
};

class TableGenerator {
 public:
  virtual ~TableGenerator() = default;
  // Output columns are in the train schema order whatever the plan order.
  virtual Table generate(const GenerationRequest& req) const = 0;
};

// Fits one conditional per target in plan order and samples it given the
// already generated columns. Cell (row i, column j) uses cell_rng(seed, j, i).
class AutoregressiveEngine final : public TableGenerator {
 public:
  explicit AutoregressiveEngine(std::shared_ptr<const ConditionalSampler> sampler);
  Table generate(const GenerationRequest& req) const override;

 private:
  std::shared_ptr<const ConditionalSampler> sampler_;
};

}  // namespace causagen
