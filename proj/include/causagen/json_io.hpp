#pragma once

#include "causagen/experiment.hpp"
#include "causagen/graph.hpp"
#include "causagen/graph_quality.hpp"
#include "causagen/scm.hpp"
#include "causagen/stats.hpp"
#include "causagen/table.hpp"

#include <json.hpp>

#include <filesystem>

namespace causagen {

// Schema file: [{"name":..., "kind":"numeric"|"categorical", "categories":[...]}]
Schema schema_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Schema& s);
Schema load_schema(const std::filesystem::path& path);

// Graph file: {"nodes":[...], "directed":[[u,v],...], "undirected":[[u,v],...]}
Cpdag cpdag_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Cpdag& g);
// A DAG file is a graph file without undirected edges ("edges" is accepted as
// an alias of "directed").
CausalDag dag_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CausalDag& g);

// SCM file: {"nodes":[...], "edges":[[u,v],...], "equations":{name: {...}}}
// with equations {"type":"gaussian_root","mean","std"},
// {"type":"linear","intercept","coefficients":{parent:c},"noise_std"},
// {"type":"categorical","categories":[...],"table":[[p...],...]},
// {"type":"constant","value"}.
Scm scm_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scm& scm);

nlohmann::json to_json(const GraphQuality& q);
nlohmann::json to_json(const ComparisonResult& r);
nlohmann::json to_json(const std::vector<ComparisonRow>& rows);
nlohmann::json to_json(const std::vector<SensitivityCell>& cells);

// Relative file paths inside the config resolve against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir = {});

nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace causagen
