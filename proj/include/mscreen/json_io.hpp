#pragma once

#include <json.hpp>
#include <string>

#include "mscreen/experiments.hpp"
#include "mscreen/screening.hpp"
#include "mscreen/simgen.hpp"

namespace mscreen {

using Json = nlohmann::json;

Json kernel_to_json(const KernelSpec& spec);
KernelSpec kernel_from_json(const Json& j);

Json model_to_json(const ModelSpec& model);
ModelSpec model_from_json(const Json& j);

Json screen_config_to_json(const ScreenConfig& cfg);
Json screen_result_to_json(const ScreenResult& result);

Json plan_to_json(const ExperimentPlan& plan);
/// Parses a replication plan; schema violations raise DataError naming the
/// offending field.
ExperimentPlan plan_from_json(const Json& j);

Json report_to_json(const RecoveryReport& report);
/// One row per (method, noise_dim, variable) cell plus an "all" summary row.
std::string report_to_csv(const RecoveryReport& report);

void write_json_file(const std::string& path, const Json& j);
Json read_json_file(const std::string& path);

}  // namespace mscreen
