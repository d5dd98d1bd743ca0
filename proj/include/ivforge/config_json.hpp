#pragma once

#include <json.hpp>

#include "ivforge/montecarlo_fwd.hpp"

namespace ivforge {

using Json = nlohmann::ordered_json;

Json sigma_to_json(const SigmaSpec& s);
SigmaSpec sigma_from_json(const Json& j);

Json dgp_to_json(const DgpSpec& spec);
DgpSpec dgp_from_json(const Json& j);

Json instrument_to_json(const InstrumentSpec& spec);
InstrumentSpec instrument_from_json(const Json& j);

std::string transform_to_string(TransformId h);
TransformId transform_from_string(const std::string& s);

Json experiment_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_from_json(const Json& j);

Json report_summary_json(const SimulationReport& report);
Json report_to_json(const ExperimentConfig& cfg, const SimulationReport& report);
SimulationReport report_from_json(const Json& j);

Json audit_to_json(const AuditTable& table);

Json read_json_file(const std::string& path);
void write_json_file(const Json& doc, const std::string& path);

}  // namespace ivforge
