#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "bellaudit/bell.hpp"
#include "bellaudit/correlations.hpp"
#include "bellaudit/franson.hpp"
#include "bellaudit/lhv.hpp"
#include "bellaudit/spacetime.hpp"

// JSON and CSV formats; see docs/formats.md. Non-finite numbers are written
// as null. Parsers throw ValidationError with the offending field path.
namespace bellaudit::io {

using Json = nlohmann::ordered_json;

Json table_to_json(const correlations::CorrelationTable& table);
correlations::CorrelationTable table_from_json(const Json& j);

Json local_model_to_json(const lhv::LocalModel& model, const correlations::TableShape& shape);
lhv::LocalModel local_model_from_json(const Json& j);
Json comm_model_to_json(const lhv::CommModel& model, const correlations::TableShape& shape);
Json certificate_to_json(const lhv::InfeasibilityCertificate& cert, const correlations::TableShape& shape);

Json expression_to_json(const bell::BellExpression& expr);
Json audit_to_json(const spacetime::AuditReport& report);
Json franson_config_to_json(const franson::FransonConfig& config);
Json summary_to_json(const franson::RunSummary& summary, const franson::FransonConfig& config);
Json postselected_to_json(const franson::PostselectedBound& bound);
Json switching_to_json(const franson::SwitchingRequirement& req);

// Header `phase_a_rad,n_kept,n_equal,n_unequal,e_hat`, one row per phase.
std::string fringe_csv(const franson::FringeScan& scan);

// Two-space indent, trailing newline.
std::string dump(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace bellaudit::io
