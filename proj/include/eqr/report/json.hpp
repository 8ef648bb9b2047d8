#pragma once

#include "eqr/report/report.hpp"

#include <json.hpp>

namespace eqr::report {

void to_json(nlohmann::json& j, const RenderedTable& t);
void from_json(const nlohmann::json& j, RenderedTable& t);
void to_json(nlohmann::json& j, const ReportDocument& d);
void from_json(const nlohmann::json& j, ReportDocument& d);
void to_json(nlohmann::json& j, const FactAudit& a);

}  // namespace eqr::report
