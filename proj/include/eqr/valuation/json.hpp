#pragma once

#include "eqr/valuation/valuation.hpp"

#include <json.hpp>

namespace eqr::valuation {

void to_json(nlohmann::json& j, const ValuationSummary& v);
void from_json(const nlohmann::json& j, ValuationSummary& v);
void to_json(nlohmann::json& j, const DcfAssumptions& a);
void from_json(const nlohmann::json& j, DcfAssumptions& a);
void to_json(nlohmann::json& j, const DcfSchedule& s);
void from_json(const nlohmann::json& j, DcfSchedule& s);
void to_json(nlohmann::json& j, const ValuationResult& r);
void from_json(const nlohmann::json& j, ValuationResult& r);

}  // namespace eqr::valuation
