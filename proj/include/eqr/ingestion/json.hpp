#pragma once

#include "eqr/ingestion/types.hpp"

#include <json.hpp>

namespace eqr::ingestion {

void to_json(nlohmann::json& j, const RawDocument& d);
void from_json(const nlohmann::json& j, RawDocument& d);
void to_json(nlohmann::json& j, const FinancialPeriod& p);
void from_json(const nlohmann::json& j, FinancialPeriod& p);
void to_json(nlohmann::json& j, const CompanyFinancials& f);
void from_json(const nlohmann::json& j, CompanyFinancials& f);

}  // namespace eqr::ingestion
