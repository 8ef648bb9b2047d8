#pragma once

#include "eqr/metrics/metrics.hpp"

#include <json.hpp>

namespace eqr::metrics {

void to_json(nlohmann::json& j, const MetricValue& v);
void from_json(const nlohmann::json& j, MetricValue& v);
void to_json(nlohmann::json& j, const MetricTable& t);
void from_json(const nlohmann::json& j, MetricTable& t);
void to_json(nlohmann::json& j, const FlaggedValue& v);
void from_json(const nlohmann::json& j, FlaggedValue& v);

}  // namespace eqr::metrics
