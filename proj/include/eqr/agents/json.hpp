#pragma once

#include "eqr/agents/agents.hpp"

#include <json.hpp>

namespace eqr::agents {

void to_json(nlohmann::json& j, const Insight& i);
void from_json(const nlohmann::json& j, Insight& i);
void to_json(nlohmann::json& j, const CompetitorBenchmark& b);
void from_json(const nlohmann::json& j, CompetitorBenchmark& b);
void to_json(nlohmann::json& j, const ThesisContent& t);
void from_json(const nlohmann::json& j, ThesisContent& t);

}  // namespace eqr::agents
