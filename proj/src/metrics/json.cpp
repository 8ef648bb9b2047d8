#include "eqr/metrics/json.hpp"

#include "eqr/common/error.hpp"

namespace eqr::metrics {

using nlohmann::json;

void to_json(json& j, const MetricValue& v) {
    j = json{{"name", std::string(to_string(v.name))},
             {"period", v.period},
             {"value", v.value},
             {"unit", std::string(to_string(v.unit))},
             {"not_meaningful", v.not_meaningful}};
}

void from_json(const json& j, MetricValue& v) {
    const auto name = parse_metric_name(j.at("name").get<std::string>());
    const auto unit = parse_unit(j.at("unit").get<std::string>());
    if (!name || !unit) throw Error(ErrorCode::MalformedResponse, "unknown metric name or unit in serialized table");
    v.name = *name;
    v.unit = *unit;
    v.period = j.at("period").get<std::string>();
    v.value = j.at("value").get<double>();
    v.not_meaningful = j.at("not_meaningful").get<bool>();
}

void to_json(json& j, const MetricTable& t) {
    json rows = json::array();
    for (const auto& [key, v] : t.rows) rows.push_back(v);
    json projections = json::array();
    for (const auto& [key, v] : t.projections) projections.push_back(v);
    j = json{{"ticker", t.ticker},
             {"periods", t.periods},
             {"rows", rows},
             {"projections", projections},
             {"projection_basis", t.projection_basis}};
}

void from_json(const json& j, MetricTable& t) {
    t = MetricTable{};
    t.ticker = j.at("ticker").get<std::string>();
    t.periods = j.at("periods").get<std::vector<std::string>>();
    for (const auto& r : j.at("rows")) {
        auto v = r.get<MetricValue>();
        t.rows[{v.name, v.period}] = v;
    }
    for (const auto& r : j.at("projections")) {
        auto v = r.get<MetricValue>();
        t.projections[v.name] = v;
    }
    t.projection_basis = j.at("projection_basis").get<std::string>();
}

void to_json(json& j, const FlaggedValue& v) { j = json{{"value", v.value}, {"not_meaningful", v.not_meaningful}}; }

void from_json(const json& j, FlaggedValue& v) {
    v.value = j.at("value").get<double>();
    v.not_meaningful = j.at("not_meaningful").get<bool>();
}

}  // namespace eqr::metrics
