#include "eqr/valuation/json.hpp"

#include "eqr/common/error.hpp"
#include "eqr/metrics/json.hpp"

namespace eqr::valuation {

using nlohmann::json;

void to_json(json& j, const ValuationSummary& v) {
    j = json{{"target_price", v.target_price},   {"current_price", v.current_price},
             {"rating", std::string(to_string(v.rating))},
             {"enterprise_value", v.enterprise_value}, {"equity_value", v.equity_value},
             {"wacc", v.wacc},                   {"negative_equity", v.negative_equity},
             {"method_notes", v.method_notes}};
    j["roic"] = v.roic ? json(*v.roic) : json(nullptr);
    j["enterprise_multiple"] = v.enterprise_multiple ? json(*v.enterprise_multiple) : json(nullptr);
}

void from_json(const json& j, ValuationSummary& v) {
    v = ValuationSummary{};
    v.target_price = j.at("target_price").get<double>();
    v.current_price = j.at("current_price").get<double>();
    const auto rating = parse_rating(j.at("rating").get<std::string>());
    if (!rating) throw Error(ErrorCode::MalformedResponse, "unknown rating in serialized valuation");
    v.rating = *rating;
    v.enterprise_value = j.at("enterprise_value").get<double>();
    v.equity_value = j.at("equity_value").get<double>();
    v.wacc = j.at("wacc").get<double>();
    v.negative_equity = j.at("negative_equity").get<bool>();
    v.method_notes = j.at("method_notes").get<std::vector<std::string>>();
    if (!j.at("roic").is_null()) v.roic = j.at("roic").get<double>();
    if (!j.at("enterprise_multiple").is_null()) v.enterprise_multiple = j.at("enterprise_multiple").get<metrics::FlaggedValue>();
}

void to_json(json& j, const DcfAssumptions& a) {
    j = json{{"horizon_years", a.horizon_years},         {"revenue_growth_path", a.revenue_growth_path},
             {"margin_path", a.margin_path},             {"terminal_growth", a.terminal_growth},
             {"discount_rate", a.discount_rate},         {"capital_intensity", a.capital_intensity}};
    j["base_margin"] = a.base_margin ? json(*a.base_margin) : json(nullptr);
}

void from_json(const json& j, DcfAssumptions& a) {
    a = DcfAssumptions{};
    a.horizon_years = j.at("horizon_years").get<int>();
    a.revenue_growth_path = j.at("revenue_growth_path").get<std::vector<double>>();
    a.margin_path = j.at("margin_path").get<std::vector<double>>();
    a.terminal_growth = j.at("terminal_growth").get<double>();
    a.discount_rate = j.at("discount_rate").get<double>();
    a.capital_intensity = j.at("capital_intensity").get<double>();
    if (!j.at("base_margin").is_null()) a.base_margin = j.at("base_margin").get<double>();
}

void to_json(json& j, const DcfSchedule& s) {
    j = json{{"periods", s.periods},
             {"free_cash_flow", s.free_cash_flow},
             {"discount_factor", s.discount_factor},
             {"present_value", s.present_value},
             {"terminal_value", s.terminal_value},
             {"terminal_present_value", s.terminal_present_value}};
}

void from_json(const json& j, DcfSchedule& s) {
    s.periods = j.at("periods").get<std::vector<std::string>>();
    s.free_cash_flow = j.at("free_cash_flow").get<std::vector<double>>();
    s.discount_factor = j.at("discount_factor").get<std::vector<double>>();
    s.present_value = j.at("present_value").get<std::vector<double>>();
    s.terminal_value = j.at("terminal_value").get<double>();
    s.terminal_present_value = j.at("terminal_present_value").get<double>();
}

void to_json(json& j, const ValuationResult& r) {
    j = json{{"summary", r.summary}, {"assumptions", r.assumptions}, {"schedule", r.schedule}, {"base_fcf", r.base_fcf}};
}

void from_json(const json& j, ValuationResult& r) {
    r.summary = j.at("summary").get<ValuationSummary>();
    r.assumptions = j.at("assumptions").get<DcfAssumptions>();
    r.schedule = j.at("schedule").get<DcfSchedule>();
    r.base_fcf = j.at("base_fcf").get<double>();
}

}  // namespace eqr::valuation
