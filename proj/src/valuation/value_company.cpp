#include "eqr/common/error.hpp"
#include "eqr/valuation/valuation.hpp"

#include <fmt/format.h>

namespace eqr::valuation {

namespace {

std::string num(double v) { return metrics::format_value(v, metrics::Unit::Fraction); }

}  // namespace

ValuationResult value_company(const ingestion::CompanyFinancials& fin, const metrics::MetricTable& table,
                              const std::vector<ingestion::FinancialPeriod>& projections,
                              const ValuationConfig& config) {
    using metrics::MetricName;
    if (fin.periods.empty()) throw Error(ErrorCode::MissingInput, "no historical periods to value");
    if (projections.empty()) throw Error(ErrorCode::MissingProjectionBasis, "no projected periods");
    const auto& latest = fin.latest();

    const auto* latest_ebitda = table.find(MetricName::Ebitda, latest.period);
    if (!latest_ebitda) throw Error(ErrorCode::MissingInput, "latest period has no EBITDA");
    if (!latest.net_debt) {
        throw Error(ErrorCode::MissingInput, "latest period lacks net_debt", {{"period", latest.period}});
    }
    if (!latest.shares_outstanding) {
        throw Error(ErrorCode::MissingInput, "latest period lacks shares_outstanding", {{"period", latest.period}});
    }

    ValuationResult result;
    WaccInputs wacc_inputs = config.wacc;
    if (config.tax_rate_from_financials) {
        if (!latest.tax_rate) {
            throw Error(ErrorCode::MissingInput, "latest period lacks tax_rate", {{"period", latest.period}});
        }
        wacc_inputs.tax_rate = *latest.tax_rate;
    }
    const double cost_of_capital = wacc(wacc_inputs);

    DcfAssumptions& a = result.assumptions;
    a.horizon_years = static_cast<int>(projections.size());
    a.terminal_growth = config.terminal_growth;
    a.capital_intensity = config.capital_intensity;
    a.discount_rate = config.discount_rate.value_or(cost_of_capital);
    double previous_revenue = latest.revenue;
    for (const auto& p : projections) {
        a.revenue_growth_path.push_back(metrics::revenue_growth(p.revenue, previous_revenue));
        const double cp = metrics::contribution_profit(p.revenue, p.operating_expense);
        a.margin_path.push_back(metrics::ebitda_margin(metrics::ebitda(cp, p.sga), p.revenue));
        previous_revenue = p.revenue;
    }
    if (const auto* m = table.find(MetricName::EbitdaMargin, latest.period); m && m->value > 0.0) {
        a.base_margin = m->value;
    }

    result.base_fcf = latest_ebitda->value * config.capital_intensity;
    const double ev = dcf_enterprise_value(result.base_fcf, a);

    DcfSchedule& s = result.schedule;
    const auto flows = forecast_cash_flows(result.base_fcf, a);
    double discount = 1.0;
    for (std::size_t t = 0; t < flows.size(); ++t) {
        discount *= 1.0 + a.discount_rate;
        s.periods.push_back(projections[t].period);
        s.free_cash_flow.push_back(flows[t]);
        s.discount_factor.push_back(1.0 / discount);
        s.present_value.push_back(flows[t] / discount);
    }
    s.terminal_value = flows.back() * (1.0 + a.terminal_growth) / (a.discount_rate - a.terminal_growth);
    s.terminal_present_value = s.terminal_value / discount;

    ValuationSummary& v = result.summary;
    v.current_price = config.current_price;
    v.enterprise_value = ev;
    v.equity_value = ev - *latest.net_debt;
    v.wacc = cost_of_capital;
    const TargetPrice tp = target_price(ev, *latest.net_debt, *latest.shares_outstanding);
    v.target_price = tp.price;
    v.negative_equity = tp.negative_equity;
    v.rating = assign_rating(v.target_price, v.current_price, config.thresholds);
    if (latest.nopat && latest.invested_capital && *latest.invested_capital != 0.0) {
        v.roic = roic(*latest.nopat, *latest.invested_capital);
    }
    if (latest_ebitda->value != 0.0) v.enterprise_multiple = metrics::enterprise_multiple(ev, latest_ebitda->value);

    auto& notes = v.method_notes;
    notes.push_back(fmt::format("valuation basis period: {}", latest.period));
    notes.push_back(fmt::format("wacc inputs: equity_value={} debt_value={} cost_of_equity={} cost_of_debt={} "
                                "tax_rate={}{}",
                                num(wacc_inputs.equity_value), num(wacc_inputs.debt_value),
                                num(wacc_inputs.cost_of_equity), num(wacc_inputs.cost_of_debt),
                                num(wacc_inputs.tax_rate),
                                config.tax_rate_from_financials ? " (from financials)" : ""));
    notes.push_back(fmt::format("discount_rate={}{}", num(a.discount_rate),
                                config.discount_rate ? " (configured)" : " (wacc)"));
    notes.push_back(fmt::format("horizon_years={} terminal_growth={} capital_intensity={}", a.horizon_years,
                                num(a.terminal_growth), num(a.capital_intensity)));
    std::string growth = "revenue_growth_path=";
    std::string margin = "ebitda_margin_path=";
    for (std::size_t i = 0; i < a.revenue_growth_path.size(); ++i) {
        growth += (i ? "," : "") + num(a.revenue_growth_path[i]);
        margin += (i ? "," : "") + num(a.margin_path[i]);
    }
    notes.push_back(growth);
    notes.push_back(margin);
    notes.push_back(a.base_margin ? "base_margin=" + num(*a.base_margin) : "base_margin=unset (growth only)");
    notes.push_back("free cash flow = EBITDA x capital_intensity; terminal value by Gordon growth");
    notes.push_back(fmt::format("rating thresholds: buy>={} sell<={}", num(config.thresholds.buy),
                                num(config.thresholds.sell)));
    if (v.negative_equity) notes.push_back("implied equity negative: target price floored at zero");
    return result;
}

}  // namespace eqr::valuation
