#include "eqr/metrics/metrics.hpp"

#include "eqr/common/error.hpp"
#include "eqr/common/period.hpp"

#include <fmt/format.h>

#include <cmath>

namespace eqr::metrics {

namespace {

constexpr std::array<std::pair<MetricName, std::string_view>, 10> kNames{{
    {MetricName::RevenueGrowth, "revenue_growth"},
    {MetricName::RevenueGrowthProjection, "revenue_growth_projection"},
    {MetricName::ContributionProfit, "contribution_profit"},
    {MetricName::ContributionMargin, "contribution_margin"},
    {MetricName::ContributionMarginProjection, "contribution_margin_projection"},
    {MetricName::SgaMargin, "sga_margin"},
    {MetricName::Ebitda, "ebitda"},
    {MetricName::EbitdaMargin, "ebitda_margin"},
    {MetricName::Cagr, "cagr"},
    {MetricName::EnterpriseMultiple, "enterprise_multiple"},
}};

double checked_ratio(double numerator, double denominator, const char* what) {
    if (denominator == 0.0) throw Error(ErrorCode::DivisionByZero, std::string(what) + ": denominator is zero");
    return numerator / denominator;
}

}  // namespace

std::string_view to_string(MetricName name) {
    for (const auto& [n, s] : kNames)
        if (n == name) return s;
    return "unknown";
}

std::optional<MetricName> parse_metric_name(std::string_view text) {
    for (const auto& [n, s] : kNames)
        if (s == text) return n;
    return std::nullopt;
}

std::string_view to_string(Unit unit) {
    switch (unit) {
        case Unit::Currency: return "currency";
        case Unit::Fraction: return "fraction";
        case Unit::Multiple: return "multiple";
        case Unit::Percent: return "percent";
    }
    return "fraction";
}

std::optional<Unit> parse_unit(std::string_view text) {
    for (Unit u : {Unit::Currency, Unit::Fraction, Unit::Multiple, Unit::Percent})
        if (to_string(u) == text) return u;
    return std::nullopt;
}

Unit unit_of(MetricName name) {
    switch (name) {
        case MetricName::ContributionProfit:
        case MetricName::Ebitda: return Unit::Currency;
        case MetricName::Cagr: return Unit::Percent;
        case MetricName::EnterpriseMultiple: return Unit::Multiple;
        default: return Unit::Fraction;
    }
}

double revenue_growth(double current, double previous) {
    if (previous == 0.0) throw Error(ErrorCode::DivisionByZero, "revenue_growth: previous revenue is zero");
    if (previous < 0.0) throw Error(ErrorCode::NegativePrevious, "revenue_growth: previous revenue is negative");
    return (current - previous) / previous;
}

double revenue_growth_projection(double previous_growth) { return previous_growth + 0.01; }

double contribution_profit(double revenue, double operating_expense) { return revenue - operating_expense; }

double contribution_margin(double contribution_profit, double revenue) {
    return checked_ratio(contribution_profit, revenue, "contribution_margin");
}

double contribution_margin_projection(double previous_margin) { return previous_margin + 0.005; }

double sga_margin(double sga, double revenue) { return checked_ratio(sga, revenue, "sga_margin"); }

double ebitda(double contribution_profit, double sga) { return contribution_profit - sga; }

double ebitda_margin(double ebitda, double revenue) { return checked_ratio(ebitda, revenue, "ebitda_margin"); }

double cagr(double ending_value, double beginning_value, int years) {
    if (years <= 0) throw Error(ErrorCode::ZeroYears, "cagr: years must be at least 1");
    if (ending_value <= 0.0 || beginning_value <= 0.0) {
        throw Error(ErrorCode::NonPositiveInput, "cagr: values must be positive");
    }
    // expm1 avoids the cancellation in pow(x, 1/n) - 1, so cagr(121, 100, 2) is exactly 10
    return std::expm1(std::log(ending_value / beginning_value) / years) * 100.0;
}

FlaggedValue enterprise_multiple(double enterprise_value, double ebitda) {
    const double v = checked_ratio(enterprise_value, ebitda, "enterprise_multiple");
    return FlaggedValue{v, ebitda < 0.0};
}

const MetricValue* MetricTable::find(MetricName name, const std::string& period) const {
    auto it = rows.find({name, period});
    return it == rows.end() ? nullptr : &it->second;
}

const MetricValue* MetricTable::projection(MetricName name) const {
    auto it = projections.find(name);
    return it == projections.end() ? nullptr : &it->second;
}

MetricTable build_metric_table(const ingestion::CompanyFinancials& fin) {
    MetricTable table;
    table.ticker = fin.ticker;
    auto put = [&](MetricName name, const std::string& period, double value) {
        table.rows[{name, period}] = MetricValue{name, period, value, unit_of(name), false};
    };

    for (std::size_t i = 0; i < fin.periods.size(); ++i) {
        const auto& p = fin.periods[i];
        table.periods.push_back(p.period);
        const double cp = contribution_profit(p.revenue, p.operating_expense);
        const double e = ebitda(cp, p.sga);
        put(MetricName::ContributionProfit, p.period, cp);
        put(MetricName::Ebitda, p.period, e);
        if (p.revenue > 0.0) {
            put(MetricName::ContributionMargin, p.period, contribution_margin(cp, p.revenue));
            put(MetricName::SgaMargin, p.period, sga_margin(p.sga, p.revenue));
            put(MetricName::EbitdaMargin, p.period, ebitda_margin(e, p.revenue));
        }
        if (i > 0 && fin.periods[i - 1].revenue > 0.0) {
            put(MetricName::RevenueGrowth, p.period, revenue_growth(p.revenue, fin.periods[i - 1].revenue));
        }
    }

    if (fin.periods.size() >= 2) {
        const auto& first = fin.periods.front();
        const auto& last = fin.periods.back();
        const auto first_key = parse_period(first.period);
        const auto last_key = parse_period(last.period);
        if (first_key && last_key && first_key->annual() && last_key->annual() && first.revenue > 0.0 &&
            last.revenue > 0.0 && last_key->year > first_key->year) {
            put(MetricName::Cagr, last.period, cagr(last.revenue, first.revenue, last_key->year - first_key->year));
        }

        const std::string next_label = last_key ? next_period(*last_key).label() : last.period + "+1";
        table.projection_basis = last.period;
        if (const auto* g = table.find(MetricName::RevenueGrowth, last.period)) {
            table.projections[MetricName::RevenueGrowthProjection] =
                MetricValue{MetricName::RevenueGrowthProjection, next_label, revenue_growth_projection(g->value),
                            Unit::Fraction, false};
        }
        if (const auto* m = table.find(MetricName::ContributionMargin, last.period)) {
            table.projections[MetricName::ContributionMarginProjection] =
                MetricValue{MetricName::ContributionMarginProjection, next_label,
                            contribution_margin_projection(m->value), Unit::Fraction, false};
        }
        if (table.projections.empty()) table.projection_basis.clear();
    }
    return table;
}

std::string format_value(double value, Unit unit) {
    if (value == 0.0) value = 0.0;  // drop the sign of negative zero
    if (unit == Unit::Currency) {
        if (std::nearbyint(value) == value && std::fabs(value) < 1e15) return fmt::format("{:.0f}", value);
        return fmt::format("{:.2f}", value);
    }
    return fmt::format("{:#.6g}", value);
}

std::string serialize(const MetricTable& table) {
    std::string out = "metric,period,value,unit\n";
    for (MetricName name : kVocabulary) {
        for (const auto& period : table.periods) {
            if (const auto* v = table.find(name, period)) {
                out += fmt::format("{},{},{},{}\n", to_string(name), period, format_value(v->value, v->unit),
                                   to_string(v->unit));
            }
        }
        if (const auto* p = table.projection(name)) {
            out += fmt::format("{},{},{},{}\n", to_string(name), p->period, format_value(p->value, p->unit),
                               to_string(p->unit));
        }
    }
    return out;
}

}  // namespace eqr::metrics
