#pragma once

#include "eqr/ingestion/types.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace eqr::metrics {

enum class MetricName {
    RevenueGrowth,
    RevenueGrowthProjection,
    ContributionProfit,
    ContributionMargin,
    ContributionMarginProjection,
    SgaMargin,
    Ebitda,
    EbitdaMargin,
    Cagr,
    EnterpriseMultiple,
};

inline constexpr std::array<MetricName, 10> kVocabulary{
    MetricName::RevenueGrowth,      MetricName::RevenueGrowthProjection,
    MetricName::ContributionProfit, MetricName::ContributionMargin,
    MetricName::ContributionMarginProjection, MetricName::SgaMargin,
    MetricName::Ebitda,             MetricName::EbitdaMargin,
    MetricName::Cagr,               MetricName::EnterpriseMultiple,
};

enum class Unit { Currency, Fraction, Multiple, Percent };

std::string_view to_string(MetricName name);
std::optional<MetricName> parse_metric_name(std::string_view text);
std::string_view to_string(Unit unit);
std::optional<Unit> parse_unit(std::string_view text);
Unit unit_of(MetricName name);

struct MetricValue {
    MetricName name = MetricName::RevenueGrowth;
    std::string period;
    double value = 0.0;
    Unit unit = Unit::Fraction;
    bool not_meaningful = false;

    bool operator==(const MetricValue&) const = default;
};

// Single-formula operations. Inputs are base currency units or fractions.

/// (current - previous) / previous. Throws DivisionByZero or NegativePrevious.
double revenue_growth(double current, double previous);
/// previous_growth + 0.01 (one percentage point, additive).
double revenue_growth_projection(double previous_growth);
double contribution_profit(double revenue, double operating_expense);
/// Throws DivisionByZero when revenue == 0.
double contribution_margin(double contribution_profit, double revenue);
/// previous_margin + 0.005 (half a percentage point, additive).
double contribution_margin_projection(double previous_margin);
double sga_margin(double sga, double revenue);
double ebitda(double contribution_profit, double sga);
double ebitda_margin(double ebitda, double revenue);
/// ((ending / beginning)^(1/years) - 1) * 100, in percent units.
/// Throws NonPositiveInput or ZeroYears.
double cagr(double ending_value, double beginning_value, int years);

struct FlaggedValue {
    double value = 0.0;
    bool not_meaningful = false;
};
/// enterprise_value / ebitda; negative EBITDA is flagged not meaningful.
FlaggedValue enterprise_multiple(double enterprise_value, double ebitda);

/// Per-period metric rows plus next-period projections for one company.
struct MetricTable {
    std::string ticker;
    std::vector<std::string> periods;  // historical, chronological
    std::map<std::pair<MetricName, std::string>, MetricValue> rows;
    std::map<MetricName, MetricValue> projections;
    std::string projection_basis;  // latest historical period when projections exist

    const MetricValue* find(MetricName name, const std::string& period) const;
    const MetricValue* projection(MetricName name) const;
    bool empty() const { return rows.empty(); }

    bool operator==(const MetricTable&) const = default;
};

/// Every computable (metric, period) cell. Growth needs a previous period
/// with positive revenue; margins need positive revenue; projections and
/// CAGR need at least two periods. Cells with unmet preconditions are
/// omitted, never defaulted.
MetricTable build_metric_table(const ingestion::CompanyFinancials& fin);

/// "metric,period,value,unit" lines in vocabulary then chronological order.
/// Currency prints as an integer when integral, otherwise two decimals;
/// other units print six significant digits.
std::string serialize(const MetricTable& table);

/// Value formatting used by serialize().
std::string format_value(double value, Unit unit);

}  // namespace eqr::metrics
