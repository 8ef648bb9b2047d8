#pragma once

#include "eqr/ingestion/types.hpp"
#include "eqr/metrics/metrics.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eqr::valuation {

enum class Rating { Buy, Hold, Sell };

std::string_view to_string(Rating rating);
std::optional<Rating> parse_rating(std::string_view text);

struct WaccInputs {
    double equity_value = 0.0;
    double debt_value = 0.0;
    double cost_of_equity = 0.0;
    double cost_of_debt = 0.0;
    double tax_rate = 0.0;
};

struct DcfAssumptions {
    int horizon_years = 5;
    std::vector<double> revenue_growth_path;  // one entry per year
    std::vector<double> margin_path;          // one entry per year
    double terminal_growth = 0.02;
    double discount_rate = 0.08;
    double capital_intensity = 0.6;  // share of EBITDA converted to free cash flow
    /// When set, each year's cash flow is also scaled by margin_path[t] / base_margin.
    std::optional<double> base_margin;
};

struct RatingThresholds {
    double buy = 1.10;   // target / current at or above -> Buy
    double sell = 0.90;  // target / current at or below -> Sell
};

struct TargetPrice {
    double price = 0.0;
    bool negative_equity = false;  // implied equity was negative; price floored at zero
};

struct ValuationSummary {
    double target_price = 0.0;
    double current_price = 0.0;
    Rating rating = Rating::Hold;
    double enterprise_value = 0.0;
    double equity_value = 0.0;
    double wacc = 0.0;
    std::optional<double> roic;
    std::optional<metrics::FlaggedValue> enterprise_multiple;
    bool negative_equity = false;
    std::vector<std::string> method_notes;

    double upside() const { return current_price > 0 ? target_price / current_price - 1.0 : 0.0; }
    bool operator==(const ValuationSummary&) const;
};

/// nopat / invested_capital. Throws DivisionByZero.
double roic(double nopat, double invested_capital);

/// After-tax weighted cost of capital. Throws ZeroCapital or InvalidArgument.
double wacc(const WaccInputs& inputs);

/// Year 1 applies the table's growth and contribution-margin projections;
/// later years hold them constant. SG&A margin stays at the latest
/// historical value. Labels continue the latest period (FY2024E, ...).
/// Throws MissingProjectionBasis or InvalidArgument (horizon outside [1,10]).
std::vector<ingestion::FinancialPeriod> project_financials(const ingestion::CompanyFinancials& fin,
                                                           const metrics::MetricTable& table, int horizon_years);

/// Free cash flow of each forecast year, following the growth path from base_fcf.
std::vector<double> forecast_cash_flows(double base_fcf, const DcfAssumptions& assumptions);

/// Present value of the forecast cash flows plus a Gordon-growth terminal
/// value. Throws NonConvergent when discount_rate <= terminal_growth.
double dcf_enterprise_value(double base_fcf, const DcfAssumptions& assumptions);

/// (enterprise_value - net_debt) / shares, floored at zero with a flag.
TargetPrice target_price(double enterprise_value, double net_debt, double shares);

Rating assign_rating(double target, double current, const RatingThresholds& thresholds = {});

/// Checks the assumption invariants; throws InvalidArgument or NonConvergent.
void validate(const DcfAssumptions& assumptions);

}  // namespace eqr::valuation

namespace eqr::valuation {

struct ValuationConfig {
    double current_price = 0.0;
    WaccInputs wacc;
    /// Overrides wacc.tax_rate with the latest period's effective tax rate when true.
    bool tax_rate_from_financials = false;
    int horizon_years = 5;
    double terminal_growth = 0.025;
    double capital_intensity = 0.6;
    std::optional<double> discount_rate;  // defaults to the computed WACC
    RatingThresholds thresholds;
};

struct DcfSchedule {
    std::vector<std::string> periods;
    std::vector<double> free_cash_flow;
    std::vector<double> discount_factor;
    std::vector<double> present_value;
    double terminal_value = 0.0;
    double terminal_present_value = 0.0;
};

struct ValuationResult {
    ValuationSummary summary;
    DcfAssumptions assumptions;
    DcfSchedule schedule;
    double base_fcf = 0.0;
};

/// Full valuation of the latest period: base free cash flow is latest EBITDA
/// times capital intensity, the growth and margin paths come from the
/// projected periods, and the discount rate defaults to WACC. Net debt and
/// share count must be present in the latest period (MissingInput otherwise).
ValuationResult value_company(const ingestion::CompanyFinancials& fin, const metrics::MetricTable& table,
                              const std::vector<ingestion::FinancialPeriod>& projections,
                              const ValuationConfig& config);

}  // namespace eqr::valuation
