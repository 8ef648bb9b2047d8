#include "eqr/valuation/valuation.hpp"

#include "eqr/common/error.hpp"
#include "eqr/common/period.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace eqr::valuation {

namespace {

// Ratio comparisons at the rating boundaries tolerate rounding noise so that
// scaling target and current by the same factor never flips a rating.
constexpr double kBoundaryTolerance = 1e-12;

bool finite_all(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

std::string_view to_string(Rating rating) {
    switch (rating) {
        case Rating::Buy: return "Buy";
        case Rating::Hold: return "Hold";
        case Rating::Sell: return "Sell";
    }
    return "Hold";
}

std::optional<Rating> parse_rating(std::string_view text) {
    auto same = [](std::string_view a, std::string_view b) {
        return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
                   return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
               });
    };
    for (Rating r : {Rating::Buy, Rating::Hold, Rating::Sell})
        if (same(to_string(r), text)) return r;
    return std::nullopt;
}

bool ValuationSummary::operator==(const ValuationSummary& o) const {
    auto same_multiple = [](const std::optional<metrics::FlaggedValue>& a,
                            const std::optional<metrics::FlaggedValue>& b) {
        if (a.has_value() != b.has_value()) return false;
        return !a || (a->value == b->value && a->not_meaningful == b->not_meaningful);
    };
    return target_price == o.target_price && current_price == o.current_price && rating == o.rating &&
           enterprise_value == o.enterprise_value && equity_value == o.equity_value && wacc == o.wacc &&
           roic == o.roic && same_multiple(enterprise_multiple, o.enterprise_multiple) &&
           negative_equity == o.negative_equity && method_notes == o.method_notes;
}

double roic(double nopat, double invested_capital) {
    if (invested_capital == 0.0) throw Error(ErrorCode::DivisionByZero, "roic: invested capital is zero");
    return nopat / invested_capital;
}

double wacc(const WaccInputs& in) {
    const double capital = in.equity_value + in.debt_value;
    if (capital == 0.0) throw Error(ErrorCode::ZeroCapital, "wacc: equity plus debt is zero");
    if (in.equity_value < 0 || in.debt_value < 0 || capital < 0) {
        throw Error(ErrorCode::InvalidArgument, "wacc: capital values must be non-negative");
    }
    for (double r : {in.cost_of_equity, in.cost_of_debt}) {
        if (!std::isfinite(r) || r < 0) throw Error(ErrorCode::InvalidArgument, "wacc: rates must be finite and >= 0");
    }
    if (!(in.tax_rate >= 0.0 && in.tax_rate <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "wacc: tax rate outside [0, 1]");
    }
    const double we = in.equity_value / capital;
    const double wd = in.debt_value / capital;
    return we * in.cost_of_equity + wd * in.cost_of_debt * (1.0 - in.tax_rate);
}

std::vector<ingestion::FinancialPeriod> project_financials(const ingestion::CompanyFinancials& fin,
                                                           const metrics::MetricTable& table, int horizon_years) {
    if (horizon_years < 1 || horizon_years > 10) {
        throw Error(ErrorCode::InvalidArgument, "horizon_years must be within [1, 10]",
                    {{"horizon_years", std::to_string(horizon_years)}});
    }
    if (fin.periods.size() < 2) {
        throw Error(ErrorCode::MissingProjectionBasis, "at least two historical periods are required");
    }
    const auto* growth = table.projection(metrics::MetricName::RevenueGrowthProjection);
    const auto* margin = table.projection(metrics::MetricName::ContributionMarginProjection);
    if (!growth || !margin) {
        throw Error(ErrorCode::MissingProjectionBasis, "metric table lacks growth or margin projections");
    }
    const auto& latest = fin.latest();
    const auto* sga_m = table.find(metrics::MetricName::SgaMargin, latest.period);
    if (!sga_m) throw Error(ErrorCode::MissingProjectionBasis, "latest period has no SG&A margin");

    auto key = parse_period(latest.period);
    if (!key) throw Error(ErrorCode::MissingProjectionBasis, "latest period label is not parseable");

    std::vector<ingestion::FinancialPeriod> out;
    double revenue = latest.revenue;
    for (int year = 0; year < horizon_years; ++year) {
        *key = next_period(*key);
        revenue = revenue * (1.0 + growth->value);
        ingestion::FinancialPeriod p;
        p.period = key->label();
        p.revenue = revenue;
        p.operating_expense = revenue * (1.0 - margin->value);
        p.sga = revenue * sga_m->value;
        out.push_back(p);
    }
    return out;
}

void validate(const DcfAssumptions& a) {
    if (a.horizon_years < 1 || a.horizon_years > 10) {
        throw Error(ErrorCode::InvalidArgument, "horizon_years must be within [1, 10]");
    }
    if (a.revenue_growth_path.size() != static_cast<std::size_t>(a.horizon_years) ||
        a.margin_path.size() != static_cast<std::size_t>(a.horizon_years)) {
        throw Error(ErrorCode::InvalidArgument, "growth and margin paths must have horizon_years entries");
    }
    if (!finite_all(a.revenue_growth_path) || !finite_all(a.margin_path) || !std::isfinite(a.terminal_growth) ||
        !std::isfinite(a.discount_rate)) {
        throw Error(ErrorCode::InvalidArgument, "assumption values must be finite");
    }
    if (a.base_margin && !(*a.base_margin > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "base_margin must be positive when set");
    }
    if (a.discount_rate <= a.terminal_growth) {
        throw Error(ErrorCode::NonConvergent, "discount rate must exceed terminal growth");
    }
}

std::vector<double> forecast_cash_flows(double base_fcf, const DcfAssumptions& a) {
    validate(a);
    std::vector<double> flows;
    double grown = base_fcf;
    for (int t = 0; t < a.horizon_years; ++t) {
        grown *= 1.0 + a.revenue_growth_path[static_cast<std::size_t>(t)];
        const double margin_factor =
            a.base_margin ? a.margin_path[static_cast<std::size_t>(t)] / *a.base_margin : 1.0;
        flows.push_back(grown * margin_factor);
    }
    return flows;
}

double dcf_enterprise_value(double base_fcf, const DcfAssumptions& a) {
    if (!std::isfinite(base_fcf)) throw Error(ErrorCode::InvalidArgument, "base_fcf must be finite");
    const std::vector<double> flows = forecast_cash_flows(base_fcf, a);
    const double r = a.discount_rate;
    double value = 0.0;
    double discount = 1.0;
    for (double fcf : flows) {
        discount *= 1.0 + r;
        value += fcf / discount;
    }
    const double terminal = flows.back() * (1.0 + a.terminal_growth) / (r - a.terminal_growth);
    return value + terminal / discount;
}

TargetPrice target_price(double enterprise_value, double net_debt, double shares) {
    if (shares == 0.0) throw Error(ErrorCode::ZeroShares, "share count is zero");
    if (shares < 0.0) throw Error(ErrorCode::InvalidArgument, "share count is negative");
    const double equity = enterprise_value - net_debt;
    if (equity < 0.0) return TargetPrice{0.0, true};
    return TargetPrice{equity / shares, false};
}

Rating assign_rating(double target, double current, const RatingThresholds& thresholds) {
    if (current == 0.0) throw Error(ErrorCode::ZeroPrice, "current price is zero");
    if (current < 0.0) throw Error(ErrorCode::InvalidArgument, "current price is negative");
    const double ratio = target / current;
    if (ratio >= thresholds.buy * (1.0 - kBoundaryTolerance)) return Rating::Buy;
    if (ratio <= thresholds.sell * (1.0 + kBoundaryTolerance)) return Rating::Sell;
    return Rating::Hold;
}

}  // namespace eqr::valuation
