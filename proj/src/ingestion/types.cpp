#include "eqr/ingestion/types.hpp"

#include <array>
#include <utility>

namespace eqr::ingestion {

namespace {

constexpr std::array<std::pair<SourceKind, std::string_view>, 6> kKindNames{{
    {SourceKind::SecFiling, "SecFiling"},
    {SourceKind::EquityResearchReport, "EquityResearchReport"},
    {SourceKind::CorporateRelease, "CorporateRelease"},
    {SourceKind::EarningsCallTranscript, "EarningsCallTranscript"},
    {SourceKind::AlternativeData, "AlternativeData"},
    {SourceKind::Fixture, "Fixture"},
}};

constexpr std::array<std::pair<LineItem, std::string_view>, 9> kItemNames{{
    {LineItem::Revenue, "revenue"},
    {LineItem::OperatingExpense, "operating_expense"},
    {LineItem::Sga, "sga"},
    {LineItem::DepreciationAmortization, "depreciation_amortization"},
    {LineItem::NetDebt, "net_debt"},
    {LineItem::SharesOutstanding, "shares_outstanding"},
    {LineItem::TaxRate, "tax_rate"},
    {LineItem::InvestedCapital, "invested_capital"},
    {LineItem::Nopat, "nopat"},
}};

}  // namespace

std::string_view to_string(SourceKind kind) {
    for (const auto& [k, name] : kKindNames)
        if (k == kind) return name;
    return "Fixture";
}

std::optional<SourceKind> parse_source_kind(std::string_view text) {
    for (const auto& [k, name] : kKindNames)
        if (name == text) return k;
    return std::nullopt;
}

std::string_view to_string(LineItem item) {
    for (const auto& [k, name] : kItemNames)
        if (k == item) return name;
    return "revenue";
}

std::optional<LineItem> parse_line_item(std::string_view text) {
    for (const auto& [k, name] : kItemNames)
        if (name == text) return k;
    return std::nullopt;
}

std::optional<double> FinancialPeriod::get(LineItem item) const {
    switch (item) {
        case LineItem::Revenue: return revenue;
        case LineItem::OperatingExpense: return operating_expense;
        case LineItem::Sga: return sga;
        case LineItem::DepreciationAmortization: return depreciation_amortization;
        case LineItem::NetDebt: return net_debt;
        case LineItem::SharesOutstanding: return shares_outstanding;
        case LineItem::TaxRate: return tax_rate;
        case LineItem::InvestedCapital: return invested_capital;
        case LineItem::Nopat: return nopat;
    }
    return std::nullopt;
}

void FinancialPeriod::set(LineItem item, double value) {
    switch (item) {
        case LineItem::Revenue: revenue = value; break;
        case LineItem::OperatingExpense: operating_expense = value; break;
        case LineItem::Sga: sga = value; break;
        case LineItem::DepreciationAmortization: depreciation_amortization = value; break;
        case LineItem::NetDebt: net_debt = value; break;
        case LineItem::SharesOutstanding: shares_outstanding = value; break;
        case LineItem::TaxRate: tax_rate = value; break;
        case LineItem::InvestedCapital: invested_capital = value; break;
        case LineItem::Nopat: nopat = value; break;
    }
}

const FinancialPeriod* CompanyFinancials::find(std::string_view period) const {
    for (const auto& p : periods)
        if (p.period == period) return &p;
    return nullptr;
}

}  // namespace eqr::ingestion
