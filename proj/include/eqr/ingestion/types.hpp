#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace eqr::ingestion {

enum class SourceKind {
    SecFiling,
    EquityResearchReport,
    CorporateRelease,
    EarningsCallTranscript,
    AlternativeData,
    Fixture,
};

std::string_view to_string(SourceKind kind);
std::optional<SourceKind> parse_source_kind(std::string_view text);

/// Media type of statement documents understood by parse_statements.
inline constexpr std::string_view kStatementContentType = "text/x-financial-statement";

struct RawDocument {
    std::string id;
    std::string company;
    SourceKind kind = SourceKind::Fixture;
    std::string period;
    std::string retrieved_at;  // "YYYY-MM-DDTHH:MM:SSZ"
    std::string body;
    std::string content_type;

    bool operator==(const RawDocument&) const = default;
};

/// Fields of FinancialPeriod, used to key provenance and the alias table.
enum class LineItem {
    Revenue,
    OperatingExpense,
    Sga,
    DepreciationAmortization,
    NetDebt,
    SharesOutstanding,
    TaxRate,
    InvestedCapital,
    Nopat,
};

std::string_view to_string(LineItem item);
std::optional<LineItem> parse_line_item(std::string_view text);

/// Where a populated numeric field came from.
struct Provenance {
    std::string doc_id;
    std::size_t offset = 0;  // byte offset of the value text within the document body
    std::size_t length = 0;  // byte length of the value text
    double scale = 1.0;      // multiplier applied to reach base units
    std::string form;        // e.g. "10-K"
    std::string filed;       // filing date, used for precedence
    std::string note;        // e.g. "superseded wm-10k-fy2022"

    bool operator==(const Provenance&) const = default;
};

struct FinancialPeriod {
    std::string period;
    double revenue = 0.0;
    double operating_expense = 0.0;
    double sga = 0.0;
    std::optional<double> depreciation_amortization;
    std::optional<double> net_debt;
    std::optional<double> shares_outstanding;
    std::optional<double> tax_rate;
    std::optional<double> invested_capital;
    std::optional<double> nopat;

    std::optional<double> get(LineItem item) const;
    void set(LineItem item, double value);

    bool operator==(const FinancialPeriod&) const = default;
};

struct CompanyFinancials {
    std::string ticker;
    std::string company_name;
    std::string currency = "USD";
    std::vector<FinancialPeriod> periods;  // chronological
    std::vector<std::string> peers;
    /// Keyed by (period label, line item).
    std::map<std::pair<std::string, LineItem>, Provenance> provenance;

    const FinancialPeriod* find(std::string_view period) const;
    const FinancialPeriod& latest() const { return periods.back(); }

    bool operator==(const CompanyFinancials&) const = default;
};

}  // namespace eqr::ingestion
