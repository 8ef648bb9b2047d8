#pragma once

#include "eqr/agents/agents.hpp"
#include "eqr/ingestion/types.hpp"
#include "eqr/metrics/metrics.hpp"
#include "eqr/valuation/valuation.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eqr::report {

enum class SectionId {
    CompanyOverview,
    InvestmentThesis,
    FinancialProjections,
    Valuation,
    RiskAnalysis,
    CompetitorAnalysis,
};

inline constexpr std::array<SectionId, 6> kSchema{
    SectionId::CompanyOverview, SectionId::InvestmentThesis, SectionId::FinancialProjections,
    SectionId::Valuation,       SectionId::RiskAnalysis,     SectionId::CompetitorAnalysis,
};

std::string_view to_string(SectionId id);  // "company_overview", ...
std::optional<SectionId> parse_section_id(std::string_view text);
std::string_view section_title(SectionId id);  // "Company Overview", ...

/// Column or row format names: "text", "percent", "millions", "per_share",
/// "multiple", "decimal3", or "by_row" (the row_format entry applies).
struct RenderedTable {
    std::string title;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> number_format;  // one per column
    std::vector<std::string> row_format;     // one per row when any column is "by_row"

    bool rectangular() const;
    bool operator==(const RenderedTable&) const = default;
};

enum class BlockKind {
    Narrative,  // prose subject to the fact audit
    Notes,      // engine bookkeeping, rendered as a list, not audited
    Table,      // reference into ReportDocument::tables
};

struct Block {
    BlockKind kind = BlockKind::Narrative;
    std::string text;
    std::size_t table = 0;

    bool operator==(const Block&) const = default;
};

struct Section {
    SectionId id = SectionId::CompanyOverview;
    std::string title;
    std::vector<Block> blocks;

    bool operator==(const Section&) const = default;
};

struct RatingBox {
    valuation::Rating rating = valuation::Rating::Hold;
    double target_price = 0.0;
    double current_price = 0.0;

    bool operator==(const RatingBox&) const = default;
};

struct ReportMetadata {
    std::string engine_version;
    std::string config_hash;
    std::string provider;

    bool operator==(const ReportMetadata&) const = default;
};

struct ReportDocument {
    std::string ticker;
    std::string company_name;
    std::string currency = "USD";
    std::string as_of;  // YYYY-MM-DD
    std::vector<Section> sections;
    std::vector<RenderedTable> tables;
    RatingBox rating_box;
    ReportMetadata metadata;

    const Section* section(SectionId id) const;
    const RenderedTable* table(std::string_view title) const;
    bool operator==(const ReportDocument&) const = default;
};

/// Inputs are borrowed; a null pointer means the input is unavailable.
struct ReportInputs {
    const ingestion::CompanyFinancials* financials = nullptr;
    const metrics::MetricTable* table = nullptr;
    const std::vector<ingestion::FinancialPeriod>* projections = nullptr;
    const valuation::ValuationSummary* valuation = nullptr;
    const valuation::DcfSchedule* schedule = nullptr;  // optional
    const std::vector<agents::Insight>* insights = nullptr;
    const agents::CompetitorBenchmark* benchmark = nullptr;
    const agents::ThesisContent* thesis = nullptr;
    std::string as_of;
    ReportMetadata metadata;
};

inline constexpr std::string_view kProjectionsTableTitle = "Financial projections";
inline constexpr std::string_view kPeerTableTitle = "Peer comparison";
inline constexpr std::string_view kDcfTableTitle = "Discounted cash flow";

/// Metrics shown in the projections table, in row order.
inline constexpr std::array<std::string_view, 6> kProjectionRows{
    "revenue", "revenue_growth", "ebitda", "ebitda_margin", "contribution_margin", "sga_margin",
};

/// Fills the six sections in schema order. Throws MissingSection naming the
/// first section whose inputs are absent or unusable (detail "section").
ReportDocument assemble_report(const ReportInputs& inputs);

/// Metric table over historical plus projected periods; the projections
/// table is built from it.
metrics::MetricTable extended_metric_table(const ingestion::CompanyFinancials& fin,
                                           const std::vector<ingestion::FinancialPeriod>& projections);

// ---- fact audit -------------------------------------------------------------

enum class LiteralKind { Percent, Millions, PerShare, Multiple, Plain };

struct NumericLiteral {
    std::string text;  // as it appears, without surrounding punctuation
    double value = 0.0;
    int decimals = 0;
    LiteralKind kind = LiteralKind::Plain;
};

/// Numeric tokens of a text: optional sign, optional "$", digits with
/// optional comma grouping and decimals, optional "%", "M" or "x" suffix.
/// Words with embedded digits (FY2023, wm-10k) and bare years are skipped.
struct LocatedLiteral {
    NumericLiteral literal;
    std::size_t offset = 0;
};
std::vector<LocatedLiteral> find_numeric_literals(std::string_view text);
std::optional<NumericLiteral> parse_numeric_literal(std::string_view token);

enum class SourceUnit {
    Fraction,      // 0.25 matches "25.0%"
    PercentUnits,  // 25.0 matches "25.0%"
    Currency,      // base units; 2.5e7 matches "$25.0M"
    PerShare,
    Multiple,
    Count,
};

struct SourceValue {
    std::string label;
    double value = 0.0;
    SourceUnit unit = SourceUnit::Count;
};

struct Claim {
    std::string literal;
    std::optional<std::string> matched;  // source label; nullopt is an unmatched claim
    std::string location;                // "<section id>#<block index>@<byte offset>"
};

struct FactAudit {
    std::vector<Claim> claims;
    bool passed() const;
    std::vector<const Claim*> failures() const;
};

std::vector<SourceValue> sources_from(const metrics::MetricTable& table, const valuation::ValuationSummary& valuation);
/// Numeric cells of the document's own tables, which assembly derives from the inputs.
std::vector<SourceValue> sources_from_tables(const ReportDocument& doc);

/// True when `source` rounds to `literal` at the literal's displayed precision.
bool matches(const NumericLiteral& literal, const SourceValue& source);

/// Checks every literal in narrative blocks against table cells, projections,
/// valuation fields and the document's tables.
FactAudit audit_facts(const ReportDocument& doc, const metrics::MetricTable& table,
                      const valuation::ValuationSummary& valuation);
FactAudit audit_facts(const ReportDocument& doc, const std::vector<SourceValue>& sources);

// ---- rendering --------------------------------------------------------------

enum class Format { Markdown, Html };
std::optional<Format> parse_format(std::string_view text);
std::string_view extension(Format format);  // "md", "html"

std::string render(const ReportDocument& doc, Format format);
/// Throws UnsupportedFormat for anything but "markdown"/"md" and "html".
std::string render(const ReportDocument& doc, std::string_view format);

/// Structure recovered from rendered markdown.
struct ParsedTable {
    std::string title;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};
struct ParsedSection {
    std::string title;
    std::vector<ParsedTable> tables;
};
struct ParsedMarkdown {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<ParsedSection> sections;
};
ParsedMarkdown parse_markdown(std::string_view markdown);

}  // namespace eqr::report
