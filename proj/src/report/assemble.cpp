#include "eqr/report/report.hpp"

#include "eqr/common/build_info.hpp"
#include "eqr/common/display.hpp"
#include "eqr/common/error.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace eqr::report {

using metrics::MetricName;

namespace {

constexpr std::array<std::pair<SectionId, std::string_view>, 6> kIds{{
    {SectionId::CompanyOverview, "company_overview"},
    {SectionId::InvestmentThesis, "investment_thesis"},
    {SectionId::FinancialProjections, "financial_projections"},
    {SectionId::Valuation, "valuation"},
    {SectionId::RiskAnalysis, "risk_analysis"},
    {SectionId::CompetitorAnalysis, "competitor_analysis"},
}};

constexpr std::array<std::string_view, 6> kTitles{
    "Company Overview", "Investment Thesis", "Financial Projections",
    "Valuation",        "Risk Analysis",     "Competitor Analysis",
};

[[noreturn]] void missing(SectionId id, const std::string& why) {
    throw Error(ErrorCode::MissingSection, fmt::format("cannot populate {}: {}", to_string(id), why),
                {{"section", std::string(to_string(id))}});
}

// Provider text may carry its own markdown headings; they would break the
// fixed section structure, so heading lines become bold lines.
std::string sanitize(std::string_view text) {
    std::string out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        std::size_t hashes = 0;
        while (hashes < line.size() && line[hashes] == '#') ++hashes;
        if (hashes > 0 && (hashes == line.size() || line[hashes] == ' ')) {
            std::string_view rest = line.substr(hashes);
            while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
            out += rest.empty() ? std::string() : "**" + std::string(rest) + "**";
        } else if (line.rfind("<!--", 0) == 0) {
            out += "\\" + std::string(line);
        } else {
            out += line;
        }
        out += '\n';
        start = end + 1;
    }
    while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) out.pop_back();
    std::size_t lead = 0;
    while (lead < out.size() && out[lead] == '\n') ++lead;
    return out.substr(lead);
}

Block narrative(std::string_view text) { return Block{BlockKind::Narrative, sanitize(text), 0}; }

std::string format_cell(const metrics::MetricValue* v, std::string_view fmt_name, std::string_view currency) {
    if (!v) return "n/a";
    if (fmt_name == "percent") return display::percent(v->value);
    if (fmt_name == "millions") return display::millions(v->value, currency);
    if (fmt_name == "multiple") return display::multiple(v->value, v->not_meaningful);
    return display::grouped(v->value, 1);
}

std::string format_amount(double value, std::string_view fmt_name, std::string_view currency) {
    if (fmt_name == "percent") return display::percent(value);
    if (fmt_name == "millions") return display::millions(value, currency);
    if (fmt_name == "per_share") return display::per_share(value, currency);
    if (fmt_name == "decimal3") return display::grouped(value, 3);
    return display::grouped(value, 1);
}

RenderedTable projections_table(const ingestion::CompanyFinancials& fin,
                                const std::vector<ingestion::FinancialPeriod>& projections) {
    const metrics::MetricTable ext = extended_metric_table(fin, projections);
    RenderedTable t;
    t.title = std::string(kProjectionsTableTitle);
    t.columns.push_back("Metric");
    t.number_format.push_back("text");
    for (const auto& p : ext.periods) {
        t.columns.push_back(p);
        t.number_format.push_back("by_row");
    }
    for (std::string_view row : kProjectionRows) {
        std::vector<std::string> cells{std::string(row)};
        std::string fmt_name;
        if (row == "revenue") {
            fmt_name = "millions";
            std::vector<ingestion::FinancialPeriod> all = fin.periods;
            all.insert(all.end(), projections.begin(), projections.end());
            for (const auto& p : all) cells.push_back(display::millions(p.revenue, fin.currency));
        } else {
            const MetricName name = *metrics::parse_metric_name(row);
            fmt_name = metrics::unit_of(name) == metrics::Unit::Currency ? "millions" : "percent";
            for (const auto& p : ext.periods) cells.push_back(format_cell(ext.find(name, p), fmt_name, fin.currency));
        }
        t.rows.push_back(std::move(cells));
        t.row_format.push_back(fmt_name);
    }
    return t;
}

RenderedTable peer_table(const agents::CompetitorBenchmark& b) {
    RenderedTable t;
    t.title = std::string(kPeerTableTitle) + " (" + b.period + ")";
    t.columns = {"Metric", b.subject};
    t.number_format = {"text", "percent"};
    for (const auto& p : b.peers) {
        t.columns.push_back(p);
        t.number_format.push_back("percent");
    }
    for (MetricName name : agents::kBenchmarkMetrics) {
        const std::string key(metrics::to_string(name));
        auto it = b.metrics.find(key);
        std::vector<std::string> cells{key};
        for (std::size_t c = 1; c < t.columns.size(); ++c) {
            if (it == b.metrics.end() || !it->second.count(t.columns[c])) {
                cells.push_back("n/a");
            } else {
                cells.push_back(display::percent(it->second.at(t.columns[c])));
            }
        }
        t.rows.push_back(std::move(cells));
    }
    return t;
}

RenderedTable dcf_table(const valuation::DcfSchedule& s, std::string_view currency) {
    RenderedTable t;
    t.title = std::string(kDcfTableTitle);
    t.columns = {"Period", "Free cash flow", "Discount factor", "Present value"};
    t.number_format = {"text", "millions", "decimal3", "millions"};
    for (std::size_t i = 0; i < s.periods.size(); ++i) {
        t.rows.push_back({s.periods[i], format_amount(s.free_cash_flow[i], "millions", currency),
                          format_amount(s.discount_factor[i], "decimal3", currency),
                          format_amount(s.present_value[i], "millions", currency)});
    }
    t.rows.push_back({"Terminal", format_amount(s.terminal_value, "millions", currency), "",
                      format_amount(s.terminal_present_value, "millions", currency)});
    return t;
}

std::string insight_text(const agents::Insight& i) { return "**" + i.question + "**\n\n" + i.answer; }

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? std::string(sep) : "") + items[i];
    return out;
}

}  // namespace

std::string_view to_string(SectionId id) {
    for (const auto& [k, name] : kIds)
        if (k == id) return name;
    return "unknown";
}

std::optional<SectionId> parse_section_id(std::string_view text) {
    for (const auto& [k, name] : kIds)
        if (name == text) return k;
    return std::nullopt;
}

std::string_view section_title(SectionId id) { return kTitles[static_cast<std::size_t>(id)]; }

bool RenderedTable::rectangular() const {
    if (number_format.size() != columns.size()) return false;
    for (const auto& r : rows)
        if (r.size() != columns.size()) return false;
    const bool by_row = std::find(number_format.begin(), number_format.end(), "by_row") != number_format.end();
    return !by_row || row_format.size() == rows.size();
}

const Section* ReportDocument::section(SectionId id) const {
    for (const auto& s : sections)
        if (s.id == id) return &s;
    return nullptr;
}

const RenderedTable* ReportDocument::table(std::string_view title) const {
    for (const auto& t : tables)
        if (t.title.rfind(title, 0) == 0) return &t;
    return nullptr;
}

metrics::MetricTable extended_metric_table(const ingestion::CompanyFinancials& fin,
                                           const std::vector<ingestion::FinancialPeriod>& projections) {
    ingestion::CompanyFinancials ext;
    ext.ticker = fin.ticker;
    ext.currency = fin.currency;
    ext.periods = fin.periods;
    ext.periods.insert(ext.periods.end(), projections.begin(), projections.end());
    metrics::MetricTable t = metrics::build_metric_table(ext);
    // projections of the extended table would extrapolate past the horizon
    t.projections.clear();
    t.projection_basis.clear();
    return t;
}

ReportDocument assemble_report(const ReportInputs& in) {
    // Inputs are checked in schema order so the error names the first gap.
    if (!in.financials || in.financials->periods.empty()) missing(SectionId::CompanyOverview, "no financials");
    if (!in.table || in.table->empty()) missing(SectionId::CompanyOverview, "no metric table");
    if (!in.thesis) missing(SectionId::InvestmentThesis, "no thesis");
    if (!in.insights || in.insights->empty()) missing(SectionId::InvestmentThesis, "no insights");
    if (!in.valuation) missing(SectionId::InvestmentThesis, "no valuation to confirm the rating");
    if (in.thesis->rating != in.valuation->rating) {
        missing(SectionId::InvestmentThesis,
                fmt::format("thesis rating {} disagrees with valuation rating {}",
                            valuation::to_string(in.thesis->rating), valuation::to_string(in.valuation->rating)));
    }
    if (!in.projections || in.projections->empty()) missing(SectionId::FinancialProjections, "no projections");
    if (in.thesis->risks.empty()) missing(SectionId::RiskAnalysis, "thesis has no risk discussion");
    if (!in.benchmark) missing(SectionId::CompetitorAnalysis, "no competitor benchmark");
    if (in.as_of.empty()) throw Error(ErrorCode::InvalidArgument, "report as_of date is required");
    if (in.metadata.config_hash.empty() || in.metadata.provider.empty()) {
        throw Error(ErrorCode::InvalidArgument, "report metadata needs a config hash and provider name");
    }

    const auto& fin = *in.financials;
    const auto& table = *in.table;
    const auto& val = *in.valuation;
    const auto& thesis = *in.thesis;
    const std::string& cur = fin.currency;

    ReportDocument doc;
    doc.ticker = fin.ticker;
    doc.company_name = fin.company_name.empty() ? fin.ticker : fin.company_name;
    doc.currency = cur;
    doc.as_of = in.as_of;
    doc.rating_box = {val.rating, val.target_price, val.current_price};
    doc.metadata = in.metadata;
    if (doc.metadata.engine_version.empty()) doc.metadata.engine_version = engine_version();

    auto add_section = [&](SectionId id, std::vector<Block> blocks) {
        doc.sections.push_back(Section{id, std::string(section_title(id)), std::move(blocks)});
    };
    auto add_table = [&](RenderedTable t) {
        doc.tables.push_back(std::move(t));
        return Block{BlockKind::Table, "", doc.tables.size() - 1};
    };

    const auto& latest = fin.latest();
    const auto& periods = fin.periods;
    {
        std::string intro = fmt::format("{} ({}) reports in {}. This report covers fiscal periods {} through {}",
                                        doc.company_name, fin.ticker, cur, periods.front().period, latest.period);
        intro += fmt::format(" with projections through {}.", in.projections->back().period);
        std::string facts = "- revenue " + latest.period + ": " + display::millions(latest.revenue, cur);
        for (MetricName name : {MetricName::RevenueGrowth, MetricName::EbitdaMargin, MetricName::ContributionMargin,
                                MetricName::SgaMargin, MetricName::Cagr}) {
            if (const auto* v = table.find(name, latest.period)) facts += "\n- " + agents::metric_line(*v, cur);
        }
        std::vector<Block> blocks{narrative(intro), narrative(facts)};
        if (!fin.peers.empty()) blocks.push_back(narrative("Peer group: " + join(fin.peers, ", ") + "."));
        add_section(SectionId::CompanyOverview, std::move(blocks));
    }
    {
        std::vector<Block> blocks{narrative(thesis.thesis)};
        for (const auto& i : *in.insights)
            if (i.kind != agents::InsightKind::Risk) blocks.push_back(narrative(insight_text(i)));
        add_section(SectionId::InvestmentThesis, std::move(blocks));
    }
    {
        std::vector<Block> blocks;
        std::string lead = fmt::format("Projected periods extend the {} base year.", table.projection_basis);
        std::vector<std::string> lines;
        for (MetricName name : {MetricName::RevenueGrowthProjection, MetricName::ContributionMarginProjection})
            if (const auto* p = table.projection(name)) lines.push_back("- " + agents::metric_line(*p, cur));
        if (!lines.empty()) lead += "\n\n" + join(lines, "\n");
        blocks.push_back(narrative(lead));
        blocks.push_back(add_table(projections_table(fin, *in.projections)));
        add_section(SectionId::FinancialProjections, std::move(blocks));
    }
    {
        std::string bullets;
        const std::string lines = agents::render_valuation(val, cur);
        for (std::string_view rest = lines; !rest.empty();) {
            const auto nl = rest.find('\n');
            bullets += "- " + std::string(rest.substr(0, nl)) + "\n";
            rest = nl == std::string_view::npos ? std::string_view() : rest.substr(nl + 1);
        }
        std::vector<Block> blocks{narrative(bullets), narrative(thesis.rationale)};
        if (in.schedule && !in.schedule->periods.empty()) blocks.push_back(add_table(dcf_table(*in.schedule, cur)));
        if (!val.method_notes.empty()) blocks.push_back(Block{BlockKind::Notes, join(val.method_notes, "\n"), 0});
        add_section(SectionId::Valuation, std::move(blocks));
    }
    {
        std::vector<Block> blocks{narrative(thesis.risks)};
        for (const auto& i : *in.insights)
            if (i.kind == agents::InsightKind::Risk) blocks.push_back(narrative(insight_text(i)));
        add_section(SectionId::RiskAnalysis, std::move(blocks));
    }
    {
        const auto& b = *in.benchmark;
        std::vector<Block> blocks{
            narrative(fmt::format("{} is compared with {} on {} figures.", b.subject, join(b.peers, ", "), b.period)),
            add_table(peer_table(b))};
        if (!b.commentary.empty()) blocks.push_back(narrative(b.commentary));
        add_section(SectionId::CompetitorAnalysis, std::move(blocks));
    }
    return doc;
}

}  // namespace eqr::report
