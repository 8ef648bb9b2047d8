#include "eqr/report/report.hpp"

#include <fmt/format.h>

#include <cctype>
#include <charconv>
#include <cmath>

namespace eqr::report {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool leading_junk(char c) { return c == '(' || c == '[' || c == '"' || c == '\'' || c == '*' || c == '_'; }
bool trailing_junk(char c) {
    return c == '.' || c == ',' || c == ';' || c == ':' || c == ')' || c == ']' || c == '!' || c == '?' ||
           c == '"' || c == '\'' || c == '*' || c == '_';
}

double tolerance(int decimals) { return 0.5 * std::pow(10.0, -decimals); }

bool close_at(double scaled, double shown, int decimals) {
    const double slack = 1e-9 * std::max(1.0, std::fabs(shown));
    return std::fabs(scaled - shown) <= tolerance(decimals) + slack;
}

std::string label_of(const metrics::MetricValue& v) {
    return std::string(metrics::to_string(v.name)) + " " + v.period;
}

SourceUnit source_unit(metrics::Unit u) {
    switch (u) {
        case metrics::Unit::Fraction: return SourceUnit::Fraction;
        case metrics::Unit::Percent: return SourceUnit::PercentUnits;
        case metrics::Unit::Currency: return SourceUnit::Currency;
        case metrics::Unit::Multiple: return SourceUnit::Multiple;
    }
    return SourceUnit::Count;
}

}  // namespace

std::optional<NumericLiteral> parse_numeric_literal(std::string_view token) {
    std::size_t i = 0;
    NumericLiteral lit;
    lit.text = std::string(token);
    bool negative = false;
    if (i < token.size() && (token[i] == '-' || token[i] == '+')) negative = token[i++] == '-';
    bool dollar = false;
    if (i < token.size() && token[i] == '$') {
        dollar = true;
        ++i;
    }
    if (i >= token.size() || !is_digit(token[i])) return std::nullopt;

    std::string digits;
    std::size_t group = 0;
    bool grouped = false;
    while (i < token.size() && (is_digit(token[i]) || token[i] == ',')) {
        if (token[i] == ',') {
            // comma grouping needs exactly three digits after each comma
            if (group == 0 || (grouped && group != 3) || (!grouped && group > 3)) return std::nullopt;
            grouped = true;
            group = 0;
        } else {
            digits.push_back(token[i]);
            ++group;
        }
        ++i;
    }
    if (grouped && group != 3) return std::nullopt;
    if (i < token.size() && token[i] == '.') {
        ++i;
        if (i >= token.size() || !is_digit(token[i])) return std::nullopt;
        digits.push_back('.');
        while (i < token.size() && is_digit(token[i])) {
            digits.push_back(token[i++]);
            ++lit.decimals;
        }
    }
    const std::string_view suffix = token.substr(i);
    if (suffix.empty()) {
        lit.kind = dollar ? LiteralKind::PerShare : LiteralKind::Plain;
    } else if (suffix == "%") {
        lit.kind = LiteralKind::Percent;
    } else if (suffix == "M") {
        lit.kind = LiteralKind::Millions;
    } else if (suffix == "x" && !dollar) {
        lit.kind = LiteralKind::Multiple;
    } else {
        return std::nullopt;
    }
    if (dollar && lit.kind != LiteralKind::PerShare && lit.kind != LiteralKind::Millions) return std::nullopt;
    double v = 0;
    const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (res.ec != std::errc() || res.ptr != digits.data() + digits.size()) return std::nullopt;
    lit.value = negative ? -v : v;
    return lit;
}

std::vector<LocatedLiteral> find_numeric_literals(std::string_view text) {
    std::vector<LocatedLiteral> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        std::size_t a = i, b = j;
        while (a < b && leading_junk(text[a])) ++a;
        while (b > a && trailing_junk(text[b - 1])) --b;
        if (a < b) {
            if (auto lit = parse_numeric_literal(text.substr(a, b - a))) {
                const bool year = lit->kind == LiteralKind::Plain && lit->decimals == 0 && lit->text.size() == 4 &&
                                  lit->value >= 1900 && lit->value <= 2100;
                if (!year) out.push_back({*lit, a});
            }
        }
        i = j;
    }
    return out;
}

bool matches(const NumericLiteral& lit, const SourceValue& s) {
    const int d = lit.decimals;
    const double v = lit.value;
    switch (lit.kind) {
        case LiteralKind::Percent:
            if (s.unit == SourceUnit::Fraction) return close_at(s.value * 100.0, v, d);
            if (s.unit == SourceUnit::PercentUnits) return close_at(s.value, v, d);
            return false;
        case LiteralKind::Millions: return s.unit == SourceUnit::Currency && close_at(s.value / 1e6, v, d);
        case LiteralKind::PerShare: return s.unit == SourceUnit::PerShare && close_at(s.value, v, d);
        case LiteralKind::Multiple: return s.unit == SourceUnit::Multiple && close_at(s.value, v, d);
        case LiteralKind::Plain:
            if (close_at(s.value, v, d)) return true;
            if (s.unit == SourceUnit::Fraction) return close_at(s.value * 100.0, v, d);
            if (s.unit == SourceUnit::Currency) return close_at(s.value / 1e6, v, d);
            return false;
    }
    return false;
}

std::vector<SourceValue> sources_from(const metrics::MetricTable& table, const valuation::ValuationSummary& v) {
    std::vector<SourceValue> out;
    for (const auto& [key, cell] : table.rows)
        if (!cell.not_meaningful) out.push_back({label_of(cell), cell.value, source_unit(cell.unit)});
    for (const auto& [name, cell] : table.projections)
        if (!cell.not_meaningful) out.push_back({label_of(cell), cell.value, source_unit(cell.unit)});
    out.push_back({"valuation target_price", v.target_price, SourceUnit::PerShare});
    out.push_back({"valuation current_price", v.current_price, SourceUnit::PerShare});
    out.push_back({"valuation upside", v.upside(), SourceUnit::Fraction});
    out.push_back({"valuation enterprise_value", v.enterprise_value, SourceUnit::Currency});
    out.push_back({"valuation equity_value", v.equity_value, SourceUnit::Currency});
    out.push_back({"valuation wacc", v.wacc, SourceUnit::Fraction});
    if (v.roic) out.push_back({"valuation roic", *v.roic, SourceUnit::Fraction});
    if (v.enterprise_multiple && !v.enterprise_multiple->not_meaningful)
        out.push_back({"valuation enterprise_multiple", v.enterprise_multiple->value, SourceUnit::Multiple});
    return out;
}

std::vector<SourceValue> sources_from_tables(const ReportDocument& doc) {
    std::vector<SourceValue> out;
    for (const auto& t : doc.tables) {
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            for (std::size_t c = 0; c < t.rows[r].size(); ++c) {
                const std::string& cell = t.rows[r][c];
                // "EUR 1,234.5M" keeps its amount after the currency code
                const auto space = cell.rfind(' ');
                const auto lit = parse_numeric_literal(space == std::string::npos ? cell : cell.substr(space + 1));
                if (!lit) continue;
                const std::string label = fmt::format("table {} [{},{}]", t.title, t.rows[r][0],
                                                      c < t.columns.size() ? t.columns[c] : std::to_string(c));
                switch (lit->kind) {
                    case LiteralKind::Percent: out.push_back({label, lit->value, SourceUnit::PercentUnits}); break;
                    case LiteralKind::Millions: out.push_back({label, lit->value * 1e6, SourceUnit::Currency}); break;
                    case LiteralKind::PerShare: out.push_back({label, lit->value, SourceUnit::PerShare}); break;
                    case LiteralKind::Multiple: out.push_back({label, lit->value, SourceUnit::Multiple}); break;
                    case LiteralKind::Plain: out.push_back({label, lit->value, SourceUnit::Count}); break;
                }
            }
        }
    }
    return out;
}

bool FactAudit::passed() const { return failures().empty(); }

std::vector<const Claim*> FactAudit::failures() const {
    std::vector<const Claim*> out;
    for (const auto& c : claims)
        if (!c.matched) out.push_back(&c);
    return out;
}

FactAudit audit_facts(const ReportDocument& doc, const std::vector<SourceValue>& sources) {
    FactAudit audit;
    for (const auto& section : doc.sections) {
        for (std::size_t b = 0; b < section.blocks.size(); ++b) {
            const Block& block = section.blocks[b];
            if (block.kind != BlockKind::Narrative) continue;
            for (const auto& found : find_numeric_literals(block.text)) {
                Claim claim;
                claim.literal = found.literal.text;
                claim.location = fmt::format("{}#{}@{}", to_string(section.id), b, found.offset);
                for (const auto& s : sources) {
                    if (matches(found.literal, s)) {
                        claim.matched = s.label;
                        break;
                    }
                }
                audit.claims.push_back(std::move(claim));
            }
        }
    }
    return audit;
}

FactAudit audit_facts(const ReportDocument& doc, const metrics::MetricTable& table,
                      const valuation::ValuationSummary& valuation) {
    auto sources = sources_from(table, valuation);
    auto from_tables = sources_from_tables(doc);
    sources.insert(sources.end(), from_tables.begin(), from_tables.end());
    return audit_facts(doc, sources);
}

}  // namespace eqr::report
