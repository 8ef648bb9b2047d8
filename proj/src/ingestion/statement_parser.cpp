#include "eqr/ingestion/statement_parser.hpp"

#include "eqr/common/error.hpp"
#include "eqr/common/files.hpp"
#include "eqr/common/period.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <json.hpp>

namespace eqr::ingestion {

namespace {

std::string normalize_key(std::string_view text) {
    std::string out;
    bool space = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            space = !out.empty();
            continue;
        }
        if (space) out.push_back(' ');
        space = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail(const RawDocument& doc, std::size_t offset, const std::string& why) {
    throw Error(ErrorCode::ParseFailure, why, {{"doc_id", doc.id}, {"offset", std::to_string(offset)}});
}

struct ParsedNumber {
    double value = 0;
    bool percent = false;
};

std::optional<ParsedNumber> parse_number(std::string_view text) {
    ParsedNumber out;
    text = trim(text);
    bool negative = false;
    if (text.size() >= 2 && text.front() == '(' && text.back() == ')') {
        negative = true;
        text = trim(text.substr(1, text.size() - 2));
    }
    if (!text.empty() && text.back() == '%') {
        out.percent = true;
        text = trim(text.substr(0, text.size() - 1));
    }
    if (!text.empty() && text.front() == '-') {
        negative = !negative;
        text.remove_prefix(1);
    }
    if (!text.empty() && text.front() == '$') text.remove_prefix(1);
    std::string digits;
    for (char c : text) {
        if (c == ',') continue;
        digits.push_back(c);
    }
    if (digits.empty()) return std::nullopt;
    double v = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || !std::isfinite(v)) return std::nullopt;
    out.value = negative ? -v : v;
    return out;
}

std::optional<double> parse_scale(std::string_view text) {
    const std::string key = normalize_key(text);
    if (key == "units" || key == "ones" || key == "1") return 1.0;
    if (key == "thousands") return 1e3;
    if (key == "millions") return 1e6;
    if (key == "billions") return 1e9;
    return std::nullopt;
}

struct ParsedSection {
    PeriodKey key;
    std::string label;
    std::size_t header_offset = 0;
    FinancialPeriod values;
    std::map<LineItem, Provenance> provenance;
};

struct ParsedDocument {
    const RawDocument* doc = nullptr;
    std::string company_name;
    std::string currency;
    std::string form;
    std::string filed;
    std::vector<std::string> peers;
    std::vector<ParsedSection> sections;
};

ParsedDocument parse_document(const RawDocument& doc, const AliasTable& aliases) {
    ParsedDocument out;
    out.doc = &doc;
    double scale = 1.0;
    double shares_scale = 1.0;
    ParsedSection* current = nullptr;

    const std::string_view body = doc.body;
    std::size_t pos = 0;
    while (pos <= body.size()) {
        const std::size_t line_end = std::min(body.find('\n', pos), body.size());
        const std::string_view raw_line = body.substr(pos, line_end - pos);
        pos = line_end + 1;

        const std::string_view line = trim(raw_line);
        if (line.empty() || line.front() == '#') {
            if (line_end == body.size()) break;
            continue;
        }
        const std::size_t lead = static_cast<std::size_t>(line.data() - body.data());
        if (line.front() == '[') {
            if (line.back() != ']') fail(doc, lead, "unterminated section header");
            const std::string label(trim(line.substr(1, line.size() - 2)));
            auto key = parse_period(label);
            if (!key || key->estimate) fail(doc, lead, "section header is not a fiscal period label: " + label);
            out.sections.push_back(ParsedSection{*key, key->label(), lead, {}, {}});
            current = &out.sections.back();
            current->values.period = current->label;
            if (line_end == body.size()) break;
            continue;
        }
        const std::size_t colon = line.find(':');
        if (colon == std::string_view::npos) fail(doc, lead, "expected 'key: value'");
        const std::string key = normalize_key(line.substr(0, colon));
        std::string_view value = line.substr(colon + 1);
        const std::size_t value_lead = static_cast<std::size_t>(value.data() - body.data());
        const std::string_view trimmed_value = trim(value);
        const std::size_t value_offset =
            trimmed_value.empty() ? value_lead : static_cast<std::size_t>(trimmed_value.data() - body.data());

        if (current == nullptr) {
            const std::string v(trimmed_value);
            if (key == "ticker") {
                if (v != doc.company) {
                    throw Error(ErrorCode::InconsistentTicker, "statement ticker differs from document company",
                                {{"doc_id", doc.id}, {"ticker", v}, {"company", doc.company}});
                }
            } else if (key == "company_name") {
                out.company_name = v;
            } else if (key == "currency") {
                out.currency = v;
            } else if (key == "scale" || key == "shares_scale") {
                auto s = parse_scale(v);
                if (!s) fail(doc, value_offset, "unknown scale: " + v);
                (key == "scale" ? scale : shares_scale) = *s;
            } else if (key == "form") {
                out.form = v;
            } else if (key == "filed") {
                out.filed = v;
            } else if (key == "peers") {
                std::string_view rest = trimmed_value;
                while (!rest.empty()) {
                    const std::size_t comma = std::min(rest.find(','), rest.size());
                    const std::string_view peer = trim(rest.substr(0, comma));
                    if (!peer.empty()) out.peers.emplace_back(peer);
                    rest = comma < rest.size() ? rest.substr(comma + 1) : std::string_view{};
                }
            }
            if (line_end == body.size()) break;
            continue;
        }

        auto item = aliases.lookup(key);
        if (item) {
            if (current->provenance.count(*item)) {
                if (line_end == body.size()) break;
                continue;  // first alias occurrence wins within a period
            }
            auto number = parse_number(trimmed_value);
            if (!number) fail(doc, value_offset, "unparseable amount for " + std::string(to_string(*item)));
            double v = number->value;
            double applied = 1.0;
            if (*item == LineItem::TaxRate) {
                if (number->percent) {
                    v /= 100.0;
                } else if (v > 1.0) {
                    fail(doc, value_offset, "tax rate above 1 without a percent sign");
                }
                if (v < 0.0 || v > 1.0) fail(doc, value_offset, "tax rate outside [0, 1]");
            } else {
                if (number->percent) fail(doc, value_offset, "percent value for an amount field");
                applied = *item == LineItem::SharesOutstanding ? shares_scale : scale;
                v *= applied;
            }
            if ((*item == LineItem::Revenue || *item == LineItem::OperatingExpense || *item == LineItem::Sga) &&
                v < 0) {
                fail(doc, value_offset, std::string(to_string(*item)) + " must be non-negative");
            }
            current->values.set(*item, v);
            current->provenance[*item] =
                Provenance{doc.id, value_offset, trimmed_value.size(), applied, "", "", ""};
        }
        if (line_end == body.size()) break;
    }

    for (auto& section : out.sections) {
        for (LineItem required : {LineItem::Revenue, LineItem::OperatingExpense, LineItem::Sga}) {
            if (!section.provenance.count(required)) {
                fail(doc, section.header_offset,
                     "period " + section.label + " lacks required field " + std::string(to_string(required)));
            }
        }
        for (auto& [item, prov] : section.provenance) {
            prov.form = out.form;
            prov.filed = out.filed;
        }
    }
    for (std::size_t i = 0; i < out.sections.size(); ++i) {
        for (std::size_t j = i + 1; j < out.sections.size(); ++j) {
            if (out.sections[i].key == out.sections[j].key) {
                fail(doc, out.sections[j].header_offset, "duplicate period section " + out.sections[j].label);
            }
        }
    }
    return out;
}

}  // namespace

AliasTable AliasTable::from_json(std::string_view json_text) {
    AliasTable table;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("alias table is not valid JSON: ") + e.what());
    }
    for (const auto& [field, list] : j.items()) {
        auto item = parse_line_item(field);
        if (!item) throw Error(ErrorCode::ConfigError, "alias table names unknown field", {{"field", field}});
        table.add(*item, field);
        for (const auto& alias : list) table.add(*item, alias.get<std::string>());
    }
    return table;
}

AliasTable AliasTable::load(const std::filesystem::path& path) { return from_json(read_file(path)); }

void AliasTable::add(LineItem item, std::string_view alias) { aliases_[normalize_key(alias)] = item; }

std::optional<LineItem> AliasTable::lookup(std::string_view name) const {
    auto it = aliases_.find(normalize_key(name));
    if (it == aliases_.end()) return std::nullopt;
    return it->second;
}

CompanyFinancials parse_statements(const std::vector<RawDocument>& docs, const AliasTable& aliases) {
    if (docs.empty()) throw Error(ErrorCode::ParseFailure, "no documents to parse", {{"doc_id", ""}, {"offset", "0"}});
    const std::string& ticker = docs.front().company;
    for (const auto& d : docs) {
        if (d.company != ticker) {
            throw Error(ErrorCode::InconsistentTicker, "documents refer to different tickers",
                        {{"doc_id", d.id}, {"ticker", d.company}, {"expected", ticker}});
        }
    }

    std::vector<const RawDocument*> statements;
    for (const auto& d : docs)
        if (d.content_type == kStatementContentType) statements.push_back(&d);
    std::sort(statements.begin(), statements.end(),
              [](const RawDocument* a, const RawDocument* b) { return a->id < b->id; });

    std::vector<ParsedDocument> parsed;
    for (const RawDocument* d : statements) {
        ParsedDocument p = parse_document(*d, aliases);
        if (!p.sections.empty()) parsed.push_back(std::move(p));
    }
    if (parsed.empty()) {
        throw Error(ErrorCode::ParseFailure, "no statement data in any document",
                    {{"doc_id", docs.front().id}, {"offset", "0"}});
    }

    // Frequency and currency must agree across documents.
    const bool annual = parsed.front().sections.front().key.annual();
    for (const auto& p : parsed) {
        for (const auto& s : p.sections) {
            if (s.key.annual() != annual) {
                fail(*p.doc, s.header_offset, "annual and quarterly periods cannot be mixed");
            }
        }
    }

    // Most recently filed document first; ties broken by id (descending).
    std::vector<const ParsedDocument*> by_recency;
    for (const auto& p : parsed) by_recency.push_back(&p);
    std::stable_sort(by_recency.begin(), by_recency.end(), [](const ParsedDocument* a, const ParsedDocument* b) {
        if (a->filed != b->filed) return a->filed > b->filed;
        return a->doc->id > b->doc->id;
    });

    CompanyFinancials fin;
    fin.ticker = ticker;
    const ParsedDocument& newest = *by_recency.front();
    fin.company_name = newest.company_name.empty() ? ticker : newest.company_name;
    fin.currency = newest.currency.empty() ? "USD" : newest.currency;
    fin.peers = newest.peers;
    for (const auto* p : by_recency) {
        if (!p->currency.empty() && p->currency != fin.currency) {
            throw Error(ErrorCode::ParseFailure, "documents disagree on currency",
                        {{"doc_id", p->doc->id}, {"offset", "0"}});
        }
    }

    std::vector<std::pair<PeriodKey, const ParsedSection*>> chosen;
    std::map<std::string, std::vector<std::string>> superseded;
    for (const auto* p : by_recency) {
        for (const auto& s : p->sections) {
            auto it = std::find_if(chosen.begin(), chosen.end(), [&](const auto& c) { return c.first == s.key; });
            if (it == chosen.end()) {
                chosen.emplace_back(s.key, &s);
            } else if (!(it->second->values == s.values)) {
                superseded[s.label].push_back(p->doc->id);
            }
        }
    }
    std::sort(chosen.begin(), chosen.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    for (const auto& [key, section] : chosen) {
        fin.periods.push_back(section->values);
        std::string note;
        if (auto it = superseded.find(section->label); it != superseded.end()) {
            note = "supersedes";
            for (const auto& id : it->second) note += " " + id;
        }
        for (const auto& [item, prov] : section->provenance) {
            Provenance p = prov;
            p.note = note;
            fin.provenance[{section->label, item}] = p;
        }
    }
    return fin;
}

}  // namespace eqr::ingestion
