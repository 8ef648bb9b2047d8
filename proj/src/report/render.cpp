#include "eqr/report/report.hpp"

#include "eqr/common/display.hpp"
#include "eqr/common/error.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace eqr::report {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return std::string(s);
}

std::string comment_safe(std::string s) {
    for (std::size_t p; (p = s.find("--")) != std::string::npos;) s.replace(p, 2, "- -");
    for (auto& c : s)
        if (c == '\n') c = ' ';
    return s;
}

std::vector<std::pair<std::string, std::string>> metadata_fields(const ReportDocument& doc) {
    return {{"ticker", doc.ticker},
            {"company", doc.company_name},
            {"as_of", doc.as_of},
            {"engine_version", doc.metadata.engine_version},
            {"config_hash", doc.metadata.config_hash},
            {"provider", doc.metadata.provider}};
}

std::string rating_line(const ReportDocument& doc) {
    const auto& box = doc.rating_box;
    const double upside = box.current_price > 0 ? box.target_price / box.current_price - 1.0 : 0.0;
    return fmt::format("Rating: {} | Target price: {} | Current price: {} | Upside: {}",
                       valuation::to_string(box.rating), display::per_share(box.target_price, doc.currency),
                       display::per_share(box.current_price, doc.currency), display::percent(upside));
}

std::string title_line(const ReportDocument& doc) {
    return fmt::format("{} ({}) equity research, as of {}", doc.company_name, doc.ticker, doc.as_of);
}

bool numeric_format(const RenderedTable& t, std::size_t c) { return t.number_format[c] != "text"; }

// ---- markdown ---------------------------------------------------------------

std::string md_cell(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out += ' ';
        else out += c;
    }
    return out.empty() ? " " : out;
}

void md_table(std::string& out, const RenderedTable& t) {
    out += "### " + t.title + "\n\n|";
    for (const auto& c : t.columns) out += " " + md_cell(c) + " |";
    out += "\n|";
    for (std::size_t c = 0; c < t.columns.size(); ++c) out += numeric_format(t, c) ? " ---: |" : " --- |";
    out += "\n";
    for (const auto& row : t.rows) {
        out += "|";
        for (const auto& cell : row) out += " " + md_cell(cell) + " |";
        out += "\n";
    }
}

std::string render_markdown(const ReportDocument& doc) {
    std::string out = "<!-- eqr-report\n";
    for (const auto& [k, v] : metadata_fields(doc)) out += k + ": " + comment_safe(v) + "\n";
    out += "-->\n\n";
    out += "**" + title_line(doc) + "**\n\n";
    out += "**" + rating_line(doc) + "**\n";
    for (const auto& s : doc.sections) {
        out += "\n# " + s.title + "\n";
        for (const auto& b : s.blocks) {
            out += "\n";
            switch (b.kind) {
                case BlockKind::Narrative: out += b.text + "\n"; break;
                case BlockKind::Notes:
                    out += "Method notes:\n\n";
                    for (auto line : split_lines(b.text))
                        if (!line.empty()) out += "- " + std::string(line) + "\n";
                    break;
                case BlockKind::Table: md_table(out, doc.tables.at(b.table)); break;
            }
        }
    }
    return out;
}

// ---- html -------------------------------------------------------------------

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// Escapes, then turns paired ** markers into <strong>.
std::string inline_html(std::string_view s) {
    std::string esc = escape(s);
    std::string out;
    bool open = false;
    std::size_t pos = 0;
    const std::size_t pairs = [&] {
        std::size_t n = 0;
        for (std::size_t p = 0; (p = esc.find("**", p)) != std::string::npos; p += 2) ++n;
        return n - n % 2;
    }();
    std::size_t seen = 0;
    for (std::size_t p; (p = esc.find("**", pos)) != std::string::npos && seen < pairs; ++seen) {
        out += esc.substr(pos, p - pos);
        out += open ? "</strong>" : "<strong>";
        open = !open;
        pos = p + 2;
    }
    out += esc.substr(pos);
    return out;
}

void html_text(std::string& out, std::string_view text) {
    std::vector<std::vector<std::string_view>> paragraphs(1);
    for (auto line : split_lines(text)) {
        if (trim(line).empty()) {
            if (!paragraphs.back().empty()) paragraphs.emplace_back();
        } else {
            paragraphs.back().push_back(line);
        }
    }
    for (const auto& para : paragraphs) {
        if (para.empty()) continue;
        const bool list = std::all_of(para.begin(), para.end(), [](std::string_view l) { return l.rfind("- ", 0) == 0; });
        if (list) {
            out += "<ul>\n";
            for (auto l : para) out += "<li>" + inline_html(l.substr(2)) + "</li>\n";
            out += "</ul>\n";
        } else {
            out += "<p>";
            for (std::size_t i = 0; i < para.size(); ++i) out += (i ? "<br>\n" : "") + inline_html(para[i]);
            out += "</p>\n";
        }
    }
}

void html_table(std::string& out, const RenderedTable& t) {
    out += "<table>\n<caption>" + escape(t.title) + "</caption>\n<thead><tr>";
    for (const auto& c : t.columns) out += "<th>" + escape(c) + "</th>";
    out += "</tr></thead>\n<tbody>\n";
    for (const auto& row : t.rows) {
        out += "<tr>";
        for (std::size_t c = 0; c < row.size(); ++c)
            out += (numeric_format(t, c) ? "<td class=\"num\">" : "<td>") + escape(row[c]) + "</td>";
        out += "</tr>\n";
    }
    out += "</tbody>\n</table>\n";
}

constexpr std::string_view kStyle =
    "body{font-family:Georgia,serif;max-width:60rem;margin:2rem auto;padding:0 1rem;color:#1a1a1a;line-height:1.5}"
    "h1{border-bottom:2px solid #1f3a5f;color:#1f3a5f;font-size:1.4rem;margin-top:2rem}"
    ".masthead{font-size:1.5rem;font-weight:bold}"
    ".rating{background:#eef2f7;border-left:4px solid #1f3a5f;padding:.5rem 1rem;font-weight:bold}"
    "table{border-collapse:collapse;margin:1rem 0;font-family:Helvetica,Arial,sans-serif;font-size:.9rem}"
    "caption{text-align:left;font-weight:bold;padding-bottom:.3rem}"
    "th,td{border:1px solid #c7ced8;padding:.25rem .6rem}th{background:#1f3a5f;color:#fff}"
    "td.num{text-align:right}.notes{color:#555;font-size:.85rem}";

std::string render_html(const ReportDocument& doc) {
    std::string out = "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
    out += "<!-- eqr-report\n";
    for (const auto& [k, v] : metadata_fields(doc)) out += k + ": " + escape(comment_safe(v)) + "\n";
    out += "-->\n";
    out += "<title>" + escape(title_line(doc)) + "</title>\n<style>" + std::string(kStyle) + "</style>\n</head>\n<body>\n";
    out += "<div class=\"masthead\">" + escape(title_line(doc)) + "</div>\n";
    out += "<div class=\"rating\">" + escape(rating_line(doc)) + "</div>\n";
    for (const auto& s : doc.sections) {
        out += "<section id=\"" + std::string(to_string(s.id)) + "\">\n<h1>" + escape(s.title) + "</h1>\n";
        for (const auto& b : s.blocks) {
            switch (b.kind) {
                case BlockKind::Narrative: html_text(out, b.text); break;
                case BlockKind::Notes:
                    out += "<div class=\"notes\">\n<p>Method notes:</p>\n<ul>\n";
                    for (auto line : split_lines(b.text))
                        if (!line.empty()) out += "<li>" + escape(line) + "</li>\n";
                    out += "</ul>\n</div>\n";
                    break;
                case BlockKind::Table: html_table(out, doc.tables.at(b.table)); break;
            }
        }
        out += "</section>\n";
    }
    out += "</body>\n</html>\n";
    return out;
}

std::vector<std::string> split_row(std::string_view line) {
    std::vector<std::string> cells;
    std::string cur;
    for (std::size_t i = 1; i < line.size(); ++i) {
        if (line[i] == '\\' && i + 1 < line.size() && line[i + 1] == '|') {
            cur += '|';
            ++i;
        } else if (line[i] == '|') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur += line[i];
        }
    }
    return cells;
}

}  // namespace

std::optional<Format> parse_format(std::string_view text) {
    if (text == "markdown" || text == "md") return Format::Markdown;
    if (text == "html") return Format::Html;
    return std::nullopt;
}

std::string_view extension(Format format) { return format == Format::Markdown ? "md" : "html"; }

std::string render(const ReportDocument& doc, Format format) {
    return format == Format::Markdown ? render_markdown(doc) : render_html(doc);
}

std::string render(const ReportDocument& doc, std::string_view format) {
    const auto f = parse_format(format);
    if (!f) {
        throw Error(ErrorCode::UnsupportedFormat, "report format must be markdown or html",
                    {{"format", std::string(format)}});
    }
    return render(doc, *f);
}

ParsedMarkdown parse_markdown(std::string_view markdown) {
    ParsedMarkdown out;
    const auto lines = split_lines(markdown);
    std::size_t i = 0;
    if (!lines.empty() && lines[0] == "<!-- eqr-report") {
        for (i = 1; i < lines.size() && lines[i] != "-->"; ++i) {
            const auto colon = lines[i].find(": ");
            if (colon != std::string_view::npos)
                out.metadata.emplace_back(std::string(lines[i].substr(0, colon)), std::string(lines[i].substr(colon + 2)));
        }
        ++i;
    }
    for (; i < lines.size(); ++i) {
        const auto line = lines[i];
        if (line.rfind("# ", 0) == 0) {
            out.sections.push_back({std::string(line.substr(2)), {}});
        } else if (line.rfind("### ", 0) == 0 && !out.sections.empty()) {
            ParsedTable t;
            t.title = std::string(line.substr(4));
            std::size_t j = i + 1;
            while (j < lines.size() && lines[j].empty()) ++j;
            if (j + 1 < lines.size() && lines[j].rfind("|", 0) == 0) {
                t.columns = split_row(lines[j]);
                for (j += 2; j < lines.size() && lines[j].rfind("|", 0) == 0; ++j) t.rows.push_back(split_row(lines[j]));
                out.sections.back().tables.push_back(std::move(t));
                i = j - 1;
            }
        }
    }
    return out;
}

}  // namespace eqr::report
