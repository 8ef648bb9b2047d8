#include "eqr/evaluation/evaluation.hpp"

#include "eqr/common/build_info.hpp"
#include "eqr/common/display.hpp"
#include "eqr/common/error.hpp"
#include "eqr/common/files.hpp"
#include "eqr/common/hashing.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <regex>

namespace eqr::evaluation {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string trim(std::string_view s) {
    auto space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
    while (!s.empty() && space(s.front())) s.remove_prefix(1);
    while (!s.empty() && space(s.back())) s.remove_suffix(1);
    return std::string(s);
}

struct Header {
    Dimension dimension;
    double score;
    std::size_t begin;  // header start
    std::size_t end;    // first byte after the header
};

// "[Accuracy] 9:", "[Accuracy] Score: 9/10", "**[Logicality] 8:**", "[Storytelling Ability] Score: 7.5"
const std::regex& header_pattern() {
    static const std::regex re(
        R"(\[\s*(accuracy|logicality|storytelling)(?:\s+ability)?\s*\]\s*(?:\*\*)?\s*(?:score\s*:?\s*)?(?:\*\*)?\s*(-?\d+(?:\.\d+)?)\s*(?:/\s*10)?\s*:?(?:\*\*)?)",
        std::regex::icase | std::regex::ECMAScript);
    return re;
}

std::vector<Header> find_headers(std::string_view text) {
    std::vector<Header> out;
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), header_pattern()); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        out.push_back({*parse_dimension(lower(m[1].str())), std::stod(m[2].str()),
                       static_cast<std::size_t>(m.position(0)), static_cast<std::size_t>(m.position(0) + m.length(0))});
    }
    return out;
}

std::string comment_after(std::string_view text, const std::vector<Header>& headers, std::size_t i) {
    const std::size_t stop = i + 1 < headers.size() ? headers[i + 1].begin : text.size();
    std::string c = trim(text.substr(headers[i].end, stop - headers[i].end));
    // emphasis left open by the header line
    while (c.rfind("**", 0) == 0) c = trim(std::string_view(c).substr(2));
    while (c.size() >= 2 && c.compare(c.size() - 2, 2, "**") == 0) c = trim(std::string_view(c).substr(0, c.size() - 2));
    return c;
}

void check_range(Dimension d, double v) {
    if (!(v >= 0.0 && v <= 10.0)) {
        throw Error(ErrorCode::OutOfRangeScore, fmt::format("{} score {} is outside [0, 10]", to_string(d), v),
                    {{"dimension", std::string(to_string(d))}, {"score", fmt::format("{}", v)}});
    }
}

std::string rubric_block(const Rubric& rubric, const std::vector<Dimension>& dims) {
    std::string out = "Scoring criteria:";
    for (Dimension d : dims) out += "\n" + std::string(header_label(d)) + "\n" + rubric.describe(d);
    return out;
}

[[noreturn]] void judge_failure(const Error& cause, const std::string& judge) {
    Error::Details details = cause.details();
    details["cause"] = std::string(to_string(cause.code()));
    details["judge"] = judge;
    throw Error(ErrorCode::JudgeFailure, "judge did not produce a usable score: " + cause.message(), details);
}

}  // namespace

std::string_view to_string(Dimension d) {
    switch (d) {
        case Dimension::Accuracy: return "accuracy";
        case Dimension::Logicality: return "logicality";
        case Dimension::Storytelling: return "storytelling";
    }
    return "accuracy";
}

std::string_view header_label(Dimension d) {
    switch (d) {
        case Dimension::Accuracy: return "Accuracy";
        case Dimension::Logicality: return "Logicality";
        case Dimension::Storytelling: return "Storytelling";
    }
    return "Accuracy";
}

std::optional<Dimension> parse_dimension(std::string_view text) {
    const std::string l = lower(text);
    for (Dimension d : kDimensions)
        if (l == to_string(d)) return d;
    return std::nullopt;
}

double EvaluationScore::get(Dimension d) const {
    switch (d) {
        case Dimension::Accuracy: return accuracy;
        case Dimension::Logicality: return logicality;
        case Dimension::Storytelling: return storytelling;
    }
    return 0.0;
}

void EvaluationScore::set(Dimension d, double value) {
    switch (d) {
        case Dimension::Accuracy: accuracy = value; break;
        case Dimension::Logicality: logicality = value; break;
        case Dimension::Storytelling: storytelling = value; break;
    }
}

// ---- rubric -----------------------------------------------------------------

Rubric Rubric::parse(std::string_view text) {
    Rubric r;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string line = trim(text.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto p1 = line.find('|');
        const auto p2 = p1 == std::string::npos ? p1 : line.find('|', p1 + 1);
        const auto dim = p1 == std::string::npos ? std::nullopt : parse_dimension(line.substr(0, p1));
        int score = -1;
        if (p2 != std::string::npos) {
            try {
                std::size_t used = 0;
                score = std::stoi(line.substr(p1 + 1, p2 - p1 - 1), &used);
                if (used != p2 - p1 - 1) score = -1;
            } catch (const std::exception&) {
                score = -1;
            }
        }
        if (!dim || score < 0 || score > 10 || trim(line.substr(p2 + 1)).empty()) {
            throw Error(ErrorCode::ConfigError, "rubric line must be dimension|score|criterion",
                        {{"line", std::to_string(line_no)}});
        }
        if (!r.levels_[*dim].emplace(score, line.substr(p2 + 1)).second) {
            throw Error(ErrorCode::ConfigError, "rubric repeats a level",
                        {{"line", std::to_string(line_no)}, {"dimension", std::string(to_string(*dim))}});
        }
    }
    for (Dimension d : kDimensions) {
        if (r.levels_[d].size() != 11) {
            throw Error(ErrorCode::ConfigError, "rubric needs all 11 levels for every dimension",
                        {{"dimension", std::string(to_string(d))}});
        }
    }
    return r;
}

Rubric Rubric::load(const std::filesystem::path& path) {
    try {
        return parse(read_file(path));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ConfigError) throw Error(ErrorCode::ConfigError, e.message(), {{"path", path.string()}});
        auto details = e.details();
        details["path"] = path.string();
        throw Error(ErrorCode::ConfigError, e.message(), details);
    }
}

const Rubric& Rubric::shipped() {
    static const Rubric r = load(std::filesystem::path(default_data_dir()) / "rubric.txt");
    return r;
}

const std::string& Rubric::text(Dimension d, int score) const {
    const auto& levels = levels_.at(d);
    auto it = levels.find(score);
    if (it == levels.end()) throw Error(ErrorCode::InvalidArgument, "rubric score must be in 0..10");
    return it->second;
}

std::string Rubric::describe(Dimension d) const {
    std::string out;
    const auto& levels = levels_.at(d);
    for (auto it = levels.rbegin(); it != levels.rend(); ++it)
        out += (out.empty() ? "" : "\n") + std::to_string(it->first) + ": " + it->second;
    return out;
}

std::string Rubric::fingerprint() const {
    HashBuilder h;
    for (Dimension d : kDimensions)
        for (const auto& [score, text] : levels_.at(d)) h.add(to_string(d)).add(std::to_string(score)).add(text);
    return h.hex();
}

// ---- prompts ----------------------------------------------------------------

std::string_view to_string(JudgeMode m) { return m == JudgeMode::Combined ? "combined" : "per_dimension"; }

std::optional<JudgeMode> parse_judge_mode(std::string_view text) {
    if (text == "combined") return JudgeMode::Combined;
    if (text == "per_dimension") return JudgeMode::PerDimension;
    return std::nullopt;
}

agents::PromptEnvelope build_judge_prompt(const std::string& report_text, const Rubric& rubric,
                                          const std::string& subject, const agents::PromptLibrary* prompts) {
    const auto& lib = prompts ? *prompts : agents::PromptLibrary::shipped();
    agents::PromptEnvelope p;
    p.task = "judge";
    p.user_text = lib.render("judge", {{"subject", subject}}) + "\n" +
                  rubric_block(rubric, {kDimensions.begin(), kDimensions.end()});
    p.context_blocks = {{"report", report_text}};
    return p;
}

agents::PromptEnvelope build_dimension_prompt(const std::string& report_text, const Rubric& rubric, Dimension d,
                                              const agents::PromptLibrary* prompts) {
    const auto& lib = prompts ? *prompts : agents::PromptLibrary::shipped();
    agents::PromptEnvelope p;
    p.task = "judge." + std::string(to_string(d));
    p.user_text = lib.get("judge_" + std::string(to_string(d))) + "\n\n" + rubric_block(rubric, {d});
    p.context_blocks = {{"report", report_text}};
    return p;
}

// ---- parsing ----------------------------------------------------------------

EvaluationScore parse_judge_response(std::string_view text) {
    const auto headers = find_headers(text);
    EvaluationScore score;
    for (Dimension d : kDimensions) {
        auto it = std::find_if(headers.begin(), headers.end(), [&](const Header& h) { return h.dimension == d; });
        if (it == headers.end()) {
            throw Error(ErrorCode::MalformedResponse,
                        fmt::format("judge response has no scored [{}] header", header_label(d)),
                        {{"dimension", std::string(to_string(d))}});
        }
        check_range(d, it->score);
        score.set(d, it->score);
        score.comments[d] = comment_after(text, headers, static_cast<std::size_t>(it - headers.begin()));
    }
    return score;
}

DimensionReading parse_dimension_response(std::string_view text, Dimension d) {
    const auto headers = find_headers(text);
    auto it = std::find_if(headers.begin(), headers.end(), [&](const Header& h) { return h.dimension == d; });
    if (it == headers.end()) {
        throw Error(ErrorCode::MalformedResponse,
                    fmt::format("judge response has no scored [{}] header", header_label(d)),
                    {{"dimension", std::string(to_string(d))}});
    }
    check_range(d, it->score);
    return {it->score, comment_after(text, headers, static_cast<std::size_t>(it - headers.begin()))};
}

std::string format_judge_response(const EvaluationScore& score) {
    std::string out;
    for (Dimension d : kDimensions) {
        if (!out.empty()) out += "\n";
        out += "[" + std::string(header_label(d)) + "] " + display::score(score.get(d)) + ":\n";
        auto it = score.comments.find(d);
        if (it != score.comments.end() && !it->second.empty()) out += it->second + "\n";
    }
    return out;
}

std::string JudgeTranscript::combined_response() const {
    std::string out;
    for (const auto& r : responses) {
        if (!out.empty()) out += "\n";
        out += trim(r) + "\n";
    }
    return out;
}

EvaluationScore judge_report(const std::string& report_text, const std::string& report_id,
                             agents::LlmProvider& judge, const Rubric& rubric, JudgeMode mode,
                             const std::string& subject, JudgeTranscript* transcript,
                             const agents::PromptLibrary* prompts) {
    if (trim(report_text).empty()) throw Error(ErrorCode::EmptyInput, "report text to judge is empty");
    JudgeTranscript local;
    JudgeTranscript& t = transcript ? *transcript : local;
    EvaluationScore score;
    try {
        if (mode == JudgeMode::Combined) {
            t.prompts.push_back(build_judge_prompt(report_text, rubric, subject, prompts));
            t.responses.push_back(agents::invoke(judge, t.prompts.back()));
            score = parse_judge_response(t.responses.back());
        } else {
            for (Dimension d : kDimensions) {
                t.prompts.push_back(build_dimension_prompt(report_text, rubric, d, prompts));
                t.responses.push_back(agents::invoke(judge, t.prompts.back()));
                const auto reading = parse_dimension_response(t.responses.back(), d);
                score.set(d, reading.score);
                score.comments[d] = reading.comment;
            }
        }
    } catch (const Error& e) {
        judge_failure(e, judge.name());
    }
    score.judge = judge.name();
    score.report_id = report_id;
    return score;
}

}  // namespace eqr::evaluation
