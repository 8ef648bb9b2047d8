#include "eqr/agents/agents.hpp"

#include "eqr/common/error.hpp"
#include "eqr/common/files.hpp"
#include "eqr/common/hashing.hpp"

#include <json.hpp>

#include <set>

namespace eqr::agents {

using metrics::MetricName;
using nlohmann::json;

namespace {

constexpr std::pair<InsightKind, std::string_view> kKindNames[] = {
    {InsightKind::RevenueDriver, "RevenueDriver"},
    {InsightKind::MarginTrend, "MarginTrend"},
    {InsightKind::CompetitivePosition, "CompetitivePosition"},
    {InsightKind::Risk, "Risk"},
    {InsightKind::QueryResponse, "QueryResponse"},
};

}  // namespace

std::string_view to_string(InsightKind kind) {
    for (const auto& [k, name] : kKindNames)
        if (k == kind) return name;
    return "QueryResponse";
}

std::optional<InsightKind> parse_insight_kind(std::string_view text) {
    for (const auto& [k, name] : kKindNames)
        if (name == text) return k;
    return std::nullopt;
}

std::vector<Question> default_question_bank() {
    return {
        {"revenue_drivers", InsightKind::RevenueDriver, "What are the key drivers of revenue growth?",
         {MetricName::RevenueGrowth, MetricName::RevenueGrowthProjection, MetricName::Cagr}, true},
        {"margins_vs_competitors", InsightKind::MarginTrend,
         "How do the company's margins compare to its competitors?",
         {MetricName::ContributionMargin, MetricName::ContributionMarginProjection, MetricName::SgaMargin,
          MetricName::EbitdaMargin},
         true},
        {"future_risks", InsightKind::Risk, "What potential risks could affect its future performance?",
         {MetricName::RevenueGrowth, MetricName::EbitdaMargin}, true},
    };
}

std::vector<Question> load_question_bank(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, "question bank is not valid JSON", {{"path", path.string()}});
    }
    std::vector<Question> bank;
    std::set<std::string> ids;
    try {
        for (const auto& q : j.at("questions")) {
            Question question;
            question.id = q.at("id").get<std::string>();
            const auto kind = parse_insight_kind(q.at("kind").get<std::string>());
            if (!kind || *kind == InsightKind::QueryResponse) {
                throw Error(ErrorCode::ConfigError, "question kind is not a concept kind", {{"id", question.id}});
            }
            question.kind = *kind;
            question.text = q.at("text").get<std::string>();
            for (const auto& m : q.at("metrics")) {
                const auto name = metrics::parse_metric_name(m.get<std::string>());
                if (!name) throw Error(ErrorCode::ConfigError, "unknown metric in question", {{"id", question.id}});
                question.metrics.push_back(*name);
            }
            question.use_documents = q.value("documents", true);
            if (question.id.empty() || question.text.empty() || !ids.insert(question.id).second) {
                throw Error(ErrorCode::ConfigError, "question ids must be unique and texts non-empty",
                            {{"id", question.id}});
            }
            bank.push_back(std::move(question));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, "question bank entry is malformed",
                    {{"path", path.string()}, {"reason", e.what()}});
    }
    if (bank.empty()) throw Error(ErrorCode::ConfigError, "question bank is empty", {{"path", path.string()}});
    return bank;
}

std::string question_bank_fingerprint(const std::vector<Question>& bank) {
    HashBuilder h;
    for (const auto& q : bank) {
        h.add(q.id).add(to_string(q.kind)).add(q.text).add(q.use_documents ? "docs" : "nodocs");
        for (auto m : q.metrics) h.add(metrics::to_string(m));
    }
    return h.hex();
}

}  // namespace eqr::agents
