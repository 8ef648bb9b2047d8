#pragma once

#include "eqr/agents/prompt.hpp"
#include "eqr/agents/provider.hpp"
#include "eqr/ingestion/types.hpp"
#include "eqr/metrics/metrics.hpp"
#include "eqr/valuation/valuation.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace eqr::agents {

enum class InsightKind { RevenueDriver, MarginTrend, CompetitivePosition, Risk, QueryResponse };

std::string_view to_string(InsightKind kind);
std::optional<InsightKind> parse_insight_kind(std::string_view text);

struct Insight {
    std::string id;  // question id, or "query" for ad-hoc questions
    std::string question;
    std::string answer;
    InsightKind kind = InsightKind::QueryResponse;
    std::vector<std::pair<metrics::MetricName, std::string>> metric_refs;
    std::vector<std::string> document_refs;
    std::string prompt_sha256;

    bool operator==(const Insight&) const = default;
};

struct Question {
    std::string id;
    InsightKind kind = InsightKind::RevenueDriver;
    std::string text;
    std::vector<metrics::MetricName> metrics;  // rows placed in the prompt context
    bool use_documents = true;

    bool operator==(const Question&) const = default;
};

/// The three built-in questions: revenue drivers, margins against
/// competitors, and risks to future performance.
std::vector<Question> default_question_bank();
/// JSON: {"questions": [{"id", "kind", "text", "metrics": [...], "documents": bool}]}.
std::vector<Question> load_question_bank(const std::filesystem::path& path);
std::string question_bank_fingerprint(const std::vector<Question>& bank);

struct AgentOptions {
    std::vector<Question> questions = default_question_bank();
    const PromptLibrary* prompts = nullptr;  // null selects PromptLibrary::shipped()
    std::size_t max_in_flight = 4;
    std::size_t excerpt_budget_bytes = 2000;  // per document block
    std::size_t max_documents = 3;
    int max_tokens = 1024;
    double temperature = 0.0;

    const PromptLibrary& library() const { return prompts ? *prompts : PromptLibrary::shipped(); }
};

/// One Insight per configured question, in bank order. Questions run
/// concurrently up to max_in_flight. Throws EmptyContext when the table is
/// empty or a question would be asked with no context at all.
std::vector<Insight> run_concept_cot(const ingestion::CompanyFinancials& fin, const metrics::MetricTable& table,
                                     const std::vector<ingestion::RawDocument>& docs, LlmProvider& provider,
                                     const AgentOptions& options = {});

/// Ad-hoc question answered against the full metric table.
Insight answer_financial_query(const std::string& query, const ingestion::CompanyFinancials& fin,
                               const metrics::MetricTable& table, LlmProvider& provider,
                               const AgentOptions& options = {});

/// Metrics compared across companies.
inline constexpr metrics::MetricName kBenchmarkMetrics[] = {
    metrics::MetricName::RevenueGrowth, metrics::MetricName::ContributionMargin, metrics::MetricName::EbitdaMargin,
    metrics::MetricName::SgaMargin};

struct CompetitorBenchmark {
    std::string subject;
    std::vector<std::string> peers;  // sorted, subject excluded
    std::string period;              // latest period every company reports
    std::map<std::string, std::map<std::string, double>> metrics;  // metric name -> ticker -> value
    std::string commentary;
    std::string prompt_sha256;

    bool operator==(const CompetitorBenchmark&) const = default;
};

/// Throws NoComparablePeriod when there are no peers or no period common
/// to the subject and every peer.
CompetitorBenchmark benchmark_competitors(const ingestion::CompanyFinancials& subject,
                                          const std::vector<ingestion::CompanyFinancials>& peers,
                                          LlmProvider& provider, const AgentOptions& options = {});

struct ThesisContent {
    valuation::Rating rating = valuation::Rating::Hold;
    std::string thesis;
    std::string risks;
    std::string rationale;
    int corrections = 0;  // calls retried after asserting the wrong rating

    bool operator==(const ThesisContent&) const = default;
};

/// Three calls (thesis, risks, rationale). The rationale must state the
/// valuation rating and no narrative may assert another one; a violating
/// call is retried once with a corrective instruction, then RatingMismatch.
ThesisContent run_thesis_cot(const std::vector<Insight>& insights, const valuation::ValuationSummary& valuation,
                             const CompetitorBenchmark& benchmark, LlmProvider& provider,
                             const AgentOptions& options = {}, std::string_view currency = "USD");

/// Capitalised rating words (Buy, HOLD, ...) appearing as whole words.
std::vector<valuation::Rating> find_rating_tokens(std::string_view text);

// Context rendering shared with the report and evaluation layers.

/// Display form of a metric value (percent, $ millions, multiple) per its unit.
std::string display_metric(const metrics::MetricValue& value, std::string_view currency);
/// "<metric> <period>: <display value>" for one metric cell.
std::string metric_line(const metrics::MetricValue& value, std::string_view currency);
/// Every row then every projection, one metric_line each.
std::string render_metric_table(const metrics::MetricTable& table, std::string_view currency);
/// Display lines describing the valuation summary.
std::string render_valuation(const valuation::ValuationSummary& valuation, std::string_view currency);

/// True when every metric_ref names a cell of the table (rows or projections)
/// and every document_ref is in `document_ids`.
bool refs_resolve(const Insight& insight, const metrics::MetricTable& table,
                  const std::vector<std::string>& document_ids);

}  // namespace eqr::agents
