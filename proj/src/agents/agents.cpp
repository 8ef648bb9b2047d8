#include "eqr/agents/agents.hpp"

#include "eqr/common/concurrency.hpp"
#include "eqr/common/error.hpp"

#include <algorithm>
#include <set>

namespace eqr::agents {

using metrics::MetricName;

namespace {

std::string company_block(const ingestion::CompanyFinancials& fin) {
    std::string out = "ticker: " + fin.ticker + "\n";
    out += "company: " + (fin.company_name.empty() ? fin.ticker : fin.company_name) + "\n";
    out += "currency: " + fin.currency + "\n";
    if (!fin.periods.empty()) out += "latest period: " + fin.latest().period + "\n";
    if (!fin.peers.empty()) {
        out += "peers:";
        for (const auto& p : fin.peers) out += " " + p;
        out += "\n";
    }
    return out;
}

std::string fin_currency(const std::map<std::string, const ingestion::CompanyFinancials*>& companies,
                         const std::string& ticker) {
    return companies.at(ticker)->currency;
}

PromptEnvelope envelope(const AgentOptions& options, std::string task, std::string user_text) {
    PromptEnvelope p;
    p.task = std::move(task);
    p.system_text = options.library().get("system");
    p.user_text = std::move(user_text);
    p.max_tokens = options.max_tokens;
    p.temperature = options.temperature;
    return p;
}

std::string trim_utf8(const std::string& text, std::size_t budget) {
    if (text.size() <= budget) return text;
    std::size_t cut = budget;
    while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
    return text.substr(0, cut) + "\n[excerpt truncated]";
}

std::vector<const ingestion::RawDocument*> select_documents(const std::vector<ingestion::RawDocument>& docs,
                                                            std::size_t limit) {
    std::vector<const ingestion::RawDocument*> picked;
    for (const auto& d : docs)
        if (d.content_type.rfind("text/", 0) == 0) picked.push_back(&d);
    std::sort(picked.begin(), picked.end(), [](const auto* a, const auto* b) {
        if (a->retrieved_at != b->retrieved_at) return a->retrieved_at > b->retrieved_at;
        return a->id < b->id;
    });
    if (picked.size() > limit) picked.resize(limit);
    return picked;
}

std::string clean_answer(std::string text, const LlmProvider& provider, const PromptEnvelope& prompt) {
    while (!text.empty() && (text.back() == '\n' || text.back() == ' ' || text.back() == '\r')) text.pop_back();
    if (text.empty()) {
        throw Error(ErrorCode::ProviderFailure, "provider returned an empty completion",
                    {{"provider", provider.name()}, {"prompt_sha256", prompt.hash()}});
    }
    return text;
}

}  // namespace

std::vector<Insight> run_concept_cot(const ingestion::CompanyFinancials& fin, const metrics::MetricTable& table,
                                     const std::vector<ingestion::RawDocument>& docs, LlmProvider& provider,
                                     const AgentOptions& options) {
    if (table.empty()) throw Error(ErrorCode::EmptyContext, "metric table is empty", {{"ticker", fin.ticker}});
    if (options.questions.empty()) throw Error(ErrorCode::EmptyContext, "question bank is empty");

    const auto documents = select_documents(docs, options.max_documents);
    std::vector<Insight> insights(options.questions.size());
    for_each_bounded(options.questions.size(), options.max_in_flight, [&](std::size_t i) {
        const Question& q = options.questions[i];
        Insight insight;
        insight.id = q.id;
        insight.question = q.text;
        insight.kind = q.kind;

        std::string rows;
        for (MetricName name : q.metrics) {
            for (const auto& period : table.periods) {
                if (const auto* v = table.find(name, period)) {
                    rows += metric_line(*v, fin.currency) + "\n";
                    insight.metric_refs.emplace_back(name, period);
                }
            }
            if (const auto* p = table.projection(name)) {
                rows += metric_line(*p, fin.currency) + "\n";
                insight.metric_refs.emplace_back(name, p->period);
            }
        }
        PromptEnvelope prompt = envelope(
            options, "concept",
            options.library().render("concept", {{"company", fin.company_name.empty() ? fin.ticker : fin.company_name},
                                                 {"ticker", fin.ticker},
                                                 {"question", q.text}}));
        prompt.context_blocks.emplace_back("company", company_block(fin));
        if (!rows.empty()) prompt.context_blocks.emplace_back("metrics", rows);
        if (q.use_documents) {
            for (const auto* d : documents) {
                prompt.context_blocks.emplace_back("document:" + d->id, trim_utf8(d->body, options.excerpt_budget_bytes));
                insight.document_refs.push_back(d->id);
            }
        }
        if (rows.empty() && insight.document_refs.empty()) {
            throw Error(ErrorCode::EmptyContext, "question has neither metric rows nor documents",
                        {{"question", q.id}});
        }
        insight.prompt_sha256 = prompt.hash();
        insight.answer = clean_answer(invoke(provider, prompt), provider, prompt);
        insights[i] = std::move(insight);
    });
    return insights;
}

Insight answer_financial_query(const std::string& query, const ingestion::CompanyFinancials& fin,
                               const metrics::MetricTable& table, LlmProvider& provider, const AgentOptions& options) {
    if (query.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error(ErrorCode::InvalidArgument, "query is empty");
    }
    if (table.empty()) throw Error(ErrorCode::EmptyContext, "metric table is empty", {{"ticker", fin.ticker}});
    Insight insight;
    insight.id = "query";
    insight.question = query;
    insight.kind = InsightKind::QueryResponse;
    for (const auto& [key, v] : table.rows) insight.metric_refs.push_back(key);
    for (const auto& [name, v] : table.projections) insight.metric_refs.emplace_back(name, v.period);

    PromptEnvelope prompt = envelope(
        options, "query",
        options.library().render("query", {{"company", fin.company_name.empty() ? fin.ticker : fin.company_name},
                                           {"ticker", fin.ticker},
                                           {"query", query}}));
    prompt.context_blocks.emplace_back("company", company_block(fin));
    prompt.context_blocks.emplace_back("metric_table", render_metric_table(table, fin.currency));
    insight.prompt_sha256 = prompt.hash();
    insight.answer = clean_answer(invoke(provider, prompt), provider, prompt);
    return insight;
}

CompetitorBenchmark benchmark_competitors(const ingestion::CompanyFinancials& subject,
                                          const std::vector<ingestion::CompanyFinancials>& peers,
                                          LlmProvider& provider, const AgentOptions& options) {
    std::map<std::string, const ingestion::CompanyFinancials*> companies;
    for (const auto& p : peers)
        if (p.ticker != subject.ticker) companies[p.ticker] = &p;
    if (companies.empty()) {
        throw Error(ErrorCode::NoComparablePeriod, "no peers to benchmark against", {{"subject", subject.ticker}});
    }

    std::string period;
    for (auto it = subject.periods.rbegin(); it != subject.periods.rend() && period.empty(); ++it) {
        const bool shared = std::all_of(companies.begin(), companies.end(),
                                        [&](const auto& kv) { return kv.second->find(it->period) != nullptr; });
        if (shared) period = it->period;
    }
    if (period.empty()) {
        throw Error(ErrorCode::NoComparablePeriod, "subject and peers share no reporting period",
                    {{"subject", subject.ticker}});
    }

    CompetitorBenchmark b;
    b.subject = subject.ticker;
    b.period = period;
    for (const auto& [ticker, fin] : companies) b.peers.push_back(ticker);
    companies[subject.ticker] = &subject;

    std::map<std::string, metrics::MetricTable> tables;
    for (const auto& [ticker, fin] : companies) tables[ticker] = metrics::build_metric_table(*fin);
    std::string block = "subject: " + subject.ticker + "\nperiod: " + period + "\n";
    for (MetricName name : kBenchmarkMetrics) {
        for (const auto& [ticker, table] : tables) {
            if (const auto* v = table.find(name, period)) {
                b.metrics[std::string(metrics::to_string(name))][ticker] = v->value;
                block += std::string(metrics::to_string(name)) + " " + ticker + ": " +
                         display_metric(*v, fin_currency(companies, ticker)) + "\n";
            }
        }
    }
    std::string peer_list;
    for (const auto& p : b.peers) peer_list += (peer_list.empty() ? "" : ", ") + p;
    PromptEnvelope prompt = envelope(
        options, "benchmark",
        options.library().render("benchmark", {{"subject", subject.ticker}, {"peers", peer_list}, {"period", period}}));
    prompt.context_blocks.emplace_back("benchmark", block);
    b.prompt_sha256 = prompt.hash();
    b.commentary = clean_answer(invoke(provider, prompt), provider, prompt);
    return b;
}

ThesisContent run_thesis_cot(const std::vector<Insight>& insights, const valuation::ValuationSummary& valuation,
                             const CompetitorBenchmark& benchmark, LlmProvider& provider, const AgentOptions& options,
                             std::string_view currency) {
    if (insights.empty()) throw Error(ErrorCode::EmptyContext, "thesis needs at least one insight");
    const std::string rating(valuation::to_string(valuation.rating));
    const std::string& ticker = benchmark.subject;

    std::vector<std::pair<std::string, std::string>> context;
    context.emplace_back("valuation", render_valuation(valuation, currency));
    for (const auto& i : insights) context.emplace_back("insight:" + i.id, "Q: " + i.question + "\nA: " + i.answer);
    context.emplace_back("benchmark", benchmark.commentary);

    ThesisContent content;
    content.rating = valuation.rating;
    auto run = [&](const std::string& task, const std::string& template_name, bool must_state) {
        PromptEnvelope prompt =
            envelope(options, task, options.library().render(template_name, {{"ticker", ticker}, {"rating", rating}}));
        prompt.context_blocks = context;
        for (int attempt = 0;; ++attempt) {
            std::string text = clean_answer(invoke(provider, prompt), provider, prompt);
            const auto tokens = find_rating_tokens(text);
            const bool contradicts = std::any_of(tokens.begin(), tokens.end(),
                                                 [&](auto r) { return r != valuation.rating; });
            if (!contradicts && (!must_state || !tokens.empty())) return text;
            if (attempt == 1) {
                std::string found;
                for (auto r : tokens) found += (found.empty() ? "" : ",") + std::string(valuation::to_string(r));
                throw Error(ErrorCode::RatingMismatch, "narrative disagrees with the valuation rating after retry",
                            {{"task", task}, {"expected", rating}, {"found", found.empty() ? "none" : found}});
            }
            ++content.corrections;
            prompt.user_text += "\n\n" + options.library().render("correction", {{"rating", rating}});
        }
    };
    content.thesis = run("thesis.narrative", "thesis_narrative", false);
    content.risks = run("thesis.risk", "thesis_risk", false);
    content.rationale = run("thesis.rationale", "thesis_rationale", true);
    return content;
}

}  // namespace eqr::agents
