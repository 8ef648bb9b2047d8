#include "eqr/agents/provider.hpp"

#include "eqr/common/error.hpp"
#include "eqr/common/files.hpp"
#include "eqr/common/hashing.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace eqr::agents {

using nlohmann::json;

std::string invoke(LlmProvider& provider, const PromptEnvelope& prompt) {
    try {
        return provider.complete(prompt);
    } catch (const Error& e) {
        auto details = e.details();
        details["provider"] = provider.name();
        details["prompt_sha256"] = prompt.hash();
        details["cause"] = std::string(to_string(e.code()));
        throw Error(ErrorCode::ProviderFailure, e.message(), details);
    } catch (const std::exception& e) {
        throw Error(ErrorCode::ProviderFailure, e.what(),
                    {{"provider", provider.name()}, {"prompt_sha256", prompt.hash()}});
    }
}

// ---- mock -------------------------------------------------------------------

namespace {

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) out.push_back(line);
    return out;
}

std::string join_labels(const PromptEnvelope& p, std::string_view prefix = {}) {
    std::string out;
    for (const auto& [label, text] : p.context_blocks) {
        if (label.rfind(prefix, 0) != 0) continue;
        if (!out.empty()) out += ", ";
        out += label;
    }
    return out.empty() ? "no context" : out;
}

std::string bullets(const std::string* block) {
    std::string out;
    if (!block) return out;
    for (const auto& line : lines_of(*block)) out += "- " + line + "\n";
    return out;
}

std::string value_after(const std::string* block, std::string_view key) {
    if (!block) return {};
    for (const auto& line : lines_of(*block))
        if (line.rfind(key, 0) == 0) return line.substr(key.size());
    return {};
}

struct ReportFeatures {
    int headings = 0;
    int tables = 0;
    std::size_t words = 0;
};

ReportFeatures features_of(const std::string& report) {
    ReportFeatures f;
    for (const auto& line : lines_of(report)) {
        if (line.rfind("# ", 0) == 0) ++f.headings;
        if (line.rfind("|---", 0) == 0 || line.rfind("| ---", 0) == 0) ++f.tables;
    }
    std::istringstream in(report);
    for (std::string w; in >> w;) ++f.words;
    return f;
}

double half_points(double v) { return std::clamp(std::round(v * 2.0) / 2.0, 0.0, 10.0); }

std::string score_text(double v) {
    return v == std::floor(v) ? fmt::format("{:.0f}", v) : fmt::format("{:.1f}", v);
}

std::string mock_judge(const PromptEnvelope& p, std::string_view dimension) {
    const std::string* report = p.context("report");
    const ReportFeatures f = features_of(report ? *report : std::string());
    const double structure = std::min(f.headings, 6) / 6.0;
    const double accuracy = half_points(5.0 + 2.0 * structure + std::min(f.tables, 3));
    const double logicality = half_points(4.0 + 5.0 * structure + (f.headings >= 6 ? 1.0 : 0.0));
    const double storytelling =
        half_points(4.0 + 3.0 * structure + 3.0 * static_cast<double>(std::min<std::size_t>(f.words, 1200)) / 1200.0);
    const std::string shape = fmt::format("The report has {} top-level sections, {} tables and {} words.", f.headings,
                                          f.tables, f.words);
    std::string out;
    if (dimension.empty() || dimension == "accuracy") {
        out += "[Accuracy] " + score_text(accuracy) + ":\n" + shape + " Figures are tabulated where they are used.\n\n";
    }
    if (dimension.empty() || dimension == "logicality") {
        out += "[Logicality] " + score_text(logicality) + ":\n" + shape + " Sections follow the analysis order.\n\n";
    }
    if (dimension.empty() || dimension == "storytelling") {
        out += "[Storytelling] " + score_text(storytelling) + ":\n" + shape + " Narrative length drives engagement.\n";
    }
    while (!out.empty() && out.back() == '\n') out.pop_back();
    return out + "\n";
}

std::string mock_baseline(const PromptEnvelope& p, std::string_view method) {
    const std::string* table = p.context("metric_table");
    std::string out = "# Summary\nReport prepared with the " + std::string(method) + " strategy from " +
                      join_labels(p) + ".\n";
    if (method != "zero_shot") out += "# Financials\n";
    out += bullets(table);
    if (method == "plain_cot") out += "# Risks\nRisks were not quantified in the supplied context.\n";
    return out;
}

}  // namespace

std::string MockProvider::generate(const PromptEnvelope& p) {
    const std::string& task = p.task;
    if (task == "concept" || task == "query") {
        std::string rows = bullets(p.context("metrics")) + bullets(p.context("metric_table"));
        if (rows.empty()) rows = "No metric rows were supplied.\n";
        return "Context reviewed: " + join_labels(p) + ".\n" + rows;
    }
    if (task == "benchmark") {
        return "Peer benchmark for " + value_after(p.context("benchmark"), "subject: ") + ".\n" +
               bullets(p.context("benchmark"));
    }
    if (task == "thesis.narrative") {
        return "Thesis drawing on " + join_labels(p, "insight:") + ".\n" + bullets(p.context("valuation"));
    }
    if (task == "thesis.risk") {
        return "Risk review drawing on " + join_labels(p, "insight:") + ".\n" + bullets(p.context("valuation"));
    }
    if (task == "thesis.rationale") {
        return "Recommendation: " + value_after(p.context("valuation"), "rating: ") + ".\n" +
               bullets(p.context("valuation"));
    }
    if (task == "judge") return mock_judge(p, {});
    if (task.rfind("judge.", 0) == 0) return mock_judge(p, std::string_view(task).substr(6));
    if (task.rfind("baseline.", 0) == 0) return mock_baseline(p, std::string_view(task).substr(9));
    return "Context labels: " + join_labels(p) + ".\n";
}

// ---- scripted ---------------------------------------------------------------

ScriptedProvider::ScriptedProvider(std::string name, Script script, bool deterministic)
    : name_(std::move(name)), script_(std::move(script)), deterministic_(deterministic) {}

std::string ScriptedProvider::generate(const PromptEnvelope& prompt) {
    std::lock_guard lock(mutex_);
    return script_(prompt);
}

// ---- replay -----------------------------------------------------------------

ReplayProvider::ReplayProvider(std::filesystem::path file, std::shared_ptr<LlmProvider> recorder)
    : file_(std::move(file)), recorder_(std::move(recorder)) {
    std::error_code ec;
    if (!std::filesystem::exists(file_, ec)) {
        if (!recorder_) throw Error(ErrorCode::ConfigError, "replay file not found", {{"path", file_.string()}});
        return;
    }
    std::istringstream in(read_file(file_));
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            records_[j.at("prompt_sha256").get<std::string>()] = {j.value("task", ""),
                                                                  j.at("completion").get<std::string>()};
        } catch (const json::exception&) {
            throw Error(ErrorCode::ConfigError, "malformed replay record",
                        {{"path", file_.string()}, {"line", std::to_string(line_no)}});
        }
    }
}

std::string ReplayProvider::identity() const {
    return recorder_ ? "replay+record:" + recorder_->identity() : "replay:" + file_.filename().string();
}

std::size_t ReplayProvider::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

std::string ReplayProvider::generate(const PromptEnvelope& prompt) {
    const std::string key = prompt.hash();
    {
        std::lock_guard lock(mutex_);
        if (auto it = records_.find(key); it != records_.end()) return it->second.second;
        if (!recorder_) {
            throw Error(ErrorCode::ProviderFailure, "no recorded completion for prompt",
                        {{"task", prompt.task}, {"path", file_.string()}});
        }
    }
    std::string completion = recorder_->complete(prompt);
    std::lock_guard lock(mutex_);
    records_[key] = {prompt.task, completion};
    save_locked();
    return completion;
}

void ReplayProvider::save_locked() const {
    std::string out;
    for (const auto& [hash, record] : records_) {
        out += json{{"prompt_sha256", hash}, {"task", record.first}, {"completion", record.second}}.dump() + "\n";
    }
    write_file_atomic(file_, out);
}

// ---- http chat completions -----------------------------------------------------

HttpChatProvider::HttpChatProvider(HttpChatConfig config, std::shared_ptr<http::Client> client, http::Timing timing)
    : config_(std::move(config)),
      client_(std::move(client)),
      timing_(timing),
      limiter_(config_.retry.max_requests_per_second, timing) {
    if (config_.endpoint.empty()) throw Error(ErrorCode::ConfigError, "chat provider endpoint is not configured");
    if (config_.model.empty()) throw Error(ErrorCode::ConfigError, "chat provider model is not configured");
    const char* token = std::getenv(config_.token_env.c_str());
    if (!token || !*token) {
        throw Error(ErrorCode::ConfigError, "provider token environment variable is unset",
                    {{"variable", config_.token_env}});
    }
    token_ = token;
}

std::string HttpChatProvider::generate(const PromptEnvelope& prompt) {
    json messages = json::array();
    if (!prompt.system_text.empty()) messages.push_back({{"role", "system"}, {"content", prompt.system_text}});
    messages.push_back({{"role", "user"}, {"content", prompt.render_user()}});
    const json body{{"model", config_.model},
                    {"messages", messages},
                    {"temperature", prompt.temperature},
                    {"max_tokens", prompt.max_tokens}};
    http::Request request;
    request.method = "POST";
    request.url = config_.endpoint;
    request.headers = {{"Authorization", "Bearer " + token_}, {"Content-Type", "application/json"}};
    request.body = body.dump();
    request.timeout = config_.timeout;
    const http::Response response = http::send_with_retry(*client_, request, config_.retry, limiter_, timing_, name());
    if (response.status != 200) {
        throw Error(ErrorCode::ProviderFailure, "chat completion request failed",
                    {{"status", std::to_string(response.status)}, {"body", response.body.substr(0, 200)}});
    }
    try {
        const json reply = json::parse(response.body);
        std::string content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
        if (content.empty()) throw Error(ErrorCode::ProviderFailure, "chat completion is empty");
        return content;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ProviderFailure, "chat completion response is malformed", {{"reason", e.what()}});
    }
}

}  // namespace eqr::agents
