#pragma once

#include "eqr/agents/agents.hpp"
#include "eqr/agents/provider.hpp"
#include "eqr/evaluation/evaluation.hpp"
#include "eqr/ingestion/sec_http_source.hpp"
#include "eqr/report/report.hpp"
#include "eqr/valuation/valuation.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace eqr::pipeline {

// ---- configuration ----------------------------------------------------------

struct SourceSettings {
    std::optional<std::filesystem::path> fixtures;  // FixtureSource directory
    bool sec = false;                               // live SEC company-facts source
    ingestion::SecSourceConfig sec_config;
    std::string since = "2000-01-01";
};

struct ProviderSettings {
    std::string kind = "mock";  // mock | replay | http
    std::optional<std::filesystem::path> replay_file;
    bool record = false;  // replay misses are forwarded to the http settings and saved
    std::string endpoint;
    std::string model;
    std::string token_env = "EQR_LLM_API_KEY";  // the variable name, never its value
};

struct AgentSettings {
    std::size_t max_in_flight = 4;
    std::size_t max_documents = 3;
    std::size_t excerpt_budget_bytes = 2000;
    int max_tokens = 1024;
};

struct RunConfig {
    std::string ticker;
    std::string as_of;  // empty: date of the newest subject document
    std::vector<std::string> peers;  // empty: peers declared by the filings
    SourceSettings sources;
    std::filesystem::path aliases;
    std::optional<std::filesystem::path> question_bank;  // none: built-in bank
    std::optional<std::filesystem::path> prompts;        // none: shipped templates
    ProviderSettings provider;
    std::optional<ProviderSettings> judge;  // none: same as provider
    AgentSettings agents;
    valuation::ValuationConfig valuation;
    std::filesystem::path output_dir = "out";
    std::filesystem::path cache_dir = "cache";  // relative paths resolve under output_dir
    bool cache = true;
    std::vector<report::Format> formats{report::Format::Markdown, report::Format::Html};
    std::uint64_t seed = 0;  // reserved; deterministic paths ignore it

    /// Relative paths resolve against the file's directory. Any key named
    /// like a credential ("token", "api_key", "secret", "password") is a
    /// ConfigError: secrets come from the environment only.
    static RunConfig load(const std::filesystem::path& path);
    static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
    nlohmann::json to_json() const;

    /// Throws ConfigError on missing ticker, unknown provider kind, or no data source.
    void validate() const;

    /// Hash of the content-defining settings. Filesystem locations are left
    /// out and replaced by fingerprints of what they point at, so the hash
    /// is independent of key order and of where the repository lives.
    std::string hash() const;

    std::filesystem::path resolved_cache_dir() const;
};

std::shared_ptr<agents::LlmProvider> make_provider(const ProviderSettings& settings);

// ---- cache ------------------------------------------------------------------

/// Stage artifacts under <dir>/<stage>/<key>.json, each stored with the hash
/// of its payload. A payload that no longer matches its hash (or does not
/// parse) is a miss: the entry is evicted and a warning is reported.
class StageCache {
public:
    using Warn = std::function<void(const std::string&)>;
    StageCache(std::filesystem::path dir, Warn warn = {});

    std::optional<nlohmann::json> lookup(const std::string& stage, const std::string& key) const;
    void store(const std::string& stage, const std::string& key, const nlohmann::json& payload) const;
    std::filesystem::path entry_path(const std::string& stage, const std::string& key) const;

private:
    std::filesystem::path dir_;
    Warn warn_;
};

// ---- run --------------------------------------------------------------------

inline constexpr std::array<std::string_view, 6> kStages{"ingest", "metrics", "concept", "valuation", "thesis", "report"};

struct StageRecord {
    std::string name;
    std::string status;  // "ran", "cached", "failed", "not_run"
    std::string input_hash;
    std::string output_hash;
    double duration_ms = 0.0;
};

struct RunManifest {
    std::string ticker;
    std::string as_of;
    std::string engine_version;
    std::string config_hash;
    std::string provider;
    std::vector<std::pair<std::string, std::string>> documents;  // (id, body sha256), sorted by id
    std::vector<StageRecord> stages;                             // always all six, in order
    std::map<std::string, std::string> artifacts;                // metric_table, insights, valuation, report
    std::vector<std::string> outputs;                            // file names in the output directory
    std::size_t provider_calls = 0;
    std::size_t audit_claims = 0;
    bool audit_passed = false;
    std::vector<std::string> warnings;

    /// Excludes timings, cache status, call counts and warnings: identical
    /// configs and inputs give identical hashes whether or not the cache hit.
    std::string content_hash() const;
    nlohmann::json to_json() const;
};

struct IngestResult {
    std::vector<ingestion::RawDocument> documents;  // subject documents, sorted by id
    ingestion::CompanyFinancials financials;
    std::vector<ingestion::CompanyFinancials> peers;
    std::vector<ingestion::RawDocument> peer_documents;
};

/// Fetches the subject and its peers through the configured sources.
IngestResult ingest(const RunConfig& config);

struct RunOptions {
    /// Replaces the provider built from the config.
    std::shared_ptr<agents::LlmProvider> provider;
    StageCache::Warn warn;
    bool write_outputs = true;
    bool use_cache = true;  // further gated by config.cache
};

struct RunResult {
    report::ReportDocument document;
    RunManifest manifest;
    report::FactAudit audit;
    std::map<report::Format, std::string> rendered;
    std::vector<std::filesystem::path> files;  // written outputs, manifest last
};

/// Runs ingest, metrics, concept, valuation, thesis and report in that
/// order. Stage errors are rethrown annotated with the stage; when outputs
/// are enabled the finished stages' artifacts and a partial manifest are
/// left under <output>/partial/. Takes an exclusive lock on the output
/// directory (OutputLocked when another run holds it).
RunResult run_pipeline(const RunConfig& config, const RunOptions& options = {});

/// Exclusive advisory lock on <dir>/.eqr.lock, released on destruction.
class OutputLock {
public:
    explicit OutputLock(const std::filesystem::path& dir);
    ~OutputLock();
    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;

private:
    int fd_ = -1;
};

/// Output file stem "<ticker>-<as_of>".
std::string output_stem(const std::string& ticker, const std::string& as_of);

/// Registers "pipeline" (uncached, nothing written, markdown text) and the
/// single-prompt baselines over the same ingested data.
void register_generators(evaluation::GeneratorRegistry& registry, const RunConfig& config,
                         std::shared_ptr<agents::LlmProvider> provider);

}  // namespace eqr::pipeline
