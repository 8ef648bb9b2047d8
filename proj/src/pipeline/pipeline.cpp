#include "eqr/pipeline/pipeline.hpp"

#include "eqr/agents/json.hpp"
#include "eqr/common/build_info.hpp"
#include "eqr/common/error.hpp"
#include "eqr/common/files.hpp"
#include "eqr/common/hashing.hpp"
#include "eqr/common/time.hpp"
#include "eqr/ingestion/data_source.hpp"
#include "eqr/ingestion/json.hpp"
#include "eqr/ingestion/statement_parser.hpp"
#include "eqr/metrics/json.hpp"
#include "eqr/report/json.hpp"
#include "eqr/valuation/json.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <random>

namespace eqr::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- cache ------------------------------------------------------------------

StageCache::StageCache(fs::path dir, Warn warn) : dir_(std::move(dir)), warn_(std::move(warn)) {}

fs::path StageCache::entry_path(const std::string& stage, const std::string& key) const {
    return dir_ / stage / (key + ".json");
}

std::optional<json> StageCache::lookup(const std::string& stage, const std::string& key) const {
    const fs::path path = entry_path(stage, key);
    std::error_code ec;
    if (!fs::exists(path, ec)) return std::nullopt;
    std::string problem;
    try {
        const json entry = json::parse(read_file(path));
        const json& payload = entry.at("payload");
        if (entry.at("stage").get<std::string>() != stage || entry.at("key").get<std::string>() != key) {
            problem = "entry is filed under the wrong key";
        } else if (entry.at("sha256").get<std::string>() != sha256_hex(payload.dump())) {
            problem = "payload hash mismatch";
        } else {
            return payload;
        }
    } catch (const std::exception& e) {
        problem = std::string("entry is unreadable: ") + e.what();
    }
    fs::remove(path, ec);
    if (warn_) {
        const Error corruption(ErrorCode::CacheCorruption, "evicted corrupt cache entry (" + problem + ")",
                               {{"stage", stage}, {"path", path.string()}});
        warn_(corruption.what());
    }
    return std::nullopt;
}

void StageCache::store(const std::string& stage, const std::string& key, const json& payload) const {
    const fs::path path = entry_path(stage, key);
    fs::create_directories(path.parent_path());
    const json entry{{"stage", stage}, {"key", key}, {"sha256", sha256_hex(payload.dump())}, {"payload", payload}};
    write_file_atomic(path, entry.dump(1) + "\n");
}

// ---- lock -------------------------------------------------------------------

OutputLock::OutputLock(const fs::path& dir) {
    fs::create_directories(dir);
    const fs::path path = dir / ".eqr.lock";
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) {
        throw Error(ErrorCode::StorageFailure, "cannot open output lock file", {{"path", path.string()}});
    }
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw Error(ErrorCode::OutputLocked, "another run holds the output directory", {{"path", dir.string()}});
    }
}

OutputLock::~OutputLock() {
    if (fd_ >= 0) {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

std::string output_stem(const std::string& ticker, const std::string& as_of) { return ticker + "-" + as_of; }

// ---- manifest ---------------------------------------------------------------

namespace {

json manifest_json(const RunManifest& m, bool volatile_fields) {
    json stages = json::array();
    for (const auto& s : m.stages) {
        json j{{"name", s.name}, {"input_hash", s.input_hash}, {"output_hash", s.output_hash}};
        if (volatile_fields) {
            j["status"] = s.status;
            j["duration_ms"] = s.duration_ms;
        } else {
            // cached and freshly run stages describe the same content
            j["completed"] = s.status == "ran" || s.status == "cached";
        }
        stages.push_back(j);
    }
    json docs = json::array();
    for (const auto& [id, sha] : m.documents) docs.push_back({{"id", id}, {"sha256", sha}});
    json j{{"ticker", m.ticker},
           {"as_of", m.as_of},
           {"engine_version", m.engine_version},
           {"config_hash", m.config_hash},
           {"provider", m.provider},
           {"documents", docs},
           {"stages", stages},
           {"artifacts", m.artifacts},
           {"outputs", m.outputs},
           {"audit", {{"claims", m.audit_claims}, {"passed", m.audit_passed}}}};
    if (volatile_fields) {
        j["provider_calls"] = m.provider_calls;
        j["warnings"] = m.warnings;
    }
    return j;
}

}  // namespace

std::string RunManifest::content_hash() const { return sha256_hex(manifest_json(*this, false).dump()); }

json RunManifest::to_json() const {
    json j = manifest_json(*this, true);
    j["content_hash"] = content_hash();
    return j;
}

// ---- ingest -----------------------------------------------------------------

namespace {

/// Document store for runs without a cache; removed on scope exit.
class ScratchDir {
public:
    ScratchDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("eqr-store-" + std::to_string(rd()) + std::to_string(::getpid()));
        fs::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::vector<std::shared_ptr<ingestion::DataSource>> make_sources(const SourceSettings& s,
                                                                 std::set<ingestion::SourceKind>& kinds) {
    std::vector<std::shared_ptr<ingestion::DataSource>> sources;
    if (s.fixtures) {
        sources.push_back(std::make_shared<ingestion::FixtureSource>(*s.fixtures));
        kinds.insert(ingestion::SourceKind::Fixture);
    }
    if (s.sec) {
        sources.push_back(std::make_shared<ingestion::SecHttpSource>(s.sec_config, std::make_shared<http::CurlClient>()));
        kinds.insert(ingestion::SourceKind::SecFiling);
    }
    return sources;
}

IngestResult ingest_into(const RunConfig& config, ingestion::DocumentStore& store) {
    std::set<ingestion::SourceKind> kinds;
    const auto sources = make_sources(config.sources, kinds);
    const Date since = *parse_date(config.sources.since);
    const auto aliases = ingestion::AliasTable::load(config.aliases);

    IngestResult r;
    r.documents = ingestion::fetch_documents(config.ticker, kinds, since, sources, store);
    r.financials = ingestion::parse_statements(r.documents, aliases);
    std::vector<std::string> peers = config.peers.empty() ? r.financials.peers : config.peers;
    std::sort(peers.begin(), peers.end());
    peers.erase(std::unique(peers.begin(), peers.end()), peers.end());
    peers.erase(std::remove(peers.begin(), peers.end(), config.ticker), peers.end());
    for (const auto& peer : peers) {
        auto docs = ingestion::fetch_documents(peer, kinds, since, sources, store);
        r.peers.push_back(ingestion::parse_statements(docs, aliases));
        r.peer_documents.insert(r.peer_documents.end(), docs.begin(), docs.end());
    }
    return r;
}

}  // namespace

IngestResult ingest(const RunConfig& config) {
    config.validate();
    if (config.cache) {
        ingestion::DocumentStore store(config.resolved_cache_dir() / "documents");
        return ingest_into(config, store);
    }
    ScratchDir scratch;
    ingestion::DocumentStore store(scratch.path());
    return ingest_into(config, store);
}

// ---- run --------------------------------------------------------------------

namespace {

std::string json_hash(const json& j) { return sha256_hex(j.dump()); }

std::string as_of_from(const std::vector<ingestion::RawDocument>& docs) {
    std::string latest;
    for (const auto& d : docs) latest = std::max(latest, d.retrieved_at.substr(0, 10));
    return latest;
}

json agent_settings_json(const AgentSettings& a) {
    return {{"max_in_flight", a.max_in_flight},
            {"max_documents", a.max_documents},
            {"excerpt_budget_bytes", a.excerpt_budget_bytes},
            {"max_tokens", a.max_tokens}};
}

struct RunState {
    const RunConfig& config;
    RunManifest manifest;
    std::map<std::string, json> artifacts;  // completed stage -> payload
    std::optional<StageCache> cache;
    bool write_outputs = false;
};

void persist_partial(const RunState& st) {
    const fs::path dir = st.config.output_dir / "partial";
    fs::create_directories(dir);
    for (const auto& [stage, payload] : st.artifacts) write_file_atomic(dir / (stage + ".json"), payload.dump(1) + "\n");
    write_file_atomic(dir / "manifest.json", st.manifest.to_json().dump(2) + "\n");
}

/// Runs one stage, consulting the cache when a key is given.
template <typename Compute>
json run_stage(RunState& st, std::size_t index, const std::string& key, Compute&& compute) {
    StageRecord& rec = st.manifest.stages[index];
    rec.input_hash = key;
    const auto start = std::chrono::steady_clock::now();
    try {
        std::optional<json> payload;
        if (st.cache && !key.empty()) payload = st.cache->lookup(rec.name, key);
        if (payload) {
            rec.status = "cached";
        } else {
            payload = compute();
            rec.status = "ran";
            if (st.cache && !key.empty()) st.cache->store(rec.name, key, *payload);
        }
        rec.output_hash = json_hash(*payload);
        rec.duration_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        st.artifacts[rec.name] = *payload;
        return *payload;
    } catch (const Error& e) {
        rec.status = "failed";
        if (st.write_outputs) persist_partial(st);
        throw e.with_stage(rec.name);
    } catch (...) {
        rec.status = "failed";
        if (st.write_outputs) persist_partial(st);
        throw;
    }
}

}  // namespace

RunResult run_pipeline(const RunConfig& config, const RunOptions& options) {
    config.validate();
    std::shared_ptr<agents::LlmProvider> provider = options.provider ? options.provider : make_provider(config.provider);

    std::optional<OutputLock> lock;
    if (options.write_outputs) {
        lock.emplace(config.output_dir);
        std::error_code ec;
        fs::remove_all(config.output_dir / "partial", ec);
    }

    RunState st{config, {}, {}, std::nullopt, options.write_outputs};
    auto& m = st.manifest;
    auto warn = [&](const std::string& w) {
        m.warnings.push_back(w);
        if (options.warn) options.warn(w);
    };
    if (options.use_cache && config.cache) st.cache.emplace(config.resolved_cache_dir() / "stages", warn);

    m.ticker = config.ticker;
    m.engine_version = std::string(engine_version());
    m.config_hash = config.hash();
    m.provider = provider->identity();
    for (auto name : kStages) m.stages.push_back({std::string(name), "not_run", "", "", 0.0});
    const std::size_t calls_before = provider->calls();

    std::optional<agents::PromptLibrary> own_prompts;
    if (config.prompts) own_prompts = agents::PromptLibrary::load(*config.prompts);
    agents::AgentOptions agent_options;
    agent_options.questions =
        config.question_bank ? agents::load_question_bank(*config.question_bank) : agents::default_question_bank();
    agent_options.prompts = own_prompts ? &*own_prompts : nullptr;
    agent_options.max_in_flight = config.agents.max_in_flight;
    agent_options.max_documents = config.agents.max_documents;
    agent_options.excerpt_budget_bytes = config.agents.excerpt_budget_bytes;
    agent_options.max_tokens = config.agents.max_tokens;
    const std::string agent_fingerprint =
        HashBuilder()
            .add(agents::question_bank_fingerprint(agent_options.questions))
            .add(agent_options.library().fingerprint())
            .add(agent_settings_json(config.agents).dump())
            .add(provider->identity())
            .hex();

    // Data layer. Sources are always consulted so new filings are picked up;
    // everything downstream is keyed by what they returned.
    IngestResult data;
    const json ingest_out = run_stage(st, 0, "", [&] {
        data = ingest(config);
        return json{{"financials", data.financials},
                    {"peers", data.peers},
                    {"documents", [&] {
                         json docs = json::array();
                         for (const auto& d : data.documents) docs.push_back({{"id", d.id}, {"sha256", sha256_hex(d.body)}});
                         return docs;
                     }()}};
    });
    m.stages[0].input_hash = HashBuilder().add("ingest").add(config.hash()).hex();
    for (const auto& d : data.documents) m.documents.emplace_back(d.id, sha256_hex(d.body));
    for (const auto& d : data.peer_documents) m.documents.emplace_back(d.id, sha256_hex(d.body));
    std::sort(m.documents.begin(), m.documents.end());
    m.as_of = config.as_of.empty() ? as_of_from(data.documents) : config.as_of;
    const std::string fin_hash = json_hash(ingest_out.at("financials"));
    const std::string peers_hash = json_hash(ingest_out.at("peers"));
    const std::string docs_hash = json_hash(ingest_out.at("documents"));

    const json table_json = run_stage(st, 1, HashBuilder().add("metrics").add(fin_hash).hex(),
                                      [&] { return json(metrics::build_metric_table(data.financials)); });
    const auto table = table_json.get<metrics::MetricTable>();
    const std::string table_hash = json_hash(table_json);
    m.artifacts["metric_table"] = table_hash;

    // Concept layer
    const json insights_json = run_stage(
        st, 2, HashBuilder().add("concept").add(fin_hash).add(table_hash).add(docs_hash).add(agent_fingerprint).hex(),
        [&] {
            return json(agents::run_concept_cot(data.financials, table, data.documents, *provider, agent_options));
        });
    const auto insights = insights_json.get<std::vector<agents::Insight>>();
    m.artifacts["insights"] = json_hash(insights_json);

    const json valuation_json = run_stage(
        st, 3,
        HashBuilder().add("valuation").add(fin_hash).add(table_hash).add(config.to_json().at("valuation").dump()).hex(),
        [&] {
            auto projections = valuation::project_financials(data.financials, table, config.valuation.horizon_years);
            auto result = valuation::value_company(data.financials, table, projections, config.valuation);
            return json{{"projections", projections}, {"result", result}};
        });
    const auto projections = valuation_json.at("projections").get<std::vector<ingestion::FinancialPeriod>>();
    const auto valued = valuation_json.at("result").get<valuation::ValuationResult>();
    const std::string valuation_hash = json_hash(valuation_json);
    m.artifacts["valuation"] = valuation_hash;

    // Thesis layer
    const json thesis_json = run_stage(
        st, 4,
        HashBuilder()
            .add("thesis")
            .add(fin_hash)
            .add(peers_hash)
            .add(m.artifacts["insights"])
            .add(valuation_hash)
            .add(agent_fingerprint)
            .hex(),
        [&] {
            auto benchmark = agents::benchmark_competitors(data.financials, data.peers, *provider, agent_options);
            auto thesis = agents::run_thesis_cot(insights, valued.summary, benchmark, *provider, agent_options,
                                                 data.financials.currency);
            return json{{"benchmark", benchmark}, {"thesis", thesis}};
        });
    const auto benchmark = thesis_json.at("benchmark").get<agents::CompetitorBenchmark>();
    const auto thesis = thesis_json.at("thesis").get<agents::ThesisContent>();

    RunResult result;
    const std::string stem = output_stem(config.ticker, m.as_of);
    run_stage(st, 5, "", [&] {
        report::ReportInputs in;
        in.financials = &data.financials;
        in.table = &table;
        in.projections = &projections;
        in.valuation = &valued.summary;
        in.schedule = &valued.schedule;
        in.insights = &insights;
        in.benchmark = &benchmark;
        in.thesis = &thesis;
        in.as_of = m.as_of;
        in.metadata = {m.engine_version, m.config_hash, m.provider};
        result.document = report::assemble_report(in);
        result.audit = report::audit_facts(result.document, table, valued.summary);
        result.rendered[report::Format::Markdown] = report::render(result.document, report::Format::Markdown);
        for (auto f : config.formats) result.rendered[f] = report::render(result.document, f);
        return json{{"document", result.document}, {"audit", result.audit}};
    });
    m.stages[5].input_hash = HashBuilder()
                                 .add("report")
                                 .add(table_hash)
                                 .add(valuation_hash)
                                 .add(json_hash(thesis_json))
                                 .add(m.artifacts["insights"])
                                 .add(m.as_of)
                                 .add(m.config_hash)
                                 .hex();
    m.artifacts["report"] = sha256_hex(result.rendered.at(report::Format::Markdown));
    m.audit_claims = result.audit.claims.size();
    m.audit_passed = result.audit.passed();
    if (!m.audit_passed) {
        for (const auto* c : result.audit.failures())
            warn("fact audit: no source for " + c->literal + " at " + c->location);
    }
    m.provider_calls = provider->calls() - calls_before;

    for (auto f : config.formats) m.outputs.push_back(stem + "." + std::string(report::extension(f)));
    m.outputs.push_back(stem + ".manifest.json");
    result.manifest = m;
    if (options.write_outputs) {
        for (auto f : config.formats) {
            const fs::path p = config.output_dir / (stem + "." + std::string(report::extension(f)));
            write_file_atomic(p, result.rendered.at(f));
            result.files.push_back(p);
        }
        const fs::path mp = config.output_dir / (stem + ".manifest.json");
        write_file_atomic(mp, m.to_json().dump(2) + "\n");
        result.files.push_back(mp);
    }
    return result;
}

void register_generators(evaluation::GeneratorRegistry& registry, const RunConfig& config,
                         std::shared_ptr<agents::LlmProvider> provider) {
    const IngestResult data = ingest(config);
    const auto table = metrics::build_metric_table(data.financials);
    std::string periods;
    for (const auto& p : data.financials.periods) periods += (periods.empty() ? "" : ", ") + p.period;
    evaluation::BaselineContext ctx{data.financials.ticker, data.financials.company_name,
                                    "ticker: " + data.financials.ticker + "\ncompany: " + data.financials.company_name +
                                        "\ncurrency: " + data.financials.currency + "\nperiods: " + periods,
                                    agents::render_metric_table(table, data.financials.currency)};
    // the registry outlives this call, so the provider is kept alive by the pipeline closure
    evaluation::register_baselines(registry, ctx, *provider);
    registry.add("pipeline", [config, provider](int) {
        RunOptions o;
        o.provider = provider;
        o.write_outputs = false;
        o.use_cache = false;
        return run_pipeline(config, o).rendered.at(report::Format::Markdown);
    });
}

}  // namespace eqr::pipeline
