#include "eqr/pipeline/pipeline.hpp"

#include "eqr/common/build_info.hpp"
#include "eqr/common/error.hpp"
#include "eqr/common/files.hpp"
#include "eqr/common/hashing.hpp"
#include "eqr/common/time.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace eqr::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& message, const std::string& key) {
    throw Error(ErrorCode::ConfigError, message, {{"key", key}});
}

bool credential_like(std::string key) {
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    static const std::set<std::string> exact{"token", "api_key", "apikey", "secret", "password", "authorization",
                                             "bearer", "access_token", "auth_token"};
    if (exact.count(key)) return true;
    for (std::string_view suffix : {"_token", "_secret", "_password", "_api_key", "_apikey"})
        if (key.size() > suffix.size() && key.compare(key.size() - suffix.size(), suffix.size(), suffix) == 0)
            return true;
    return false;
}

void reject_credentials(const json& j, const std::string& where) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) {
            const std::string path = where.empty() ? k : where + "." + k;
            if (credential_like(k)) {
                throw Error(ErrorCode::ConfigError,
                            "credentials are read from environment variables only, never from config files",
                            {{"key", path}});
            }
            reject_credentials(v, path);
        }
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) reject_credentials(j[i], where + "[" + std::to_string(i) + "]");
    }
}

/// Reads keys of one object, rejecting any the caller did not ask about.
class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) config_error("expected an object", where_.empty() ? "<root>" : where_);
    }
    ~Reader() noexcept(false) {
        if (std::uncaught_exceptions()) return;
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) config_error("unknown configuration key", key(k));
    }

    bool has(const std::string& k) {
        seen_.insert(k);
        return j_.contains(k) && !j_.at(k).is_null();
    }
    template <typename T>
    void get(const std::string& k, T& out) {
        if (!has(k)) return;
        try {
            out = j_.at(k).get<T>();
        } catch (const json::exception&) {
            config_error("configuration value has the wrong type", key(k));
        }
    }
    void path(const std::string& k, fs::path& out, const fs::path& base) {
        std::string s;
        get(k, s);
        if (!s.empty()) out = resolve(s, base);
    }
    void path(const std::string& k, std::optional<fs::path>& out, const fs::path& base) {
        std::string s;
        get(k, s);
        if (!s.empty()) out = resolve(s, base);
    }
    const json& at(const std::string& k) {
        seen_.insert(k);
        return j_.at(k);
    }
    std::string key(const std::string& k) const { return where_.empty() ? k : where_ + "." + k; }

    static fs::path resolve(const std::string& s, const fs::path& base) {
        const fs::path p(s);
        return p.is_absolute() || base.empty() ? p : (base / p).lexically_normal();
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

ProviderSettings read_provider(const json& j, const std::string& where, const fs::path& base) {
    ProviderSettings p;
    Reader r(j, where);
    r.get("kind", p.kind);
    r.path("replay_file", p.replay_file, base);
    r.get("record", p.record);
    r.get("endpoint", p.endpoint);
    r.get("model", p.model);
    r.get("token_env", p.token_env);
    return p;
}

json provider_json(const ProviderSettings& p, bool with_paths) {
    json j{{"kind", p.kind}, {"record", p.record}, {"endpoint", p.endpoint}, {"model", p.model},
           {"token_env", p.token_env}};
    if (p.replay_file) {
        j["replay_file"] = with_paths ? json(p.replay_file->string()) : json(p.replay_file->filename().string());
    }
    return j;
}

json valuation_json(const valuation::ValuationConfig& v) {
    json j{{"current_price", v.current_price},
           {"wacc",
            {{"equity_value", v.wacc.equity_value},
             {"debt_value", v.wacc.debt_value},
             {"cost_of_equity", v.wacc.cost_of_equity},
             {"cost_of_debt", v.wacc.cost_of_debt},
             {"tax_rate", v.wacc.tax_rate}}},
           {"tax_rate_from_financials", v.tax_rate_from_financials},
           {"horizon_years", v.horizon_years},
           {"terminal_growth", v.terminal_growth},
           {"capital_intensity", v.capital_intensity},
           {"thresholds", {{"buy", v.thresholds.buy}, {"sell", v.thresholds.sell}}}};
    if (v.discount_rate) j["discount_rate"] = *v.discount_rate;
    return j;
}

valuation::ValuationConfig read_valuation(const json& j) {
    valuation::ValuationConfig v;
    Reader r(j, "valuation");
    r.get("current_price", v.current_price);
    if (r.has("wacc")) {
        Reader w(r.at("wacc"), "valuation.wacc");
        w.get("equity_value", v.wacc.equity_value);
        w.get("debt_value", v.wacc.debt_value);
        w.get("cost_of_equity", v.wacc.cost_of_equity);
        w.get("cost_of_debt", v.wacc.cost_of_debt);
        w.get("tax_rate", v.wacc.tax_rate);
    }
    r.get("tax_rate_from_financials", v.tax_rate_from_financials);
    r.get("horizon_years", v.horizon_years);
    r.get("terminal_growth", v.terminal_growth);
    r.get("capital_intensity", v.capital_intensity);
    if (r.has("discount_rate")) {
        double d = 0.0;
        r.get("discount_rate", d);
        v.discount_rate = d;
    }
    if (r.has("thresholds")) {
        Reader t(r.at("thresholds"), "valuation.thresholds");
        t.get("buy", v.thresholds.buy);
        t.get("sell", v.thresholds.sell);
    }
    return v;
}

std::string file_fingerprint(const fs::path& p) { return sha256_hex(read_file(p)); }

}  // namespace

RunConfig RunConfig::load(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what(),
                    {{"path", path.string()}});
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, "config file is unreadable", {{"path", path.string()}});
    }
    return from_json(j, fs::absolute(path).parent_path());
}

RunConfig RunConfig::from_json(const json& j, const fs::path& base) {
    reject_credentials(j, "");
    RunConfig c;
    c.aliases = default_data_dir() / "aliases.json";
    {
        Reader r(j, "");
        r.get("ticker", c.ticker);
        r.get("as_of", c.as_of);
        r.get("peers", c.peers);
        if (r.has("sources")) {
            Reader s(r.at("sources"), "sources");
            s.path("fixtures", c.sources.fixtures, base);
            s.get("since", c.sources.since);
            if (s.has("sec")) {
                Reader sec(s.at("sec"), "sources.sec");
                c.sources.sec = true;
                sec.get("enabled", c.sources.sec);
                auto& sc = c.sources.sec_config;
                sec.get("user_agent", sc.user_agent);
                sec.get("tickers_url", sc.tickers_url);
                sec.get("facts_url_template", sc.facts_url_template);
                sec.get("max_retries", sc.retry.max_retries);
                sec.get("max_requests_per_second", sc.retry.max_requests_per_second);
                long timeout = static_cast<long>(sc.timeout.count());
                sec.get("timeout_ms", timeout);
                sc.timeout = http::Milliseconds(timeout);
            }
        }
        r.path("aliases", c.aliases, base);
        r.path("question_bank", c.question_bank, base);
        r.path("prompts", c.prompts, base);
        if (r.has("provider")) c.provider = read_provider(r.at("provider"), "provider", base);
        if (r.has("judge")) c.judge = read_provider(r.at("judge"), "judge", base);
        if (r.has("agents")) {
            Reader a(r.at("agents"), "agents");
            a.get("max_in_flight", c.agents.max_in_flight);
            a.get("max_documents", c.agents.max_documents);
            a.get("excerpt_budget_bytes", c.agents.excerpt_budget_bytes);
            a.get("max_tokens", c.agents.max_tokens);
        }
        if (r.has("valuation")) c.valuation = read_valuation(r.at("valuation"));
        if (r.has("output")) {
            Reader o(r.at("output"), "output");
            o.path("directory", c.output_dir, base);
            if (o.has("formats")) {
                std::vector<std::string> names;
                o.get("formats", names);
                c.formats.clear();
                for (const auto& n : names) {
                    const auto f = report::parse_format(n);
                    if (!f) {
                        throw Error(ErrorCode::UnsupportedFormat, "report format must be markdown or html",
                                    {{"format", n}});
                    }
                    if (std::find(c.formats.begin(), c.formats.end(), *f) == c.formats.end()) c.formats.push_back(*f);
                }
            }
        }
        if (r.has("cache")) {
            Reader k(r.at("cache"), "cache");
            std::string dir;
            k.get("directory", dir);
            if (!dir.empty()) c.cache_dir = dir;  // relative: beneath the output directory
            k.get("enabled", c.cache);
        }
        r.get("seed", c.seed);
    }
    c.validate();
    return c;
}

json RunConfig::to_json() const {
    json j;
    j["ticker"] = ticker;
    j["as_of"] = as_of;
    j["peers"] = peers;
    json sources{{"since", this->sources.since}};
    if (this->sources.fixtures) sources["fixtures"] = this->sources.fixtures->string();
    if (this->sources.sec) {
        const auto& sc = this->sources.sec_config;
        sources["sec"] = {{"enabled", true},
                          {"user_agent", sc.user_agent},
                          {"tickers_url", sc.tickers_url},
                          {"facts_url_template", sc.facts_url_template},
                          {"max_retries", sc.retry.max_retries},
                          {"max_requests_per_second", sc.retry.max_requests_per_second},
                          {"timeout_ms", sc.timeout.count()}};
    }
    j["sources"] = sources;
    j["aliases"] = aliases.string();
    if (question_bank) j["question_bank"] = question_bank->string();
    if (prompts) j["prompts"] = prompts->string();
    j["provider"] = provider_json(provider, true);
    if (judge) j["judge"] = provider_json(*judge, true);
    j["agents"] = {{"max_in_flight", agents.max_in_flight},
                   {"max_documents", agents.max_documents},
                   {"excerpt_budget_bytes", agents.excerpt_budget_bytes},
                   {"max_tokens", agents.max_tokens}};
    j["valuation"] = valuation_json(valuation);
    std::vector<std::string> names;
    for (auto f : formats) names.emplace_back(f == report::Format::Markdown ? "markdown" : "html");
    j["output"] = {{"directory", output_dir.string()}, {"formats", names}};
    j["cache"] = {{"directory", cache_dir.string()}, {"enabled", cache}};
    j["seed"] = seed;
    return j;
}

void RunConfig::validate() const {
    if (ticker.empty()) config_error("ticker is required", "ticker");
    if (!sources.fixtures && !sources.sec) config_error("no data source configured", "sources");
    if (!as_of.empty() && !parse_date(as_of)) config_error("as_of must be YYYY-MM-DD", "as_of");
    if (!parse_date(sources.since)) config_error("since must be YYYY-MM-DD", "sources.since");
    for (const auto* p : {&provider, judge ? &*judge : nullptr}) {
        if (!p) continue;
        if (p->kind != "mock" && p->kind != "replay" && p->kind != "http")
            config_error("provider kind must be mock, replay or http", "provider.kind");
        if (p->kind == "replay" && !p->replay_file) config_error("replay provider needs replay_file", "provider.replay_file");
    }
    if (formats.empty()) config_error("at least one output format is required", "output.formats");
    if (agents.max_in_flight == 0) config_error("max_in_flight must be positive", "agents.max_in_flight");
}

std::string RunConfig::hash() const {
    json j = to_json();
    // locations and file formats do not define content; what they point at does
    j.erase("output");
    j.erase("cache");
    j["sources"].erase("fixtures");
    j["sources"]["fixture_source"] = sources.fixtures.has_value();
    j["aliases"] = file_fingerprint(aliases);
    j["question_bank"] = agents::question_bank_fingerprint(question_bank ? agents::load_question_bank(*question_bank)
                                                                         : agents::default_question_bank());
    j["prompts"] = (prompts ? agents::PromptLibrary::load(*prompts) : agents::PromptLibrary::shipped()).fingerprint();
    j["provider"] = provider_json(provider, false);
    if (judge) j["judge"] = provider_json(*judge, false);
    if (j["sources"].contains("sec")) j["sources"]["sec"].erase("user_agent");
    return sha256_hex(j.dump());
}

fs::path RunConfig::resolved_cache_dir() const { return cache_dir.is_absolute() ? cache_dir : output_dir / cache_dir; }

std::shared_ptr<agents::LlmProvider> make_provider(const ProviderSettings& s) {
    auto http_provider = [&] {
        agents::HttpChatConfig hc;
        hc.endpoint = s.endpoint;
        hc.model = s.model;
        hc.token_env = s.token_env;
        return std::make_shared<agents::HttpChatProvider>(hc, std::make_shared<http::CurlClient>());
    };
    if (s.kind == "mock") return std::make_shared<agents::MockProvider>();
    if (s.kind == "http") return http_provider();
    if (s.kind == "replay") {
        if (!s.replay_file) config_error("replay provider needs replay_file", "provider.replay_file");
        return std::make_shared<agents::ReplayProvider>(*s.replay_file,
                                                        s.record ? http_provider() : std::shared_ptr<agents::LlmProvider>());
    }
    config_error("provider kind must be mock, replay or http", "provider.kind");
}

}  // namespace eqr::pipeline
