#include "eqr/ingestion/sec_http_source.hpp"

#include "eqr/common/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <map>
#include <set>
#include <json.hpp>

namespace eqr::ingestion {

using nlohmann::json;

namespace {

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s;
}

long days_between(const Date& a, const Date& b) {
    using namespace std::chrono;
    const sys_days da = year_month_day{year{a.year}, month{static_cast<unsigned>(a.month)},
                                       day{static_cast<unsigned>(a.day)}};
    const sys_days db = year_month_day{year{b.year}, month{static_cast<unsigned>(b.month)},
                                       day{static_cast<unsigned>(b.day)}};
    return (db - da).count();
}

std::string format_value(double v) {
    if (v == static_cast<double>(static_cast<long long>(v))) return fmt::format("{}", static_cast<long long>(v));
    return fmt::format("{}", v);
}

}  // namespace

SecHttpSource::SecHttpSource(SecSourceConfig config, std::shared_ptr<http::Client> client, http::Timing timing)
    : config_(std::move(config)),
      client_(std::move(client)),
      timing_(timing),
      limiter_(config_.retry.max_requests_per_second, timing) {
    if (config_.user_agent.empty()) {
        throw Error(ErrorCode::ConfigError, "SEC source requires a user_agent naming the requester");
    }
}

http::Response SecHttpSource::get(const std::string& url) {
    http::Request request;
    request.url = url;
    request.timeout = config_.timeout;
    request.headers = {{"User-Agent", config_.user_agent}, {"Accept", "application/json"}};
    return http::send_with_retry(*client_, request, config_.retry, limiter_, timing_, name());
}

std::optional<long> SecHttpSource::lookup_cik(const std::string& ticker) {
    const http::Response response = get(config_.tickers_url);
    if (response.status != 200) {
        throw Error(ErrorCode::SourceUnavailable, "ticker map request failed",
                    {{"source", name()}, {"status", std::to_string(response.status)}});
    }
    json tickers;
    try {
        tickers = json::parse(response.body);
    } catch (const json::exception&) {
        throw Error(ErrorCode::SourceUnavailable, "ticker map is not valid JSON", {{"source", name()}});
    }
    const std::string wanted = upper(ticker);
    for (const auto& [key, entry] : tickers.items()) {
        if (entry.is_object() && upper(entry.value("ticker", "")) == wanted) {
            return entry.at("cik_str").get<long>();
        }
    }
    return std::nullopt;
}

FetchResult SecHttpSource::fetch(const FetchRequest& request) {
    FetchResult result;
    const bool wants_filings =
        request.kinds.count(SourceKind::SecFiling) > 0 || request.kinds.count(SourceKind::Fixture) > 0;
    auto cik = lookup_cik(request.ticker);
    if (!cik) return result;
    result.ticker_known = true;
    if (!wants_filings) return result;

    const std::string cik10 = fmt::format("{:010d}", *cik);
    std::string url = config_.facts_url_template;
    if (auto pos = url.find("{cik}"); pos != std::string::npos) url.replace(pos, 5, cik10);
    const http::Response response = get(url);
    if (response.status == 404) return result;
    if (response.status != 200) {
        throw Error(ErrorCode::SourceUnavailable, "company facts request failed",
                    {{"source", name()}, {"status", std::to_string(response.status)}});
    }

    const std::string now = utc_now_iso();
    RawDocument raw;
    raw.id = "sec-companyfacts-" + cik10;
    raw.company = request.ticker;
    raw.kind = SourceKind::SecFiling;
    raw.retrieved_at = now;
    raw.body = response.body;
    raw.content_type = "application/json";
    result.documents.push_back(raw);

    std::string statement = company_facts_to_statement(response.body, request.ticker, config_.concepts, request.since);
    if (!statement.empty()) {
        RawDocument derived;
        derived.id = "sec-facts-" + upper(request.ticker);
        derived.company = request.ticker;
        derived.kind = SourceKind::SecFiling;
        derived.retrieved_at = now;
        derived.body = std::move(statement);
        derived.content_type = std::string(kStatementContentType);
        result.documents.push_back(std::move(derived));
    }
    return result;
}

std::string company_facts_to_statement(const std::string& facts_json, const std::string& ticker,
                                       const std::vector<std::pair<std::string, std::string>>& concepts,
                                       const Date& since) {
    json facts;
    try {
        facts = json::parse(facts_json);
    } catch (const json::exception&) {
        throw Error(ErrorCode::ParseFailure, "company facts body is not valid JSON", {{"offset", "0"}});
    }
    struct Pick {
        double value = 0;
        std::string filed;
    };
    std::map<int, std::map<std::string, Pick>> by_year;  // fiscal year -> tag -> value
    std::map<std::string, std::string> field_of;
    for (const auto& [tag, field] : concepts) field_of[tag] = field;

    const json& namespaces = facts.contains("facts") ? facts["facts"] : json::object();
    for (const auto& [ns, ns_facts] : namespaces.items()) {
        for (const auto& [tag, field] : concepts) {
            if (!ns_facts.contains(tag)) continue;
            const json units = ns_facts[tag].value("units", json::object());
            for (const auto& [unit, entries] : units.items()) {
                if (unit != "USD" && unit != "shares") continue;
                for (const auto& e : entries) {
                    if (e.value("fp", "") != "FY" || e.value("form", "").rfind("10-K", 0) != 0) continue;
                    auto end = parse_date(e.value("end", ""));
                    if (!end || *end < since) continue;
                    int fiscal_year = end->year;
                    if (e.contains("start")) {
                        auto start = parse_date(e.value("start", ""));
                        if (!start) continue;
                        const long span = days_between(*start, *end);
                        if (span < 350 || span > 380) continue;
                    } else {
                        // instant facts (share counts) are dated at filing time
                        fiscal_year = e.value("fy", end->year);
                    }
                    const std::string filed = e.value("filed", "");
                    Pick& slot = by_year[fiscal_year][tag];
                    if (slot.filed.empty() || filed > slot.filed) slot = Pick{e.at("val").get<double>(), filed};
                }
            }
        }
    }
    std::string latest_filed;
    for (auto it = by_year.begin(); it != by_year.end();) {
        std::set<std::string> fields;
        for (const auto& [tag, pick] : it->second) fields.insert(field_of[tag]);
        if (fields.count("revenue") && fields.count("operating_expense") && fields.count("sga")) {
            for (const auto& [tag, pick] : it->second) latest_filed = std::max(latest_filed, pick.filed);
            ++it;
        } else {
            it = by_year.erase(it);
        }
    }
    if (by_year.empty()) return {};

    std::string out;
    out += "# derived from SEC company facts\n";
    out += "ticker: " + upper(ticker) + "\n";
    out += "company_name: " + facts.value("entityName", upper(ticker)) + "\n";
    out += "currency: USD\n";
    out += "scale: units\n";
    out += "form: 10-K\n";
    out += "filed: " + latest_filed + "\n";
    for (const auto& [year, items] : by_year) {
        out += fmt::format("\n[FY{}]\n", year);
        std::set<std::string> emitted;
        for (const auto& [tag, field] : concepts) {
            auto it = items.find(tag);
            if (it == items.end() || !emitted.insert(field).second) continue;
            out += tag + ": " + format_value(it->second.value) + "\n";
        }
    }
    return out;
}

}  // namespace eqr::ingestion
