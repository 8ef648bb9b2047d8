#include "eqr/agents/json.hpp"

#include "eqr/common/error.hpp"

namespace eqr::agents {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) {
    throw Error(ErrorCode::MalformedResponse, "serialized agent output has an invalid " + what);
}

}  // namespace

void to_json(json& j, const Insight& i) {
    json refs = json::array();
    for (const auto& [name, period] : i.metric_refs) refs.push_back({std::string(metrics::to_string(name)), period});
    j = json{{"id", i.id},
             {"question", i.question},
             {"answer", i.answer},
             {"kind", std::string(to_string(i.kind))},
             {"metric_refs", refs},
             {"document_refs", i.document_refs},
             {"prompt_sha256", i.prompt_sha256}};
}

void from_json(const json& j, Insight& i) {
    i.id = j.at("id").get<std::string>();
    i.question = j.at("question").get<std::string>();
    i.answer = j.at("answer").get<std::string>();
    const auto kind = parse_insight_kind(j.at("kind").get<std::string>());
    if (!kind) bad("insight kind");
    i.kind = *kind;
    i.metric_refs.clear();
    for (const auto& r : j.at("metric_refs")) {
        const auto name = metrics::parse_metric_name(r.at(0).get<std::string>());
        if (!name) bad("metric reference");
        i.metric_refs.emplace_back(*name, r.at(1).get<std::string>());
    }
    i.document_refs = j.at("document_refs").get<std::vector<std::string>>();
    i.prompt_sha256 = j.at("prompt_sha256").get<std::string>();
}

void to_json(json& j, const CompetitorBenchmark& b) {
    j = json{{"subject", b.subject},     {"peers", b.peers},           {"period", b.period},
             {"metrics", b.metrics},     {"commentary", b.commentary}, {"prompt_sha256", b.prompt_sha256}};
}

void from_json(const json& j, CompetitorBenchmark& b) {
    b.subject = j.at("subject").get<std::string>();
    b.peers = j.at("peers").get<std::vector<std::string>>();
    b.period = j.at("period").get<std::string>();
    b.metrics = j.at("metrics").get<std::map<std::string, std::map<std::string, double>>>();
    b.commentary = j.at("commentary").get<std::string>();
    b.prompt_sha256 = j.at("prompt_sha256").get<std::string>();
}

void to_json(json& j, const ThesisContent& t) {
    j = json{{"rating", std::string(valuation::to_string(t.rating))},
             {"thesis", t.thesis},
             {"risks", t.risks},
             {"rationale", t.rationale},
             {"corrections", t.corrections}};
}

void from_json(const json& j, ThesisContent& t) {
    const auto rating = valuation::parse_rating(j.at("rating").get<std::string>());
    if (!rating) bad("rating");
    t.rating = *rating;
    t.thesis = j.at("thesis").get<std::string>();
    t.risks = j.at("risks").get<std::string>();
    t.rationale = j.at("rationale").get<std::string>();
    t.corrections = j.at("corrections").get<int>();
}

}  // namespace eqr::agents
