#include "eqr/report/json.hpp"

#include "eqr/common/error.hpp"

namespace eqr::report {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<BlockKind, std::string_view>, 3> kBlockKinds{{
    {BlockKind::Narrative, "narrative"},
    {BlockKind::Notes, "notes"},
    {BlockKind::Table, "table"},
}};

std::string block_kind_name(BlockKind k) {
    for (const auto& [kind, name] : kBlockKinds)
        if (kind == k) return std::string(name);
    return "narrative";
}

[[noreturn]] void bad(const std::string& what) {
    throw Error(ErrorCode::MalformedResponse, "serialized report has an invalid " + what);
}

}  // namespace

void to_json(json& j, const RenderedTable& t) {
    j = json{{"title", t.title},
             {"columns", t.columns},
             {"rows", t.rows},
             {"number_format", t.number_format},
             {"row_format", t.row_format}};
}

void from_json(const json& j, RenderedTable& t) {
    t.title = j.at("title").get<std::string>();
    t.columns = j.at("columns").get<std::vector<std::string>>();
    t.rows = j.at("rows").get<std::vector<std::vector<std::string>>>();
    t.number_format = j.at("number_format").get<std::vector<std::string>>();
    t.row_format = j.at("row_format").get<std::vector<std::string>>();
}

void to_json(json& j, const ReportDocument& d) {
    json sections = json::array();
    for (const auto& s : d.sections) {
        json blocks = json::array();
        for (const auto& b : s.blocks) {
            json jb{{"kind", block_kind_name(b.kind)}};
            if (b.kind == BlockKind::Table) jb["table"] = b.table;
            else jb["text"] = b.text;
            blocks.push_back(std::move(jb));
        }
        sections.push_back({{"id", std::string(to_string(s.id))}, {"title", s.title}, {"blocks", blocks}});
    }
    j = json{{"ticker", d.ticker},
             {"company_name", d.company_name},
             {"currency", d.currency},
             {"as_of", d.as_of},
             {"sections", sections},
             {"tables", d.tables},
             {"rating_box",
              {{"rating", std::string(valuation::to_string(d.rating_box.rating))},
               {"target_price", d.rating_box.target_price},
               {"current_price", d.rating_box.current_price}}},
             {"metadata",
              {{"engine_version", d.metadata.engine_version},
               {"config_hash", d.metadata.config_hash},
               {"provider", d.metadata.provider}}}};
}

void from_json(const json& j, ReportDocument& d) {
    d.ticker = j.at("ticker").get<std::string>();
    d.company_name = j.at("company_name").get<std::string>();
    d.currency = j.at("currency").get<std::string>();
    d.as_of = j.at("as_of").get<std::string>();
    d.sections.clear();
    for (const auto& js : j.at("sections")) {
        Section s;
        const auto id = parse_section_id(js.at("id").get<std::string>());
        if (!id) bad("section id");
        s.id = *id;
        s.title = js.at("title").get<std::string>();
        for (const auto& jb : js.at("blocks")) {
            Block b;
            const std::string kind = jb.at("kind").get<std::string>();
            bool known = false;
            for (const auto& [k, name] : kBlockKinds) {
                if (name == kind) {
                    b.kind = k;
                    known = true;
                }
            }
            if (!known) bad("block kind");
            if (b.kind == BlockKind::Table) b.table = jb.at("table").get<std::size_t>();
            else b.text = jb.at("text").get<std::string>();
            s.blocks.push_back(std::move(b));
        }
        d.sections.push_back(std::move(s));
    }
    d.tables = j.at("tables").get<std::vector<RenderedTable>>();
    const auto& box = j.at("rating_box");
    const auto rating = valuation::parse_rating(box.at("rating").get<std::string>());
    if (!rating) bad("rating");
    d.rating_box = {*rating, box.at("target_price").get<double>(), box.at("current_price").get<double>()};
    const auto& m = j.at("metadata");
    d.metadata = {m.at("engine_version").get<std::string>(), m.at("config_hash").get<std::string>(),
                  m.at("provider").get<std::string>()};
}

void to_json(json& j, const FactAudit& a) {
    json claims = json::array();
    for (const auto& c : a.claims) {
        claims.push_back({{"literal", c.literal},
                          {"matched", c.matched ? json(*c.matched) : json(nullptr)},
                          {"location", c.location}});
    }
    j = json{{"passed", a.passed()}, {"claims", claims}};
}

}  // namespace eqr::report
