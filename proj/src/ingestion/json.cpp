#include "eqr/ingestion/json.hpp"

#include "eqr/common/error.hpp"

namespace eqr::ingestion {

using nlohmann::json;

namespace {

constexpr LineItem kOptionalItems[] = {LineItem::DepreciationAmortization, LineItem::NetDebt,
                                       LineItem::SharesOutstanding,         LineItem::TaxRate,
                                       LineItem::InvestedCapital,           LineItem::Nopat};

LineItem item_from(const std::string& name) {
    auto item = parse_line_item(name);
    if (!item) throw Error(ErrorCode::MalformedResponse, "unknown line item in serialized data", {{"item", name}});
    return *item;
}

}  // namespace

void to_json(json& j, const RawDocument& d) {
    j = json{{"id", d.id},
             {"company", d.company},
             {"kind", std::string(to_string(d.kind))},
             {"period", d.period},
             {"retrieved_at", d.retrieved_at},
             {"content_type", d.content_type},
             {"body", d.body}};
}

void from_json(const json& j, RawDocument& d) {
    d.id = j.at("id").get<std::string>();
    d.company = j.at("company").get<std::string>();
    const auto kind = parse_source_kind(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::MalformedResponse, "unknown source kind in serialized document");
    d.kind = *kind;
    d.period = j.at("period").get<std::string>();
    d.retrieved_at = j.at("retrieved_at").get<std::string>();
    d.content_type = j.at("content_type").get<std::string>();
    d.body = j.at("body").get<std::string>();
}

void to_json(json& j, const FinancialPeriod& p) {
    j = json{{"period", p.period}, {"revenue", p.revenue}, {"operating_expense", p.operating_expense}, {"sga", p.sga}};
    for (LineItem item : kOptionalItems) {
        if (auto v = p.get(item)) j[std::string(to_string(item))] = *v;
    }
}

void from_json(const json& j, FinancialPeriod& p) {
    p = FinancialPeriod{};
    p.period = j.at("period").get<std::string>();
    p.revenue = j.at("revenue").get<double>();
    p.operating_expense = j.at("operating_expense").get<double>();
    p.sga = j.at("sga").get<double>();
    for (LineItem item : kOptionalItems) {
        const std::string key(to_string(item));
        if (j.contains(key)) p.set(item, j.at(key).get<double>());
    }
}

void to_json(json& j, const CompanyFinancials& f) {
    json prov = json::array();
    for (const auto& [key, p] : f.provenance) {
        prov.push_back(json{{"period", key.first},
                            {"item", std::string(to_string(key.second))},
                            {"doc_id", p.doc_id},
                            {"offset", p.offset},
                            {"length", p.length},
                            {"scale", p.scale},
                            {"form", p.form},
                            {"filed", p.filed},
                            {"note", p.note}});
    }
    j = json{{"ticker", f.ticker},       {"company_name", f.company_name}, {"currency", f.currency},
             {"periods", f.periods},     {"peers", f.peers},               {"provenance", prov}};
}

void from_json(const json& j, CompanyFinancials& f) {
    f = CompanyFinancials{};
    f.ticker = j.at("ticker").get<std::string>();
    f.company_name = j.at("company_name").get<std::string>();
    f.currency = j.at("currency").get<std::string>();
    f.periods = j.at("periods").get<std::vector<FinancialPeriod>>();
    f.peers = j.at("peers").get<std::vector<std::string>>();
    for (const auto& p : j.at("provenance")) {
        Provenance v;
        v.doc_id = p.at("doc_id").get<std::string>();
        v.offset = p.at("offset").get<std::size_t>();
        v.length = p.at("length").get<std::size_t>();
        v.scale = p.at("scale").get<double>();
        v.form = p.at("form").get<std::string>();
        v.filed = p.at("filed").get<std::string>();
        v.note = p.at("note").get<std::string>();
        f.provenance[{p.at("period").get<std::string>(), item_from(p.at("item").get<std::string>())}] = v;
    }
}

}  // namespace eqr::ingestion
