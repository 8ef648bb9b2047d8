#include "eqr/common/error.hpp"
#include "eqr/common/files.hpp"
#include "eqr/ingestion/data_source.hpp"

#include <cctype>
#include <algorithm>
#include <json.hpp>

namespace eqr::ingestion {

namespace fs = std::filesystem;
using nlohmann::json;

FixtureSource::FixtureSource(fs::path directory) : directory_(std::move(directory)) {}

std::string FixtureSource::name() const { return "fixtures:" + directory_.string(); }

FetchResult FixtureSource::fetch(const FetchRequest& request) {
    const fs::path manifest_path = directory_ / "manifest.json";
    std::error_code ec;
    if (!fs::exists(manifest_path, ec)) {
        throw Error(ErrorCode::SourceUnavailable, "fixture manifest not found",
                    {{"source", name()}, {"path", manifest_path.string()}});
    }
    json manifest;
    try {
        manifest = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SourceUnavailable, std::string("fixture manifest is not valid JSON: ") + e.what(),
                    {{"source", name()}});
    }

    FetchResult result;
    const bool any_kind = request.kinds.count(SourceKind::Fixture) > 0;
    for (const auto& entry : manifest.at("documents")) {
        if (entry.at("ticker").get<std::string>() != request.ticker) continue;
        result.ticker_known = true;

        RawDocument doc;
        doc.id = entry.at("id").get<std::string>();
        doc.company = request.ticker;
        const auto kind_text = entry.at("kind").get<std::string>();
        auto kind = parse_source_kind(kind_text);
        if (!kind) {
            throw Error(ErrorCode::SourceUnavailable, "unknown document kind in fixture manifest",
                        {{"source", name()}, {"kind", kind_text}, {"doc_id", doc.id}});
        }
        doc.kind = *kind;
        if (!any_kind && request.kinds.count(doc.kind) == 0) continue;

        doc.period = entry.value("period", "");
        doc.content_type = entry.value("content_type", "text/plain");
        doc.retrieved_at = entry.value("retrieved_at", "1970-01-01T00:00:00Z");
        auto published = parse_date(doc.retrieved_at);
        if (published && *published < request.since) continue;

        const fs::path file = directory_ / entry.at("file").get<std::string>();
        try {
            doc.body = read_file(file);
        } catch (const Error&) {
            throw Error(ErrorCode::SourceUnavailable, "fixture file missing",
                        {{"source", name()}, {"path", file.string()}});
        }
        result.documents.push_back(std::move(doc));
    }
    return result;
}

std::vector<RawDocument> fetch_documents(const std::string& ticker, const std::set<SourceKind>& kinds,
                                         const Date& since,
                                         const std::vector<std::shared_ptr<DataSource>>& sources,
                                         DocumentStore& store) {
    if (ticker.empty()) throw Error(ErrorCode::UnknownTicker, "ticker is empty");
    if (kinds.empty()) throw Error(ErrorCode::InvalidArgument, "no source kinds requested");

    std::string normalized = ticker;
    for (char& c : normalized) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    FetchRequest request{normalized, kinds, since};
    bool known = false;
    std::vector<RawDocument> out;
    for (const auto& source : sources) {
        FetchResult r = source->fetch(request);
        known = known || r.ticker_known;
        for (auto& doc : r.documents) {
            auto dup = std::find_if(out.begin(), out.end(), [&](const RawDocument& d) { return d.id == doc.id; });
            if (dup != out.end()) continue;
            store.store(doc);
            out.push_back(std::move(doc));
        }
    }
    if (!known) throw Error(ErrorCode::UnknownTicker, "no configured source knows the ticker", {{"ticker", ticker}});
    std::sort(out.begin(), out.end(), [](const RawDocument& a, const RawDocument& b) { return a.id < b.id; });
    return out;
}

}  // namespace eqr::ingestion
