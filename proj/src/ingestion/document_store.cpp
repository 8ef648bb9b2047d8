#include "eqr/ingestion/document_store.hpp"

#include "eqr/common/error.hpp"
#include "eqr/common/files.hpp"
#include "eqr/common/hashing.hpp"

#include <algorithm>
#include <json.hpp>

namespace eqr::ingestion {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json record_json(const RawDocument& doc, const std::string& body_hash) {
    return json{{"id", doc.id},
                {"company", doc.company},
                {"kind", std::string(to_string(doc.kind))},
                {"period", doc.period},
                {"retrieved_at", doc.retrieved_at},
                {"content_type", doc.content_type},
                {"body_sha256", body_hash}};
}

}  // namespace

DocumentStore::DocumentStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_ / "objects", ec);
    fs::create_directories(root_ / "records", ec);
    if (ec) {
        throw Error(ErrorCode::StorageFailure, "cannot create document store", {{"root", root_.string()}});
    }
}

fs::path DocumentStore::record_path(const std::string& id) const {
    return root_ / "records" / (sha256_hex(id) + ".json");
}

fs::path DocumentStore::object_path(const std::string& body_hash) const {
    return root_ / "objects" / body_hash.substr(0, 2) / body_hash;
}

std::string DocumentStore::store(const RawDocument& doc) {
    if (doc.id.empty()) throw Error(ErrorCode::StorageFailure, "document id is empty");
    if (doc.body.empty()) {
        throw Error(ErrorCode::StorageFailure, "document body is empty", {{"doc_id", doc.id}});
    }
    const std::string body_hash = sha256_hex(doc.body);
    const std::string record = record_json(doc, body_hash).dump(2) + "\n";
    const fs::path rpath = record_path(doc.id);

    std::error_code ec;
    if (fs::exists(rpath, ec)) {
        try {
            if (read_file(rpath) == record && fs::exists(object_path(body_hash), ec)) return doc.id;
        } catch (const Error&) {
            // unreadable record: rewrite below
        }
    }
    const fs::path opath = object_path(body_hash);
    if (!fs::exists(opath, ec)) write_file_atomic(opath, doc.body);
    write_file_atomic(rpath, record);
    return doc.id;
}

std::optional<RawDocument> DocumentStore::load(const std::string& id) const {
    const fs::path rpath = record_path(id);
    std::error_code ec;
    if (!fs::exists(rpath, ec)) return std::nullopt;
    json rec;
    try {
        rec = json::parse(read_file(rpath));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::StorageFailure, "corrupt document record", {{"doc_id", id}});
    }
    RawDocument doc;
    doc.id = rec.at("id").get<std::string>();
    doc.company = rec.at("company").get<std::string>();
    doc.kind = parse_source_kind(rec.at("kind").get<std::string>()).value_or(SourceKind::Fixture);
    doc.period = rec.at("period").get<std::string>();
    doc.retrieved_at = rec.at("retrieved_at").get<std::string>();
    doc.content_type = rec.at("content_type").get<std::string>();
    const std::string body_hash = rec.at("body_sha256").get<std::string>();
    doc.body = read_file(object_path(body_hash));
    if (sha256_hex(doc.body) != body_hash) {
        throw Error(ErrorCode::StorageFailure, "document body hash mismatch", {{"doc_id", id}});
    }
    return doc;
}

bool DocumentStore::contains(const std::string& id) const {
    std::error_code ec;
    return fs::exists(record_path(id), ec);
}

std::vector<std::string> DocumentStore::ids() const {
    std::vector<std::string> out;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(root_ / "records", ec)) {
        if (entry.path().extension() != ".json") continue;
        try {
            out.push_back(json::parse(read_file(entry.path())).at("id").get<std::string>());
        } catch (...) {
            continue;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace eqr::ingestion
