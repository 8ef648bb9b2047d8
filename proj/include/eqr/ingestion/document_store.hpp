#pragma once

#include "eqr/ingestion/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace eqr::ingestion {

/// Content-addressed document store on the local filesystem.
///
/// Layout under the root:
///   objects/<h[0:2]>/<h>      body bytes, h = sha256(body)
///   records/<sha256(id)>.json metadata plus the body hash
///
/// Bodies are written before records and both writes are atomic renames, so
/// a crash never leaves a record pointing at a partial body. Concurrent
/// writers of the same id resolve as last-write-wins.
class DocumentStore {
public:
    explicit DocumentStore(std::filesystem::path root);

    /// Returns doc.id. Storing an identical document again is a no-op.
    std::string store(const RawDocument& doc);

    std::optional<RawDocument> load(const std::string& id) const;
    bool contains(const std::string& id) const;

    /// All stored ids, sorted.
    std::vector<std::string> ids() const;

    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path record_path(const std::string& id) const;
    std::filesystem::path object_path(const std::string& body_hash) const;

    std::filesystem::path root_;
};

}  // namespace eqr::ingestion
