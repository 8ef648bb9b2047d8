#pragma once

#include "eqr/common/time.hpp"
#include "eqr/ingestion/document_store.hpp"
#include "eqr/ingestion/types.hpp"

#include <memory>
#include <set>
#include <string>
#include <vector>

namespace eqr::ingestion {

struct FetchRequest {
    std::string ticker;
    std::set<SourceKind> kinds;
    Date since;
};

struct FetchResult {
    bool ticker_known = false;
    std::vector<RawDocument> documents;
};

/// A place raw documents come from. Implementations must be callable from
/// several threads at once.
class DataSource {
public:
    virtual ~DataSource() = default;
    virtual std::string name() const = 0;
    virtual FetchResult fetch(const FetchRequest& request) = 0;
};

/// Documents declared in a fixture directory's manifest.json. Requesting
/// SourceKind::Fixture selects every document of the ticker regardless of
/// its declared kind; `since` filters on retrieved_at.
class FixtureSource : public DataSource {
public:
    explicit FixtureSource(std::filesystem::path directory);

    std::string name() const override;
    FetchResult fetch(const FetchRequest& request) override;

private:
    std::filesystem::path directory_;
};

/// Fetches from every configured source, persists into the store, and
/// returns the matching documents sorted by id. Re-fetching is idempotent.
std::vector<RawDocument> fetch_documents(const std::string& ticker, const std::set<SourceKind>& kinds,
                                         const Date& since,
                                         const std::vector<std::shared_ptr<DataSource>>& sources,
                                         DocumentStore& store);

}  // namespace eqr::ingestion
