#pragma once

#include "eqr/ingestion/types.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eqr::ingestion {

/// Maps source line-item names ("Total revenue", "Revenues", ...) onto
/// FinancialPeriod fields. Matching ignores case and repeated whitespace.
class AliasTable {
public:
    AliasTable() = default;

    /// JSON object: field name -> array of aliases.
    static AliasTable load(const std::filesystem::path& path);
    static AliasTable from_json(std::string_view json_text);

    void add(LineItem item, std::string_view alias);
    std::optional<LineItem> lookup(std::string_view name) const;
    std::size_t size() const { return aliases_.size(); }

private:
    std::map<std::string, LineItem> aliases_;
};

/// Parses statement documents into normalized CompanyFinancials.
///
/// Statement documents (content type text/x-financial-statement) are line
/// oriented: `key: value` pairs, `#` comments, and `[FY2023]` section headers
/// opening one period. Keys before the first section describe the document:
/// ticker, company_name, currency, scale (units|thousands|millions|billions),
/// shares_scale, form, filed, peers (comma separated). Other documents are
/// ignored. Amounts are multiplied by the document scale; percent-valued tax
/// rates are converted to fractions.
///
/// When several documents cover the same period, the most recently filed one
/// wins as a whole; superseded filings are noted in provenance.
CompanyFinancials parse_statements(const std::vector<RawDocument>& docs, const AliasTable& aliases);

}  // namespace eqr::ingestion
