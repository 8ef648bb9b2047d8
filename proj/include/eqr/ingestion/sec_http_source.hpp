#pragma once

#include "eqr/common/http.hpp"
#include "eqr/ingestion/data_source.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace eqr::ingestion {

struct SecSourceConfig {
    std::string tickers_url = "https://www.sec.gov/files/company_tickers.json";
    /// "{cik}" is replaced by the ten-digit zero-padded CIK.
    std::string facts_url_template = "https://data.sec.gov/api/xbrl/companyfacts/CIK{cik}.json";
    /// The SEC rejects anonymous clients; must name the requester.
    std::string user_agent;
    http::RetryPolicy retry;
    http::Milliseconds timeout{30000};
    /// XBRL concept -> FinancialPeriod field it feeds. Only years where
    /// revenue, operating_expense and sga are all present are emitted.
    std::vector<std::pair<std::string, std::string>> concepts = {
        {"Revenues", "revenue"},
        {"RevenueFromContractWithCustomerExcludingAssessedTax", "revenue"},
        {"CostOfRevenue", "operating_expense"},
        {"CostOfGoodsAndServicesSold", "operating_expense"},
        {"SellingGeneralAndAdministrativeExpense", "sga"},
        {"DepreciationDepletionAndAmortization", "depreciation_amortization"},
        {"EntityCommonStockSharesOutstanding", "shares_outstanding"},
    };
};

/// Public SEC company-facts client. Yields two SecFiling documents per
/// ticker: the raw company-facts JSON and a derived statement document with
/// one section per fiscal year (values in base units, annual 10-K facts only,
/// most recently filed value per concept and year).
class SecHttpSource : public DataSource {
public:
    SecHttpSource(SecSourceConfig config, std::shared_ptr<http::Client> client, http::Timing timing = {});

    std::string name() const override { return "sec-http"; }
    FetchResult fetch(const FetchRequest& request) override;

private:
    std::optional<long> lookup_cik(const std::string& ticker);
    http::Response get(const std::string& url);

    SecSourceConfig config_;
    std::shared_ptr<http::Client> client_;
    http::Timing timing_;
    http::RateLimiter limiter_;
};

/// Converts a company-facts JSON body into the flat statement format.
/// Exposed for tests; returns an empty string when no annual facts qualify.
std::string company_facts_to_statement(const std::string& facts_json, const std::string& ticker,
                                       const std::vector<std::pair<std::string, std::string>>& concepts,
                                       const Date& since);

}  // namespace eqr::ingestion
