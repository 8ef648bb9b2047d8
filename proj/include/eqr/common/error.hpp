#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace eqr {

enum class ErrorCode {
    // ingestion
    SourceUnavailable,
    RateLimited,
    UnknownTicker,
    ParseFailure,
    InconsistentTicker,
    StorageFailure,
    // metrics / valuation
    DivisionByZero,
    NegativePrevious,
    NonPositiveInput,
    ZeroYears,
    InvalidArgument,
    ZeroCapital,
    MissingProjectionBasis,
    MissingInput,
    NonConvergent,
    ZeroShares,
    ZeroPrice,
    // agents
    ProviderFailure,
    EmptyContext,
    NoComparablePeriod,
    RatingMismatch,
    // report
    MissingSection,
    UnsupportedFormat,
    // evaluation
    MalformedResponse,
    OutOfRangeScore,
    EmptyInput,
    GenerationFailure,
    JudgeFailure,
    // pipeline
    CacheCorruption,
    ConfigError,
    OutputLocked,
};

std::string_view to_string(ErrorCode code);

/// Domain error carrying a machine-readable code plus named details
/// (e.g. "source", "doc_id", "offset", "dimension", "stage").
class Error : public std::runtime_error {
public:
    using Details = std::map<std::string, std::string>;

    Error(ErrorCode code, std::string message, Details details = {});

    ErrorCode code() const noexcept { return code_; }
    const std::string& message() const noexcept { return message_; }
    const Details& details() const noexcept { return details_; }

    /// Empty string when the detail is absent.
    std::string detail(const std::string& key) const;

    /// Copy of this error annotated with the pipeline stage that raised it.
    Error with_stage(std::string_view stage) const;

private:
    static std::string compose(ErrorCode code, const std::string& message, const Details& details);

    ErrorCode code_;
    std::string message_;
    Details details_;
};

}  // namespace eqr
