#include "eqr/common/error.hpp"

namespace eqr {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::SourceUnavailable: return "SourceUnavailable";
        case ErrorCode::RateLimited: return "RateLimited";
        case ErrorCode::UnknownTicker: return "UnknownTicker";
        case ErrorCode::ParseFailure: return "ParseFailure";
        case ErrorCode::InconsistentTicker: return "InconsistentTicker";
        case ErrorCode::StorageFailure: return "StorageFailure";
        case ErrorCode::DivisionByZero: return "DivisionByZero";
        case ErrorCode::NegativePrevious: return "NegativePrevious";
        case ErrorCode::NonPositiveInput: return "NonPositiveInput";
        case ErrorCode::ZeroYears: return "ZeroYears";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ZeroCapital: return "ZeroCapital";
        case ErrorCode::MissingProjectionBasis: return "MissingProjectionBasis";
        case ErrorCode::MissingInput: return "MissingInput";
        case ErrorCode::NonConvergent: return "NonConvergent";
        case ErrorCode::ZeroShares: return "ZeroShares";
        case ErrorCode::ZeroPrice: return "ZeroPrice";
        case ErrorCode::ProviderFailure: return "ProviderFailure";
        case ErrorCode::EmptyContext: return "EmptyContext";
        case ErrorCode::NoComparablePeriod: return "NoComparablePeriod";
        case ErrorCode::RatingMismatch: return "RatingMismatch";
        case ErrorCode::MissingSection: return "MissingSection";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::MalformedResponse: return "MalformedResponse";
        case ErrorCode::OutOfRangeScore: return "OutOfRangeScore";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::GenerationFailure: return "GenerationFailure";
        case ErrorCode::JudgeFailure: return "JudgeFailure";
        case ErrorCode::CacheCorruption: return "CacheCorruption";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::OutputLocked: return "OutputLocked";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, std::string message, Details details)
    : std::runtime_error(compose(code, message, details)),
      code_(code),
      message_(std::move(message)),
      details_(std::move(details)) {}

std::string Error::detail(const std::string& key) const {
    auto it = details_.find(key);
    return it == details_.end() ? std::string{} : it->second;
}

Error Error::with_stage(std::string_view stage) const {
    Details d = details_;
    d["stage"] = std::string(stage);
    return Error(code_, message_, std::move(d));
}

std::string Error::compose(ErrorCode code, const std::string& message, const Details& details) {
    std::string out;
    if (auto it = details.find("stage"); it != details.end()) {
        out += "[stage ";
        out += it->second;
        out += "] ";
    }
    out += to_string(code);
    out += ": ";
    out += message;
    bool first = true;
    for (const auto& [k, v] : details) {
        if (k == "stage") continue;
        out += first ? " (" : ", ";
        first = false;
        out += k + "=" + v;
    }
    if (!first) out += ")";
    return out;
}

}  // namespace eqr
