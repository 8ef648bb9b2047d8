#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace eqr {

/// Parsed fiscal-period label: "FY2023" (annual) or "Q2-2024" (quarterly).
/// A trailing "E" marks an estimate, e.g. "FY2024E".
struct PeriodKey {
    int year = 0;
    int quarter = 0;  // 0 for annual periods
    bool estimate = false;

    bool annual() const { return quarter == 0; }
    std::string label() const;

    // Chronological order; estimates sort with their actual counterpart.
    friend std::strong_ordering operator<=>(const PeriodKey& a, const PeriodKey& b) {
        if (auto c = a.year <=> b.year; c != 0) return c;
        return a.quarter <=> b.quarter;
    }
    friend bool operator==(const PeriodKey& a, const PeriodKey& b) {
        return a.year == b.year && a.quarter == b.quarter;
    }
};

std::optional<PeriodKey> parse_period(std::string_view label);

/// The period following `key` (same frequency), flagged as an estimate.
PeriodKey next_period(const PeriodKey& key);

}  // namespace eqr
