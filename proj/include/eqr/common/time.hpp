#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace eqr {

/// Calendar date, ordered chronologically.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    std::string iso() const;
    auto operator<=>(const Date&) const = default;
};

/// Accepts "YYYY-MM-DD" and the date prefix of "YYYY-MM-DDTHH:MM:SSZ".
std::optional<Date> parse_date(std::string_view text);

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_now_iso();

}  // namespace eqr
