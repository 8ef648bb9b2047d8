#include "eqr/common/period.hpp"

#include <charconv>

namespace eqr {

namespace {

std::optional<int> parse_int(std::string_view s) {
    if (s.empty()) return std::nullopt;
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

std::string PeriodKey::label() const {
    std::string out = annual() ? "FY" + std::to_string(year)
                               : "Q" + std::to_string(quarter) + "-" + std::to_string(year);
    if (estimate) out += 'E';
    return out;
}

std::optional<PeriodKey> parse_period(std::string_view label) {
    PeriodKey key;
    if (!label.empty() && label.back() == 'E') {
        key.estimate = true;
        label.remove_suffix(1);
    }
    if (label.size() == 6 && label.substr(0, 2) == "FY") {
        auto year = parse_int(label.substr(2));
        if (!year) return std::nullopt;
        key.year = *year;
        return key;
    }
    if (label.size() == 7 && label[0] == 'Q' && label[2] == '-') {
        auto q = parse_int(label.substr(1, 1));
        auto year = parse_int(label.substr(3));
        if (!q || !year || *q < 1 || *q > 4) return std::nullopt;
        key.quarter = *q;
        key.year = *year;
        return key;
    }
    return std::nullopt;
}

PeriodKey next_period(const PeriodKey& key) {
    PeriodKey next = key;
    next.estimate = true;
    if (key.annual()) {
        ++next.year;
    } else if (key.quarter == 4) {
        next.quarter = 1;
        ++next.year;
    } else {
        ++next.quarter;
    }
    return next;
}

}  // namespace eqr
