#include "eqr/common/display.hpp"

#include <fmt/format.h>

#include <cmath>

namespace eqr::display {

namespace {

double clean_zero(double v, int decimals) {
    // Values that round to zero at the displayed precision must not print "-0.0".
    const double unit = std::pow(10.0, -decimals) / 2.0;
    return std::fabs(v) < unit ? 0.0 : v;
}

}  // namespace

std::string grouped(double value, int decimals) {
    value = clean_zero(value, decimals);
    std::string raw = fmt::format("{:.{}f}", std::fabs(value), decimals);
    auto dot = raw.find('.');
    std::string int_part = raw.substr(0, dot);
    std::string frac_part = dot == std::string::npos ? "" : raw.substr(dot);
    std::string out;
    const int n = static_cast<int>(int_part.size());
    for (int i = 0; i < n; ++i) {
        out.push_back(int_part[static_cast<std::size_t>(i)]);
        const int remaining = n - i - 1;
        if (remaining > 0 && remaining % 3 == 0) out.push_back(',');
    }
    return (value < 0 ? "-" : "") + out + frac_part;
}

std::string currency_prefix(std::string_view currency) {
    if (currency == "USD" || currency.empty()) return "$";
    return std::string(currency) + " ";
}

std::string percent(double fraction) { return percent_units(fraction * 100.0); }

std::string percent_units(double percent_value) {
    return fmt::format("{:.1f}%", clean_zero(percent_value, 1));
}

std::string millions(double amount, std::string_view currency) {
    const double m = clean_zero(amount / 1e6, 1);
    if (m < 0) return "-" + currency_prefix(currency) + grouped(-m, 1) + "M";
    return currency_prefix(currency) + grouped(m, 1) + "M";
}

std::string per_share(double price, std::string_view currency) {
    const double p = clean_zero(price, 2);
    if (p < 0) return "-" + currency_prefix(currency) + grouped(-p, 2);
    return currency_prefix(currency) + grouped(p, 2);
}

std::string multiple(double value, bool not_meaningful) {
    if (not_meaningful) return "NM";
    return fmt::format("{:.1f}x", clean_zero(value, 1));
}

std::string score(double value) {
    if (value == std::floor(value)) return fmt::format("{:.0f}", value);
    return fmt::format("{:.1f}", value);
}

}  // namespace eqr::display
