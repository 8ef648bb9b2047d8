#pragma once

#include <string>
#include <string_view>

namespace eqr::display {

// Report-facing number formats. Every function is locale-independent and
// byte-stable; negative zero prints as zero.

/// Fraction rendered as a percent with one decimal: 0.25 -> "25.0%".
std::string percent(double fraction);

/// Value already in percent units, one decimal: 25.992 -> "26.0%".
std::string percent_units(double percent_value);

/// Base-unit currency amount in millions with one decimal and thousands
/// separators: 20426e6 -> "$20,426.0M" (USD) or "EUR 20,426.0M".
std::string millions(double amount, std::string_view currency);

/// Per-share price with two decimals: "$236.12".
std::string per_share(double price, std::string_view currency);

/// Valuation multiple with one decimal: "12.3x". Not-meaningful values print "NM".
std::string multiple(double value, bool not_meaningful = false);

/// Judge score: integral values without decimals, otherwise one decimal ("9", "9.5").
std::string score(double value);

/// Fixed-point with `decimals` places and comma thousands separators.
std::string grouped(double value, int decimals);

std::string currency_prefix(std::string_view currency);

}  // namespace eqr::display
