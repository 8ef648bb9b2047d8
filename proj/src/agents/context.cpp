#include "eqr/agents/agents.hpp"

#include "eqr/common/display.hpp"

#include <algorithm>

namespace eqr::agents {

using metrics::Unit;

std::string display_metric(const metrics::MetricValue& v, std::string_view currency) {
    switch (v.unit) {
        case Unit::Fraction: return display::percent(v.value);
        case Unit::Percent: return display::percent_units(v.value);
        case Unit::Currency: return display::millions(v.value, currency);
        case Unit::Multiple: return display::multiple(v.value, v.not_meaningful);
    }
    return {};
}

std::string metric_line(const metrics::MetricValue& v, std::string_view currency) {
    return std::string(metrics::to_string(v.name)) + " " + v.period + ": " + display_metric(v, currency);
}

std::string render_metric_table(const metrics::MetricTable& table, std::string_view currency) {
    std::string out;
    for (metrics::MetricName name : metrics::kVocabulary) {
        for (const auto& period : table.periods)
            if (const auto* v = table.find(name, period)) out += metric_line(*v, currency) + "\n";
        if (const auto* p = table.projection(name)) out += metric_line(*p, currency) + "\n";
    }
    return out;
}

std::string render_valuation(const valuation::ValuationSummary& v, std::string_view currency) {
    std::string out;
    out += "rating: " + std::string(valuation::to_string(v.rating)) + "\n";
    out += "target price: " + display::per_share(v.target_price, currency) + "\n";
    out += "current price: " + display::per_share(v.current_price, currency) + "\n";
    out += "upside: " + display::percent(v.upside()) + "\n";
    out += "enterprise value: " + display::millions(v.enterprise_value, currency) + "\n";
    out += "equity value: " + display::millions(v.equity_value, currency) + "\n";
    out += "wacc: " + display::percent(v.wacc) + "\n";
    if (v.roic) out += "roic: " + display::percent(*v.roic) + "\n";
    if (v.enterprise_multiple) {
        out += "enterprise multiple: " +
               display::multiple(v.enterprise_multiple->value, v.enterprise_multiple->not_meaningful) + "\n";
    }
    if (v.negative_equity) out += "negative equity: target price floored at zero\n";
    return out;
}

bool refs_resolve(const Insight& insight, const metrics::MetricTable& table,
                  const std::vector<std::string>& document_ids) {
    for (const auto& [name, period] : insight.metric_refs) {
        const auto* projected = table.projection(name);
        if (!table.find(name, period) && !(projected && projected->period == period)) return false;
    }
    for (const auto& id : insight.document_refs)
        if (std::find(document_ids.begin(), document_ids.end(), id) == document_ids.end()) return false;
    return true;
}

std::vector<valuation::Rating> find_rating_tokens(std::string_view text) {
    std::vector<valuation::Rating> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!std::isalpha(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
        const std::string_view word = text.substr(i, j - i);
        const bool hyphenated = (j < text.size() && text[j] == '-') || (i > 0 && text[i - 1] == '-');
        if (!hyphenated) {
            for (auto r : {valuation::Rating::Buy, valuation::Rating::Hold, valuation::Rating::Sell}) {
                std::string upper(valuation::to_string(r));
                std::transform(upper.begin(), upper.end(), upper.begin(), ::toupper);
                if (word == valuation::to_string(r) || word == upper) out.push_back(r);
            }
        }
        i = j;
    }
    return out;
}

}  // namespace eqr::agents
