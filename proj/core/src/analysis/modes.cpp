#include "kklab/analysis/modes.hpp"

#include <algorithm>
#include <stdexcept>

namespace kklab::analysis {

namespace {

bool rule_matches(const ModeRule& rule, const std::vector<std::string>& tokens) {
    if (rule.prefix.size() > tokens.size()) return false;
    if (!std::equal(rule.prefix.begin(), rule.prefix.end(), tokens.begin())) return false;
    if (rule.contains &&
        std::find(tokens.begin(), tokens.end(), *rule.contains) == tokens.end())
        return false;
    return true;
}

}  // namespace

std::string classify_mode(const ModeRuleTable& table, const std::vector<std::string>& tokens) {
    if (table.fallback.empty())
        throw std::invalid_argument("classify_mode: fallback label required");
    for (const auto& rule : table.rules)
        if (rule_matches(rule, tokens)) return rule.label;
    return table.fallback;
}

std::vector<StepModeProportions> mode_proportions(const ModeRuleTable& table,
                                                  const std::vector<SteppedResponse>& responses) {
    std::map<int, std::map<std::string, int>> counts;
    std::map<int, int> totals;
    for (const auto& r : responses) {
        counts[r.step][classify_mode(table, r.tokens)] += 1;
        totals[r.step] += 1;
    }
    std::vector<StepModeProportions> out;
    for (const auto& [step, by_label] : counts) {
        StepModeProportions row;
        row.step = step;
        for (const auto& [label, n] : by_label)
            row.proportion[label] = double(n) / double(totals[step]);
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace kklab::analysis
