#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kklab::analysis {

// Ordered first-match classification of responses into output modes. A rule
// matches when the response starts with `prefix` (token strings) and, if
// set, contains `contains` anywhere. Unmatched responses fall back to
// "others".
struct ModeRule {
    std::string label;
    std::vector<std::string> prefix;
    std::optional<std::string> contains;
};

struct ModeRuleTable {
    std::vector<ModeRule> rules;
    std::string fallback = "others";
};

std::string classify_mode(const ModeRuleTable& table, const std::vector<std::string>& tokens);

struct StepModeProportions {
    int step = 0;
    std::map<std::string, double> proportion;  // sums to 1
};

struct SteppedResponse {
    int step = 0;
    std::vector<std::string> tokens;
};

std::vector<StepModeProportions> mode_proportions(const ModeRuleTable& table,
                                                  const std::vector<SteppedResponse>& responses);

}  // namespace kklab::analysis
