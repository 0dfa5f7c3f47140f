#include "kklab/puzzle/grading.hpp"

#include <optional>
#include <unordered_map>

namespace kklab::puzzle {

int check_answer(const std::vector<std::string>& response_tokens, const PuzzleSpec& puzzle) {
    // last boxed{ ... } segment wins
    std::ptrdiff_t open = -1;
    for (std::size_t i = 0; i < response_tokens.size(); ++i)
        if (response_tokens[i] == "boxed{") open = std::ptrdiff_t(i);
    if (open < 0) return 0;

    std::ptrdiff_t close = -1;
    for (std::size_t i = std::size_t(open) + 1; i < response_tokens.size(); ++i) {
        if (response_tokens[i] == "}") {
            close = std::ptrdiff_t(i);
            break;
        }
    }
    if (close < 0) return 0;

    std::unordered_map<std::string, int> person_index;
    for (int p = 0; p < puzzle.n_ppl; ++p) person_index[puzzle.names[p]] = p;

    std::vector<std::optional<Identity>> parsed(puzzle.n_ppl);
    std::size_t i = std::size_t(open) + 1;
    const std::size_t end = std::size_t(close);
    bool expect_entry = true;
    while (i < end) {
        if (!expect_entry) {
            if (response_tokens[i] != ",") return 0;
            ++i;
            expect_entry = true;
            continue;
        }
        const auto it = person_index.find(response_tokens[i]);
        if (it == person_index.end()) return 0;
        const int person = it->second;
        ++i;
        if (i < end && response_tokens[i] == "is") {
            ++i;
            if (i < end && response_tokens[i] == "a") ++i;
        }
        if (i >= end) return 0;
        Identity id;
        if (response_tokens[i] == "knight") id = Identity::Knight;
        else if (response_tokens[i] == "knave") id = Identity::Knave;
        else return 0;
        ++i;
        if (parsed[person]) return 0;  // duplicate person
        parsed[person] = id;
        expect_entry = false;
    }
    if (expect_entry) return 0;  // empty list or dangling comma

    for (int p = 0; p < puzzle.n_ppl; ++p) {
        if (!parsed[p] || *parsed[p] != puzzle.solution[p]) return 0;
    }
    return 1;
}

}  // namespace kklab::puzzle
