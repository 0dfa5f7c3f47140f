#include "kklab/puzzle/cot.hpp"

#include <optional>
#include <stdexcept>

namespace kklab::puzzle {

std::vector<std::string> boxed_answer_tokens(const PuzzleSpec& puzzle) {
    if (int(puzzle.solution.size()) != puzzle.n_ppl)
        throw std::invalid_argument("boxed_answer_tokens: puzzle has no solution attached");
    std::vector<std::string> out;
    out.push_back("boxed{");
    for (int p = 0; p < puzzle.n_ppl; ++p) {
        if (p > 0) out.push_back(",");
        out.push_back(puzzle.names[p]);
        out.push_back("is");
        out.push_back("a");
        out.push_back(identity_word(puzzle.solution[p]));
    }
    out.push_back("}");
    return out;
}

namespace {

// contradiction iff some assigned person's statement has a determined truth
// value that disagrees with their identity
bool partially_consistent(const PuzzleSpec& puzzle,
                          const std::vector<std::optional<Identity>>& partial) {
    for (int p = 0; p < puzzle.n_ppl; ++p) {
        if (!partial[p]) continue;
        const auto truth = puzzle.statements[p].body.evaluate_partial(partial);
        if (!truth) continue;
        const bool is_knight = *partial[p] == Identity::Knight;
        if (*truth != is_knight) return false;
    }
    return true;
}

bool dfs(const PuzzleSpec& puzzle, std::vector<std::optional<Identity>>& partial, int person,
         std::vector<std::string>& trace) {
    if (person == puzzle.n_ppl) return true;
    for (Identity id : {Identity::Knight, Identity::Knave}) {
        trace.push_back("assume");
        trace.push_back(puzzle.names[person]);
        trace.push_back(identity_word(id));
        partial[person] = id;
        if (partially_consistent(puzzle, partial)) {
            trace.push_back("ok");
            if (dfs(puzzle, partial, person + 1, trace)) return true;
        } else {
            trace.push_back("contra");
        }
        partial[person] = std::nullopt;
    }
    return false;
}

}  // namespace

std::vector<std::string> synthesize_short_cot(const PuzzleSpec& puzzle) {
    const auto solutions = solve(puzzle);
    if (solutions.size() != 1)
        throw std::invalid_argument("synthesize_short_cot: puzzle must have exactly one solution");

    std::vector<std::string> trace;
    std::vector<std::optional<Identity>> partial(puzzle.n_ppl);
    if (!dfs(puzzle, partial, 0, trace))
        throw std::logic_error("synthesize_short_cot: search failed on a solvable puzzle");

    PuzzleSpec solved = puzzle;
    solved.solution.assign(puzzle.n_ppl, Identity::Knave);
    for (int p = 0; p < puzzle.n_ppl; ++p) solved.solution[p] = *partial[p];
    const auto boxed = boxed_answer_tokens(solved);
    trace.insert(trace.end(), boxed.begin(), boxed.end());
    return trace;
}

}  // namespace kklab::puzzle
