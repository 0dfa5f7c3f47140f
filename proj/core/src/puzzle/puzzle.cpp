#include "kklab/puzzle/puzzle.hpp"

#include <set>
#include <stdexcept>

namespace kklab::puzzle {

void PuzzleSpec::validate() const {
    if (n_ppl < 2) throw std::invalid_argument("PuzzleSpec: need at least 2 people");
    if (int(names.size()) != n_ppl) throw std::invalid_argument("PuzzleSpec: names size mismatch");
    if (int(statements.size()) != n_ppl)
        throw std::invalid_argument("PuzzleSpec: one statement per person required");
    std::set<std::string> distinct(names.begin(), names.end());
    if (int(distinct.size()) != n_ppl)
        throw std::invalid_argument("PuzzleSpec: names must be distinct");
    for (int i = 0; i < n_ppl; ++i) {
        if (statements[i].speaker != i)
            throw std::invalid_argument("PuzzleSpec: statement speaker out of order");
        if (statements[i].body.max_person() >= n_ppl)
            throw std::invalid_argument("PuzzleSpec: statement references unknown person");
    }
    if (!solution.empty() && int(solution.size()) != n_ppl)
        throw std::invalid_argument("PuzzleSpec: solution size mismatch");
}

bool evaluate(const PuzzleSpec& puzzle, const Assignment& assignment) {
    if (int(assignment.size()) != puzzle.n_ppl)
        throw std::invalid_argument("evaluate: assignment size mismatch");
    for (int p = 0; p < puzzle.n_ppl; ++p) {
        const bool claim = puzzle.statements[p].body.evaluate(assignment);
        const bool is_knight = assignment[p] == Identity::Knight;
        if (claim != is_knight) return false;
    }
    return true;
}

std::vector<Assignment> solve(const PuzzleSpec& puzzle) {
    if (puzzle.n_ppl > 16) throw std::invalid_argument("solve: n_ppl > 16 unsupported");
    std::vector<Assignment> result;
    const std::uint32_t limit = 1u << puzzle.n_ppl;
    Assignment a(puzzle.n_ppl, Identity::Knave);
    for (std::uint32_t mask = 0; mask < limit; ++mask) {
        for (int p = 0; p < puzzle.n_ppl; ++p)
            a[p] = (mask >> p) & 1u ? Identity::Knight : Identity::Knave;
        if (evaluate(puzzle, a)) result.push_back(a);
    }
    return result;
}

}  // namespace kklab::puzzle
