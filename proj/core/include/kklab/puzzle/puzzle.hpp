#pragma once

#include <string>
#include <vector>

#include "kklab/puzzle/statement.hpp"

namespace kklab::puzzle {

// A Knight & Knave instance: one statement per person plus the unique
// consistent assignment found at generation time.
struct PuzzleSpec {
    int n_ppl = 0;
    std::vector<std::string> names;      // distinct, one per person
    std::vector<Statement> statements;   // statements[i].speaker == i
    Assignment solution;

    void validate() const;  // structural invariants; throws std::invalid_argument
};

// true iff every knight's statement is true and every knave's statement is false
bool evaluate(const PuzzleSpec& puzzle, const Assignment& assignment);

// exhaustive search over all 2^n assignments, ascending bitmask order
// (person 0 is the least significant bit, knight = 1)
std::vector<Assignment> solve(const PuzzleSpec& puzzle);

}  // namespace kklab::puzzle
