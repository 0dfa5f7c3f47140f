#pragma once

#include <string>
#include <vector>

#include "kklab/puzzle/puzzle.hpp"

namespace kklab::puzzle {

// "boxed{ <name> is a <identity> , ... }" for the puzzle's solution
std::vector<std::string> boxed_answer_tokens(const PuzzleSpec& puzzle);

// Deterministic assume/contradict/backtrack trace for a unique-solution
// puzzle, ending in the boxed answer. Token stream, no EOS marker; grading
// it with check_answer yields 1. Throws std::invalid_argument when the
// puzzle does not have exactly one solution.
std::vector<std::string> synthesize_short_cot(const PuzzleSpec& puzzle);

}  // namespace kklab::puzzle
