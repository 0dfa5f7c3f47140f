#pragma once

#include <string>
#include <vector>

#include "kklab/puzzle/puzzle.hpp"

namespace kklab::puzzle {

// Grades a response against the puzzle ground truth. The response is a
// stream of token strings; the final "boxed{ ... }" segment is parsed as a
// name-identity list ("<name> is a <identity>" entries, comma separated;
// the "is a" filler is optional). Returns 1 iff every person appears
// exactly once with the ground-truth identity. Any malformed input gives 0.
int check_answer(const std::vector<std::string>& response_tokens, const PuzzleSpec& puzzle);

}  // namespace kklab::puzzle
