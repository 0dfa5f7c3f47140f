#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kklab/puzzle/puzzle.hpp"

namespace kklab::puzzle {

std::vector<std::string> default_name_pool();

struct GeneratorOptions {
    int n_ppl = 2;
    std::vector<std::string> name_pool = default_name_pool();
    // when false the first n_ppl pool names are used verbatim, which keeps
    // the response vocabulary identical across a generated dataset
    bool sample_names = true;
    int max_depth = 2;
    int max_atoms = 2;
    int max_attempts = 10000;
};

// Rejection-samples random statements until the puzzle has exactly one
// consistent assignment. Deterministic given (options, seed). Throws
// std::invalid_argument for bad options and std::runtime_error when the
// attempt budget is exhausted.
PuzzleSpec generate(const GeneratorOptions& options, std::uint64_t seed);

inline PuzzleSpec generate(int n_ppl, std::uint64_t seed) {
    GeneratorOptions opt;
    opt.n_ppl = n_ppl;
    return generate(opt, seed);
}

}  // namespace kklab::puzzle
