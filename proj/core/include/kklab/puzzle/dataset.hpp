#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kklab/puzzle/generate.hpp"
#include "kklab/puzzle/puzzle.hpp"

namespace kklab::puzzle {

// one dataset row: puzzle, rendered prompt, synthesized solution trace
struct PuzzleRecord {
    std::int64_t id = 0;
    PuzzleSpec puzzle;
    std::vector<std::string> prompt_tokens;
    std::vector<std::string> short_cot_tokens;
};

// deterministic token rendering of the statements ("<name> says : ... .")
std::vector<std::string> render_prompt_tokens(const PuzzleSpec& puzzle);

struct DatasetSlice {
    int n_ppl = 2;
    int count = 0;
};

// Generates `count` unique-solution puzzles per slice. Record i uses the
// seed derived from (seed, i), so any prefix of a dataset is stable under
// extension.
std::vector<PuzzleRecord> generate_dataset(const std::vector<DatasetSlice>& slices,
                                           const GeneratorOptions& base_options,
                                           std::uint64_t seed);

std::string to_jsonl_line(const PuzzleRecord& record);
PuzzleRecord from_jsonl_line(const std::string& line);

void save_dataset(const std::filesystem::path& path, const std::vector<PuzzleRecord>& records);
std::vector<PuzzleRecord> load_dataset(const std::filesystem::path& path);

}  // namespace kklab::puzzle
