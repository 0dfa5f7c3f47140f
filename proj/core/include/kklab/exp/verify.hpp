#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace kklab::exp {

struct VerifyOptions {
    std::uint64_t seed = 20240901;
    int fd_cases = 40;           // grad-vs-finite-difference draws
    int eval_grad_instances = 10;
    int thm2_instances = 100;
    int cor1_triples = 50;
    int tilt_instances = 10;
    int puzzles_per_size = 50;
    int min_n_ppl = 2;
    int max_n_ppl = 6;
    std::filesystem::path out_dir;  // empty: report to stdout only
};

struct VerifyCheck {
    std::string name;
    bool pass = false;
    std::string detail;  // deterministic given the options
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_pass = true;
};

// Runs the oracle and theorem suites at the configured sizes, prints one
// line per check, and (when out_dir is set) writes verify_report.jsonl and
// a deterministic verify_manifest.json recording the report hash.
VerifyReport run_verify(const VerifyOptions& options);

}  // namespace kklab::exp
