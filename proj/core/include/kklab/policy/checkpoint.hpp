#pragma once

#include <filesystem>
#include <vector>

#include "kklab/policy/policy.hpp"

namespace kklab::policy {

struct Checkpoint {
    PolicyModel model;
    std::vector<double> params;
};

// Header line (JSON: kind, vocab, context order, slots, prompt vocab size,
// vocab hash, dim) followed by raw little-endian doubles.
void save_checkpoint(const std::filesystem::path& path, const PolicyModel& model,
                     std::span<const double> params);

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace kklab::policy
