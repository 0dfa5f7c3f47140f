#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace kklab::exp {

// Flattens trace/report files into tidy tab-separated tables (one row per
// step/series/value) ready for external plotting. Kinds: "rl-trace",
// "effects", "interp", "positions", "modes". Multiple inputs are merged
// with the file stem prefixed to the series name. Throws when an input is
// missing.
void emit_plotdata(const std::string& kind, const std::vector<std::filesystem::path>& inputs,
                   const std::filesystem::path& output);

}  // namespace kklab::exp
