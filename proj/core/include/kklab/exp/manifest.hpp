#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kklab::exp {

struct ArtifactEntry {
    std::string path;  // relative to the run directory
    std::string sha256;
};

struct StageEntry {
    std::string name;
    std::string status;  // "ok" | "failed" | "skipped"
    std::vector<ArtifactEntry> artifacts;
    std::int64_t wall_ms = -1;  // -1: omitted (deterministic manifests)
};

// Run provenance, written atomically at every stage boundary. Re-running
// with the same config and seed reproduces identical artifact hashes.
struct RunManifest {
    std::string config_hash;
    std::string tool_version;
    std::vector<StageEntry> stages;

    StageEntry* find_stage(const std::string& name);
    const StageEntry* find_stage(const std::string& name) const;

    std::string to_json() const;
    static RunManifest from_json(const std::string& text);

    void save(const std::filesystem::path& path) const;
    static std::optional<RunManifest> try_load(const std::filesystem::path& path);
};

}  // namespace kklab::exp
