#include "kklab/exp/manifest.hpp"

#include <json.hpp>

#include "kklab/util/io.hpp"

namespace kklab::exp {

using nlohmann::json;

StageEntry* RunManifest::find_stage(const std::string& name) {
    for (auto& s : stages)
        if (s.name == name) return &s;
    return nullptr;
}

const StageEntry* RunManifest::find_stage(const std::string& name) const {
    for (const auto& s : stages)
        if (s.name == name) return &s;
    return nullptr;
}

std::string RunManifest::to_json() const {
    json j;
    j["config_hash"] = config_hash;
    j["tool_version"] = tool_version;
    json stage_array = json::array();
    for (const auto& s : stages) {
        json sj;
        sj["name"] = s.name;
        sj["status"] = s.status;
        json artifacts = json::array();
        for (const auto& a : s.artifacts)
            artifacts.push_back({{"path", a.path}, {"sha256", a.sha256}});
        sj["artifacts"] = artifacts;
        if (s.wall_ms >= 0) sj["wall_ms"] = s.wall_ms;
        stage_array.push_back(sj);
    }
    j["stages"] = stage_array;
    return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
    const auto j = json::parse(text);
    RunManifest m;
    m.config_hash = j.at("config_hash").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    for (const auto& sj : j.at("stages")) {
        StageEntry s;
        s.name = sj.at("name").get<std::string>();
        s.status = sj.at("status").get<std::string>();
        for (const auto& aj : sj.at("artifacts"))
            s.artifacts.push_back(
                {aj.at("path").get<std::string>(), aj.at("sha256").get<std::string>()});
        s.wall_ms = sj.value("wall_ms", std::int64_t(-1));
        m.stages.push_back(std::move(s));
    }
    return m;
}

void RunManifest::save(const std::filesystem::path& path) const {
    write_file_atomic(path, to_json());
}

std::optional<RunManifest> RunManifest::try_load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return std::nullopt;
    return from_json(read_file(path));
}

}  // namespace kklab::exp
