#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace kklab {

std::string read_file(const std::filesystem::path& path);
std::vector<std::string> read_lines(const std::filesystem::path& path);

// write to <path>.tmp then rename, so partially-written artifacts never
// shadow a finished one
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string file_sha256(const std::filesystem::path& path);

// RAII lock file; throws if another writer holds the directory
class DirLock {
  public:
    explicit DirLock(const std::filesystem::path& dir);
    ~DirLock();
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

  private:
    std::filesystem::path lock_path_;
    bool held_ = false;
};

}  // namespace kklab
