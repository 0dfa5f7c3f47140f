#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace kklab::policy {

// Closed response vocabulary. Tokens are distinct and end-of-sequence is
// present exactly once (conventionally spelled "<eos>").
class Vocab {
  public:
    Vocab() = default;
    Vocab(std::vector<std::string> tokens, const std::string& eos_token);

    static Vocab with_eos(std::vector<std::string> tokens);  // appends "<eos>"

    int size() const { return int(tokens_.size()); }
    int eos_id() const { return eos_id_; }
    const std::string& token(int id) const { return tokens_.at(std::size_t(id)); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    std::optional<int> find(const std::string& token) const;
    int id_of(const std::string& token) const;  // throws if unknown

    std::vector<int> encode(const std::vector<std::string>& tokens) const;
    std::vector<std::string> decode(const std::vector<int>& ids) const;

    // stable content hash, recorded in checkpoints
    std::string hash() const;

    bool operator==(const Vocab& other) const {
        return tokens_ == other.tokens_ && eos_id_ == other.eos_id_;
    }

  private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
    int eos_id_ = -1;
};

inline const char* kEosToken = "<eos>";

}  // namespace kklab::policy
