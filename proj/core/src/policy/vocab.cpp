#include "kklab/policy/vocab.hpp"

#include <stdexcept>

#include "kklab/util/sha256.hpp"

namespace kklab::policy {

Vocab::Vocab(std::vector<std::string> tokens, const std::string& eos_token)
    : tokens_(std::move(tokens)) {
    for (int i = 0; i < int(tokens_.size()); ++i) {
        if (!index_.emplace(tokens_[i], i).second)
            throw std::invalid_argument("Vocab: duplicate token: " + tokens_[i]);
        if (tokens_[i] == eos_token) eos_id_ = i;
    }
    if (eos_id_ < 0) throw std::invalid_argument("Vocab: EOS token missing");
}

Vocab Vocab::with_eos(std::vector<std::string> tokens) {
    tokens.push_back(kEosToken);
    return Vocab(std::move(tokens), kEosToken);
}

std::optional<int> Vocab::find(const std::string& token) const {
    const auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

int Vocab::id_of(const std::string& token) const {
    const auto id = find(token);
    if (!id) throw std::invalid_argument("Vocab: unknown token: " + token);
    return *id;
}

std::vector<int> Vocab::encode(const std::vector<std::string>& tokens) const {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(id_of(t));
    return ids;
}

std::vector<std::string> Vocab::decode(const std::vector<int>& ids) const {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (int id : ids) out.push_back(token(id));
    return out;
}

std::string Vocab::hash() const {
    std::string joined;
    for (const auto& t : tokens_) {
        joined += t;
        joined += '\n';
    }
    return sha256_hex(joined);
}

}  // namespace kklab::policy
