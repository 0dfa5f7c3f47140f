#include "kklab/policy/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace kklab::policy {

namespace {
constexpr const char* kMagic = "KKLABCKPT1";
}

void save_checkpoint(const std::filesystem::path& path, const PolicyModel& model,
                     std::span<const double> params) {
    if (params.size() != model.param_dim())
        throw std::invalid_argument("save_checkpoint: parameter dimension mismatch");
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());

    nlohmann::json header;
    header["kind"] = policy_kind_name(model.kind);
    header["vocab"] = model.vocab.tokens();
    header["eos"] = model.vocab.token(model.vocab.eos_id());
    header["context_order"] = model.context_order;
    header["n_prompt_slots"] = model.n_prompt_slots;
    header["prompt_vocab_size"] = model.prompt_vocab_size;
    header["vocab_hash"] = model.vocab.hash();
    header["dim"] = params.size();

    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("save_checkpoint: cannot open " + tmp);
        out << kMagic << '\n' << header.dump() << '\n';
        static_assert(sizeof(double) == 8);
        out.write(reinterpret_cast<const char*>(params.data()),
                  std::streamsize(params.size() * sizeof(double)));
        if (!out) throw std::runtime_error("save_checkpoint: short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
    std::string magic, header_line;
    std::getline(in, magic);
    if (magic != kMagic) throw std::runtime_error("load_checkpoint: bad magic in " + path.string());
    std::getline(in, header_line);
    const auto header = nlohmann::json::parse(header_line);

    Checkpoint ckpt;
    ckpt.model.kind = policy_kind_from_name(header.at("kind").get<std::string>());
    ckpt.model.vocab = Vocab(header.at("vocab").get<std::vector<std::string>>(),
                             header.at("eos").get<std::string>());
    ckpt.model.context_order = header.at("context_order").get<int>();
    ckpt.model.n_prompt_slots = header.at("n_prompt_slots").get<int>();
    ckpt.model.prompt_vocab_size = header.at("prompt_vocab_size").get<int>();
    ckpt.model.validate();

    if (header.at("vocab_hash").get<std::string>() != ckpt.model.vocab.hash())
        throw std::runtime_error("load_checkpoint: vocab hash mismatch");
    const auto dim = header.at("dim").get<std::size_t>();
    if (dim != ckpt.model.param_dim())
        throw std::runtime_error("load_checkpoint: dim does not match descriptor");

    ckpt.params.resize(dim);
    in.read(reinterpret_cast<char*>(ckpt.params.data()), std::streamsize(dim * sizeof(double)));
    if (std::size_t(in.gcount()) != dim * sizeof(double))
        throw std::runtime_error("load_checkpoint: truncated parameter block");
    return ckpt;
}

}  // namespace kklab::policy
