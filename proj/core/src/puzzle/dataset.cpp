#include "kklab/puzzle/dataset.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "kklab/puzzle/cot.hpp"
#include "kklab/util/io.hpp"
#include "kklab/util/rng.hpp"

namespace kklab::puzzle {

namespace {

void render_body(const PuzzleSpec& puzzle, const Formula& f, int idx,
                 std::vector<std::string>& out) {
    const auto& n = f.nodes[idx];
    auto render_child = [&](int child) {
        if (f.nodes[child].op == Connective::Atom) {
            render_body(puzzle, f, child, out);
        } else {
            out.push_back("(");
            render_body(puzzle, f, child, out);
            out.push_back(")");
        }
    };
    switch (n.op) {
        case Connective::Atom:
            out.push_back(puzzle.names[n.person]);
            out.push_back("is");
            out.push_back("a");
            out.push_back("knight");
            return;
        case Connective::Not:
            out.push_back("not");
            render_child(n.lhs);
            return;
        case Connective::Implies:
            out.push_back("if");
            render_child(n.lhs);
            out.push_back("then");
            render_child(n.rhs);
            return;
        case Connective::And:
        case Connective::Or:
        case Connective::Iff:
            render_child(n.lhs);
            out.push_back(n.op == Connective::And ? "and"
                          : n.op == Connective::Or ? "or"
                                                   : "iff");
            render_child(n.rhs);
            return;
    }
    throw std::logic_error("render_body: bad connective");
}

}  // namespace

std::vector<std::string> render_prompt_tokens(const PuzzleSpec& puzzle) {
    std::vector<std::string> out;
    for (int p = 0; p < puzzle.n_ppl; ++p) {
        out.push_back(puzzle.names[p]);
        out.push_back("says");
        out.push_back(":");
        render_body(puzzle, puzzle.statements[p].body, 0, out);
        out.push_back(".");
    }
    return out;
}

std::vector<PuzzleRecord> generate_dataset(const std::vector<DatasetSlice>& slices,
                                           const GeneratorOptions& base_options,
                                           std::uint64_t seed) {
    std::vector<PuzzleRecord> records;
    std::int64_t next_id = 0;
    for (const auto& slice : slices) {
        for (int i = 0; i < slice.count; ++i) {
            GeneratorOptions opt = base_options;
            opt.n_ppl = slice.n_ppl;
            PuzzleRecord rec;
            rec.id = next_id;
            rec.puzzle = generate(opt, derive_seed(seed, std::uint64_t(next_id)));
            rec.prompt_tokens = render_prompt_tokens(rec.puzzle);
            rec.short_cot_tokens = synthesize_short_cot(rec.puzzle);
            records.push_back(std::move(rec));
            ++next_id;
        }
    }
    return records;
}

std::string to_jsonl_line(const PuzzleRecord& record) {
    nlohmann::json j;
    j["id"] = record.id;
    j["n_ppl"] = record.puzzle.n_ppl;
    j["names"] = record.puzzle.names;
    std::vector<std::string> stmts;
    for (const auto& st : record.puzzle.statements) stmts.push_back(st.body.to_sexpr());
    j["statements"] = stmts;
    std::vector<std::string> solution;
    for (Identity id : record.puzzle.solution) solution.push_back(identity_word(id));
    j["solution"] = solution;
    j["prompt_tokens"] = record.prompt_tokens;
    j["short_cot_tokens"] = record.short_cot_tokens;
    return j.dump();
}

PuzzleRecord from_jsonl_line(const std::string& line) {
    const auto j = nlohmann::json::parse(line);
    PuzzleRecord rec;
    rec.id = j.at("id").get<std::int64_t>();
    rec.puzzle.n_ppl = j.at("n_ppl").get<int>();
    rec.puzzle.names = j.at("names").get<std::vector<std::string>>();
    const auto stmts = j.at("statements").get<std::vector<std::string>>();
    for (std::size_t p = 0; p < stmts.size(); ++p) {
        Statement st;
        st.speaker = int(p);
        st.body = Formula::from_sexpr(stmts[p]);
        rec.puzzle.statements.push_back(std::move(st));
    }
    for (const auto& word : j.at("solution").get<std::vector<std::string>>()) {
        if (word == "knight") rec.puzzle.solution.push_back(Identity::Knight);
        else if (word == "knave") rec.puzzle.solution.push_back(Identity::Knave);
        else throw std::invalid_argument("dataset: bad identity word: " + word);
    }
    rec.puzzle.validate();
    if (!evaluate(rec.puzzle, rec.puzzle.solution))
        throw std::invalid_argument("dataset: stored solution is inconsistent");
    rec.prompt_tokens = j.at("prompt_tokens").get<std::vector<std::string>>();
    rec.short_cot_tokens = j.at("short_cot_tokens").get<std::vector<std::string>>();
    return rec;
}

void save_dataset(const std::filesystem::path& path, const std::vector<PuzzleRecord>& records) {
    std::ostringstream out;
    for (const auto& rec : records) out << to_jsonl_line(rec) << '\n';
    write_file_atomic(path, out.str());
}

std::vector<PuzzleRecord> load_dataset(const std::filesystem::path& path) {
    std::vector<PuzzleRecord> records;
    for (const auto& line : read_lines(path)) records.push_back(from_jsonl_line(line));
    return records;
}

}  // namespace kklab::puzzle
