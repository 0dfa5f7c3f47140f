#include "kklab/puzzle/generate.hpp"

#include <stdexcept>

#include "kklab/util/rng.hpp"

namespace kklab::puzzle {

std::vector<std::string> default_name_pool() {
    return {"Scarlett", "Jackson", "Benjamin", "Henry", "Jack",   "Aurora",
            "Victoria", "Emma",    "Liam",     "Olivia", "Noah",   "Ava",
            "Mia",      "Ethan",   "Sophia",   "Lucas"};
}

namespace {

Formula random_literal(Rng& rng, int n_ppl, bool allow_negation) {
    Formula atom = Formula::atom(int(rng.uniform_int(std::uint64_t(n_ppl))));
    if (allow_negation && rng.uniform() < 0.25) return Formula::negate(std::move(atom));
    return atom;
}

Connective random_binary_op(Rng& rng) {
    static const Connective ops[] = {Connective::And, Connective::Or, Connective::Implies,
                                     Connective::Iff};
    return ops[rng.uniform_int(4)];
}

Formula random_statement_body(Rng& rng, int n_ppl, int max_depth) {
    // shapes seen in the sample puzzles: bare atom, negated atom, and a
    // single binary connective over (possibly negated) atoms, optionally
    // negated as a whole when depth allows
    const double u = rng.uniform();
    if (u < 0.20) return Formula::atom(int(rng.uniform_int(std::uint64_t(n_ppl))));
    if (u < 0.35) return Formula::negate(Formula::atom(int(rng.uniform_int(std::uint64_t(n_ppl)))));
    const bool nested_literals = max_depth >= 2;
    Formula lhs = random_literal(rng, n_ppl, nested_literals);
    Formula rhs = random_literal(rng, n_ppl, nested_literals);
    Formula body = Formula::binary(random_binary_op(rng), std::move(lhs), std::move(rhs));
    if (max_depth >= 2 && body.depth() == 1 && u >= 0.85)
        return Formula::negate(std::move(body));
    return body;
}

}  // namespace

PuzzleSpec generate(const GeneratorOptions& options, std::uint64_t seed) {
    if (options.n_ppl < 2 || options.n_ppl > 16)
        throw std::invalid_argument("generate: n_ppl must be in [2, 16]");
    if (int(options.name_pool.size()) < options.n_ppl)
        throw std::invalid_argument("generate: name pool smaller than n_ppl");
    if (options.max_depth < 1) throw std::invalid_argument("generate: max_depth must be >= 1");

    Rng rng(derive_seed(seed, 0x6b6b67656eULL));
    PuzzleSpec puzzle;
    puzzle.n_ppl = options.n_ppl;

    if (options.sample_names) {
        std::vector<std::string> pool = options.name_pool;
        rng.shuffle(pool);
        puzzle.names.assign(pool.begin(), pool.begin() + options.n_ppl);
    } else {
        puzzle.names.assign(options.name_pool.begin(),
                            options.name_pool.begin() + options.n_ppl);
    }

    for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
        puzzle.statements.clear();
        for (int p = 0; p < options.n_ppl; ++p) {
            Statement st;
            st.speaker = p;
            st.body = random_statement_body(rng, options.n_ppl, options.max_depth);
            if (st.body.depth() > options.max_depth || st.body.atom_count() > options.max_atoms)
                throw std::logic_error("generate: sampled statement out of bounds");
            puzzle.statements.push_back(std::move(st));
        }
        auto solutions = solve(puzzle);
        if (solutions.size() == 1) {
            puzzle.solution = solutions.front();
            puzzle.validate();
            return puzzle;
        }
    }
    throw std::runtime_error("generate: attempt budget exhausted for n_ppl=" +
                             std::to_string(options.n_ppl));
}

}  // namespace kklab::puzzle
