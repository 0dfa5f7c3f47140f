#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kklab::puzzle {

enum class Identity : std::uint8_t { Knight = 0, Knave = 1 };

inline const char* identity_word(Identity id) {
    return id == Identity::Knight ? "knight" : "knave";
}

// one identity per person, indexed by person
using Assignment = std::vector<Identity>;

enum class Connective : std::uint8_t { Atom, Not, And, Or, Implies, Iff };

// Boolean formula over atoms "person i is a knight", stored as a flat node
// pool with the root at index 0. Depth and atom count stay tiny (the
// generator bounds them), so value semantics are cheap.
struct Formula {
    struct Node {
        Connective op = Connective::Atom;
        int person = -1;  // Atom only
        int lhs = -1;     // Not/binary
        int rhs = -1;     // binary only
    };
    std::vector<Node> nodes;

    static Formula atom(int person);
    static Formula negate(Formula inner);
    static Formula binary(Connective op, Formula lhs, Formula rhs);

    bool evaluate(const Assignment& a) const;
    // Kleene 3-valued evaluation under a partial assignment; nullopt = undetermined
    std::optional<bool> evaluate_partial(const std::vector<std::optional<Identity>>& a) const;

    int depth() const;
    int atom_count() const;
    int max_person() const;

    std::string to_sexpr() const;
    static Formula from_sexpr(const std::string& text);
};

// a person's claim: speaker and the formula they assert
struct Statement {
    int speaker = -1;
    Formula body;
};

}  // namespace kklab::puzzle
