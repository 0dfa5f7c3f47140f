#include "kklab/puzzle/statement.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace kklab::puzzle {

namespace {

int append(Formula& f, const Formula& src, int idx) {
    const auto& n = src.nodes[idx];
    Formula::Node copy = n;
    if (n.lhs >= 0) copy.lhs = append(f, src, n.lhs);
    if (n.rhs >= 0) copy.rhs = append(f, src, n.rhs);
    f.nodes.push_back(copy);
    return int(f.nodes.size()) - 1;
}

}  // namespace

Formula Formula::atom(int person) {
    Formula f;
    f.nodes.push_back({Connective::Atom, person, -1, -1});
    return f;
}

Formula Formula::negate(Formula inner) {
    Formula f;
    f.nodes.push_back({Connective::Not, -1, -1, -1});
    f.nodes[0].lhs = append(f, inner, 0);
    return f;
}

Formula Formula::binary(Connective op, Formula lhs, Formula rhs) {
    if (op == Connective::Atom || op == Connective::Not)
        throw std::invalid_argument("Formula::binary: not a binary connective");
    Formula f;
    f.nodes.push_back({op, -1, -1, -1});
    f.nodes[0].lhs = append(f, lhs, 0);
    f.nodes[0].rhs = append(f, rhs, 0);
    return f;
}

namespace {

bool eval_node(const Formula& f, int idx, const Assignment& a) {
    const auto& n = f.nodes[idx];
    switch (n.op) {
        case Connective::Atom:
            if (n.person < 0 || n.person >= int(a.size()))
                throw std::invalid_argument("Formula::evaluate: person index out of range");
            return a[n.person] == Identity::Knight;
        case Connective::Not:
            return !eval_node(f, n.lhs, a);
        case Connective::And:
            return eval_node(f, n.lhs, a) && eval_node(f, n.rhs, a);
        case Connective::Or:
            return eval_node(f, n.lhs, a) || eval_node(f, n.rhs, a);
        case Connective::Implies:
            return !eval_node(f, n.lhs, a) || eval_node(f, n.rhs, a);
        case Connective::Iff:
            return eval_node(f, n.lhs, a) == eval_node(f, n.rhs, a);
    }
    throw std::logic_error("Formula::evaluate: bad connective");
}

std::optional<bool> eval_partial_node(const Formula& f, int idx,
                                      const std::vector<std::optional<Identity>>& a) {
    const auto& n = f.nodes[idx];
    switch (n.op) {
        case Connective::Atom: {
            if (n.person < 0 || n.person >= int(a.size()))
                throw std::invalid_argument("Formula::evaluate_partial: person out of range");
            const auto& id = a[n.person];
            if (!id) return std::nullopt;
            return *id == Identity::Knight;
        }
        case Connective::Not: {
            auto v = eval_partial_node(f, n.lhs, a);
            if (!v) return std::nullopt;
            return !*v;
        }
        case Connective::And: {
            auto l = eval_partial_node(f, n.lhs, a);
            auto r = eval_partial_node(f, n.rhs, a);
            if ((l && !*l) || (r && !*r)) return false;
            if (l && r) return *l && *r;
            return std::nullopt;
        }
        case Connective::Or: {
            auto l = eval_partial_node(f, n.lhs, a);
            auto r = eval_partial_node(f, n.rhs, a);
            if ((l && *l) || (r && *r)) return true;
            if (l && r) return *l || *r;
            return std::nullopt;
        }
        case Connective::Implies: {
            auto l = eval_partial_node(f, n.lhs, a);
            auto r = eval_partial_node(f, n.rhs, a);
            if (l && !*l) return true;
            if (r && *r) return true;
            if (l && r) return !*l || *r;
            return std::nullopt;
        }
        case Connective::Iff: {
            auto l = eval_partial_node(f, n.lhs, a);
            auto r = eval_partial_node(f, n.rhs, a);
            if (l && r) return *l == *r;
            return std::nullopt;
        }
    }
    throw std::logic_error("Formula::evaluate_partial: bad connective");
}

int depth_node(const Formula& f, int idx) {
    const auto& n = f.nodes[idx];
    if (n.op == Connective::Atom) return 0;
    if (n.op == Connective::Not) return 1 + depth_node(f, n.lhs);
    return 1 + std::max(depth_node(f, n.lhs), depth_node(f, n.rhs));
}

int atoms_node(const Formula& f, int idx) {
    const auto& n = f.nodes[idx];
    if (n.op == Connective::Atom) return 1;
    if (n.op == Connective::Not) return atoms_node(f, n.lhs);
    return atoms_node(f, n.lhs) + atoms_node(f, n.rhs);
}

int max_person_node(const Formula& f, int idx) {
    const auto& n = f.nodes[idx];
    if (n.op == Connective::Atom) return n.person;
    if (n.op == Connective::Not) return max_person_node(f, n.lhs);
    return std::max(max_person_node(f, n.lhs), max_person_node(f, n.rhs));
}

const char* op_name(Connective c) {
    switch (c) {
        case Connective::Atom: return "knight";
        case Connective::Not: return "not";
        case Connective::And: return "and";
        case Connective::Or: return "or";
        case Connective::Implies: return "implies";
        case Connective::Iff: return "iff";
    }
    return "?";
}

void to_sexpr_node(const Formula& f, int idx, std::ostringstream& out) {
    const auto& n = f.nodes[idx];
    out << '(' << op_name(n.op);
    if (n.op == Connective::Atom) {
        out << ' ' << n.person;
    } else {
        out << ' ';
        to_sexpr_node(f, n.lhs, out);
        if (n.rhs >= 0) {
            out << ' ';
            to_sexpr_node(f, n.rhs, out);
        }
    }
    out << ')';
}

struct SexprParser {
    const std::string& text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    void expect(char c) {
        skip_ws();
        if (pos >= text.size() || text[pos] != c)
            throw std::invalid_argument("Formula::from_sexpr: expected '" + std::string(1, c) +
                                        "' in: " + text);
        ++pos;
    }

    std::string token() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
               text[pos] != '(' && text[pos] != ')')
            ++pos;
        if (start == pos) throw std::invalid_argument("Formula::from_sexpr: empty token");
        return text.substr(start, pos - start);
    }

    Formula parse() {
        expect('(');
        const std::string op = token();
        Formula out;
        if (op == "knight") {
            const int person = std::stoi(token());
            out = Formula::atom(person);
        } else if (op == "not") {
            out = Formula::negate(parse());
        } else {
            Connective c;
            if (op == "and") c = Connective::And;
            else if (op == "or") c = Connective::Or;
            else if (op == "implies") c = Connective::Implies;
            else if (op == "iff") c = Connective::Iff;
            else throw std::invalid_argument("Formula::from_sexpr: unknown operator " + op);
            Formula lhs = parse();
            Formula rhs = parse();
            out = Formula::binary(c, std::move(lhs), std::move(rhs));
        }
        expect(')');
        return out;
    }
};

}  // namespace

bool Formula::evaluate(const Assignment& a) const { return eval_node(*this, 0, a); }

std::optional<bool> Formula::evaluate_partial(
    const std::vector<std::optional<Identity>>& a) const {
    return eval_partial_node(*this, 0, a);
}

int Formula::depth() const { return depth_node(*this, 0); }
int Formula::atom_count() const { return atoms_node(*this, 0); }
int Formula::max_person() const { return max_person_node(*this, 0); }

std::string Formula::to_sexpr() const {
    std::ostringstream out;
    to_sexpr_node(*this, 0, out);
    return out.str();
}

Formula Formula::from_sexpr(const std::string& text) {
    SexprParser p{text};
    Formula f = p.parse();
    p.skip_ws();
    if (p.pos != text.size())
        throw std::invalid_argument("Formula::from_sexpr: trailing input in: " + text);
    return f;
}

}  // namespace kklab::puzzle
