#include "lmt/formula.hpp"

#include <sstream>
#include <stdexcept>

namespace lmt {

VarId Declarations::add(const std::string& name, std::vector<std::string>& names, bool is_bool) {
    auto it = by_name_.find(name);
    if (it != by_name_.end()) {
        if (it->second.first != is_bool)
            throw std::invalid_argument("variable redeclared with different sort: " + name);
        return it->second.second;
    }
    VarId id = static_cast<VarId>(names.size());
    names.push_back(name);
    by_name_.emplace(name, std::make_pair(is_bool, id));
    return id;
}

VarId Declarations::find(const std::string& name, bool is_bool) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end() || it->second.first != is_bool) return -1;
    return it->second.second;
}

VarId Declarations::bool_id(const std::string& name) const {
    VarId v = find_bool(name);
    if (v < 0) throw std::invalid_argument("undeclared Boolean variable: " + name);
    return v;
}

VarId Declarations::rat_id(const std::string& name) const {
    VarId v = find_rat(name);
    if (v < 0) throw std::invalid_argument("undeclared rational variable: " + name);
    return v;
}

std::string LinCmp::key() const {
    std::ostringstream os;
    switch (rel) {
        case Rel::Le: os << "<="; break;
        case Rel::Lt: os << "<"; break;
        case Rel::Eq: os << "="; break;
    }
    os << " " << bound.str() << " " << term.key();
    return os.str();
}

NegatedAtom negate_atom(const Atom& a) {
    if (a.is_bool()) return {a, false};
    const LinCmp& c = a.lincmp();
    switch (c.rel) {
        case Rel::Le:  // not (t <= b)  ==  -t < -b
            return {Atom{LinCmp{-c.term, Rel::Lt, -c.bound}}, true};
        case Rel::Lt:  // not (t < b)  ==  -t <= -b
            return {Atom{LinCmp{-c.term, Rel::Le, -c.bound}}, true};
        case Rel::Eq:
            throw std::invalid_argument("cannot negate an equality atom; desugar first");
    }
    throw std::logic_error("unreachable");
}

Formula Formula::atom(Atom a) {
    auto n = std::make_shared<Node>();
    n->kind = Conn::Leaf;
    n->atom = std::move(a);
    return Formula(std::move(n));
}

Formula Formula::truth(bool b) {
    auto n = std::make_shared<Node>();
    n->kind = b ? Conn::And : Conn::Or;
    return Formula(std::move(n));
}

namespace {

// term rel bound with constant stripped and leading coefficient scaled to +-1.
Formula make_cmp(LinTerm diff, Rel rel) {
    Rational bound = -diff.constant();
    diff.set_constant(Rational(0));
    if (diff.is_constant()) {
        // Ground comparison.
        const Rational zero(0);
        bool holds = false;
        switch (rel) {
            case Rel::Le: holds = zero <= bound; break;
            case Rel::Lt: holds = zero < bound; break;
            case Rel::Eq: holds = zero == bound; break;
        }
        return Formula::truth(holds);
    }
    Rational scale = diff.coeffs().begin()->second.abs().inverse();
    diff *= scale;
    bound *= scale;
    return Formula::atom(Atom{LinCmp{std::move(diff), rel, std::move(bound)}});
}

}  // namespace

Formula Formula::cmp(const LinTerm& lhs, const std::string& op, const LinTerm& rhs) {
    LinTerm diff = lhs - rhs;
    if (op == "<=") return make_cmp(std::move(diff), Rel::Le);
    if (op == "<") return make_cmp(std::move(diff), Rel::Lt);
    if (op == "=" || op == "==") return make_cmp(std::move(diff), Rel::Eq);
    if (op == ">=") return make_cmp(-diff, Rel::Le);
    if (op == ">") return make_cmp(-diff, Rel::Lt);
    if (op == "!=" || op == "distinct")
        return disj({make_cmp(diff, Rel::Lt), make_cmp(-diff, Rel::Lt)});
    throw std::invalid_argument("unknown comparison operator: " + op);
}

Formula Formula::negate(Formula f) {
    auto n = std::make_shared<Node>();
    n->kind = Conn::Not;
    n->kids.push_back(std::move(f));
    return Formula(std::move(n));
}

Formula Formula::conj(std::vector<Formula> kids) {
    auto n = std::make_shared<Node>();
    n->kind = Conn::And;
    n->kids = std::move(kids);
    return Formula(std::move(n));
}

Formula Formula::disj(std::vector<Formula> kids) {
    auto n = std::make_shared<Node>();
    n->kind = Conn::Or;
    n->kids = std::move(kids);
    return Formula(std::move(n));
}

Formula Formula::implies(Formula a, Formula b) {
    auto n = std::make_shared<Node>();
    n->kind = Conn::Implies;
    n->kids.push_back(std::move(a));
    n->kids.push_back(std::move(b));
    return Formula(std::move(n));
}

Formula Formula::iff(Formula a, Formula b) {
    auto n = std::make_shared<Node>();
    n->kind = Conn::Iff;
    n->kids.push_back(std::move(a));
    n->kids.push_back(std::move(b));
    return Formula(std::move(n));
}

Rational evaluate_term(const LinTerm& t, const Assignment& assign) {
    Rational v = t.constant();
    for (const auto& [var, coeff] : t.coeffs()) {
        if (var < 0 || var >= static_cast<VarId>(assign.rats.size()))
            throw std::out_of_range("unassigned rational variable in term");
        v += coeff * assign.rats[var];
    }
    return v;
}

bool evaluate_atom(const Atom& a, const Assignment& assign) {
    if (a.is_bool()) {
        VarId v = a.boolref().id;
        if (v < 0 || v >= static_cast<VarId>(assign.bools.size()))
            throw std::out_of_range("unassigned Boolean variable");
        return assign.bools[v];
    }
    const LinCmp& c = a.lincmp();
    Rational lhs = evaluate_term(c.term, assign);
    switch (c.rel) {
        case Rel::Le: return lhs <= c.bound;
        case Rel::Lt: return lhs < c.bound;
        case Rel::Eq: return lhs == c.bound;
    }
    return false;
}

bool Formula::evaluate(const Assignment& a) const {
    switch (kind()) {
        case Conn::Leaf: return evaluate_atom(leaf(), a);
        case Conn::Not: return !kids()[0].evaluate(a);
        case Conn::And:
            for (const auto& k : kids())
                if (!k.evaluate(a)) return false;
            return true;
        case Conn::Or:
            for (const auto& k : kids())
                if (k.evaluate(a)) return true;
            return false;
        case Conn::Implies: return !kids()[0].evaluate(a) || kids()[1].evaluate(a);
        case Conn::Iff: return kids()[0].evaluate(a) == kids()[1].evaluate(a);
    }
    return false;
}

}  // namespace lmt
