#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "lmt/decls.hpp"
#include "lmt/linterm.hpp"

namespace lmt {

// Comparison relations kept after normalization. >=, >, != are rewritten at
// construction time; see Formula::cmp.
enum class Rel { Le, Lt, Eq };

struct BoolRef {
    VarId id;
};

// Normalized linear comparison: term rel bound, term has no constant part and
// its leading (lowest-id) coefficient has absolute value 1.
struct LinCmp {
    LinTerm term;
    Rel rel;
    Rational bound;

    std::string key() const;
};

struct Atom {
    std::variant<BoolRef, LinCmp> node;

    bool is_bool() const { return std::holds_alternative<BoolRef>(node); }
    const BoolRef& boolref() const { return std::get<BoolRef>(node); }
    const LinCmp& lincmp() const { return std::get<LinCmp>(node); }
};

// Negation of an atom. LinCmp Le/Lt atoms complement to another atom;
// Boolean atoms negate by literal sign flip (positive=false). Negating an
// equality throws: equalities must be desugared at the formula level first.
struct NegatedAtom {
    Atom atom;
    bool positive;
};
NegatedAtom negate_atom(const Atom& a);

enum class Conn { Leaf, Not, And, Or, Implies, Iff };

// Immutable quantifier-free formula tree. Cheap to copy (shared nodes).
class Formula {
public:
    Formula() : Formula(truth(true)) {}

    static Formula atom(Atom a);
    static Formula bvar(VarId v) { return atom(Atom{BoolRef{v}}); }
    // Builds lhs rel rhs with full normalization. Accepts all six relations
    // via the textual op: "<=", "<", "=", ">=", ">", "!=". Ground comparisons
    // collapse to constants; != desugars to a disjunction of strict atoms.
    static Formula cmp(const LinTerm& lhs, const std::string& op, const LinTerm& rhs);
    static Formula truth(bool b);
    static Formula negate(Formula f);
    static Formula conj(std::vector<Formula> kids);
    static Formula disj(std::vector<Formula> kids);
    static Formula implies(Formula a, Formula b);
    static Formula iff(Formula a, Formula b);

    Conn kind() const { return node_->kind; }
    const Atom& leaf() const { return *node_->atom; }
    const std::vector<Formula>& kids() const { return node_->kids; }
    bool is_const_true() const { return kind() == Conn::And && kids().empty(); }
    bool is_const_false() const { return kind() == Conn::Or && kids().empty(); }

    bool evaluate(const Assignment& a) const;

    // Stable identity of the underlying node, used for memoization.
    const void* id() const { return node_.get(); }

private:
    struct Node {
        Conn kind;
        std::optional<Atom> atom;
        std::vector<Formula> kids;
    };
    explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

bool evaluate_atom(const Atom& a, const Assignment& assign);
Rational evaluate_term(const LinTerm& t, const Assignment& assign);

}  // namespace lmt
