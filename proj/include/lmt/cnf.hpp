#pragma once

#include <map>
#include <unordered_map>
#include <vector>

#include "lmt/formula.hpp"

namespace lmt {

// SAT literal: 2*atom + (negated ? 1 : 0).
struct Lit {
    int x = -2;

    static Lit make(int atom, bool negated = false) { return Lit{atom * 2 + (negated ? 1 : 0)}; }
    int atom() const { return x >> 1; }
    bool negated() const { return x & 1; }
    Lit operator~() const { return Lit{x ^ 1}; }
    friend bool operator==(Lit a, Lit b) { return a.x == b.x; }
    friend bool operator<(Lit a, Lit b) { return a.x < b.x; }
};

using Clause = std::vector<Lit>;

// Atom ids double as SAT variable indices. Declared Boolean variables map to a
// dedicated atom each; linear comparisons are deduplicated by canonical key;
// Tseitin auxiliaries are marked so model reporting can skip them.
class AtomTable {
public:
    enum class Kind { Bool, Theory, Aux };

    int for_bool(VarId declared);
    int for_lincmp(const LinCmp& c);
    int fresh_aux();

    int size() const { return static_cast<int>(kinds_.size()); }
    Kind kind(int atom) const { return kinds_.at(atom); }
    bool is_aux(int atom) const { return kinds_.at(atom) == Kind::Aux; }
    VarId bool_decl(int atom) const { return bool_decl_.at(atom); }
    const LinCmp& lincmp(int atom) const { return lincmps_.at(atom); }

    // Atoms of Kind::Theory in id order.
    std::vector<int> theory_atoms() const;

private:
    std::vector<Kind> kinds_;
    std::map<int, VarId> bool_decl_;      // atom -> declared boolean
    std::map<VarId, int> bool_atom_;      // declared boolean -> atom
    std::map<int, LinCmp> lincmps_;       // atom -> comparison
    std::map<std::string, int> by_key_;   // canonical key -> atom
};

// Incremental Tseitin converter. Clauses accumulate in an external vector so
// several formulas can share one atom table (the lazy SMT loop needs this).
class CnfBuilder {
public:
    CnfBuilder(AtomTable& atoms, std::vector<Clause>& out) : atoms_(atoms), out_(out) {}

    // Returns a literal equivalent to f (with defining clauses emitted).
    Lit convert(const Formula& f);
    // convert + a unit clause asserting the root.
    void assert_formula(const Formula& f);

    // Rewrites equality atoms into conjunctions of two inequalities so the
    // Boolean abstraction never has to negate an equality.
    static Formula desugar_equalities(const Formula& f);

private:
    Lit constant(bool b);
    void assert_top_(const Formula& f);

    AtomTable& atoms_;
    std::vector<Clause>& out_;
    std::unordered_map<const void*, Lit> memo_;
    int true_atom_ = -1;
};

struct CnfResult {
    std::vector<Clause> clauses;
    AtomTable atoms;
    Lit root;
};

CnfResult to_cnf(const Formula& f);

}  // namespace lmt
