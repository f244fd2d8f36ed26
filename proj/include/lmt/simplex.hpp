#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "lmt/formula.hpp"

namespace lmt::simplex {

using lmt::LinCmp;
using lmt::LinTerm;
using lmt::Rational;
using lmt::Rel;
using lmt::VarId;

// r + d*delta for a symbolic infinitesimal delta > 0. Lexicographic order.
struct DeltaRational {
    Rational r, d;

    DeltaRational() = default;
    DeltaRational(Rational real, Rational inf = Rational(0))
        : r(std::move(real)), d(std::move(inf)) {}

    DeltaRational operator-() const { return {-r, -d}; }
    DeltaRational& operator+=(const DeltaRational& o) { r += o.r; d += o.d; return *this; }
    DeltaRational& operator-=(const DeltaRational& o) { r -= o.r; d -= o.d; return *this; }
    friend DeltaRational operator+(DeltaRational a, const DeltaRational& b) { return a += b; }
    friend DeltaRational operator-(DeltaRational a, const DeltaRational& b) { return a -= b; }
    friend DeltaRational operator*(const DeltaRational& a, const Rational& c) {
        return {a.r * c, a.d * c};
    }
    friend DeltaRational operator/(const DeltaRational& a, const Rational& c) {
        return {a.r / c, a.d / c};
    }
    friend bool operator==(const DeltaRational& a, const DeltaRational& b) {
        return a.r == b.r && a.d == b.d;
    }
    friend bool operator!=(const DeltaRational& a, const DeltaRational& b) { return !(a == b); }
    friend bool operator<(const DeltaRational& a, const DeltaRational& b) {
        return a.r != b.r ? a.r < b.r : a.d < b.d;
    }
    friend bool operator<=(const DeltaRational& a, const DeltaRational& b) {
        return a == b || a < b;
    }
    friend bool operator>(const DeltaRational& a, const DeltaRational& b) { return b < a; }
    friend bool operator>=(const DeltaRational& a, const DeltaRational& b) { return b <= a; }

    std::string str() const;
};

using AtomId = int;

struct TheoryLit {
    AtomId atom;
    bool positive;
    friend bool operator==(TheoryLit a, TheoryLit b) {
        return a.atom == b.atom && a.positive == b.positive;
    }
    friend bool operator<(TheoryLit a, TheoryLit b) {
        return a.atom != b.atom ? a.atom < b.atom : a.positive < b.positive;
    }
};

// Set of asserted literals whose conjunction is LRA-unsatisfiable.
struct Explanation {
    std::vector<TheoryLit> lits;
};

struct MinimizeResult {
    bool unbounded = false;
    DeltaRational value;                    // exact optimum in delta arithmetic
    std::map<VarId, DeltaRational> model;   // external vars at the optimum
    Rational safe_delta;                    // concretization cap at the optimum
    std::map<VarId, Rational> ray;          // improving direction when unbounded
};

// Incremental simplex over delta-rationals with bound backtracking (solver
// style: one slack variable per distinct linear term, asserted atoms become
// variable bounds). Bland's rule everywhere.
class Tableau {
public:
    using Mark = size_t;

    // External (problem) variables occupy ids [0, count).
    void ensure_external(int count);

    // Atoms must be registered once before being asserted; registration
    // survives retraction.
    void register_atom(AtomId id, const LinCmp& cmp);
    bool knows_atom(AtomId id) const { return atom_info_.count(id) > 0; }

    Mark mark() const { return undo_.size(); }
    void retract_to(Mark m);

    // nullopt = consistent. On conflict the bound set is left as asserted;
    // callers retract to a mark. Asserting an unknown atom or the negation of
    // an equality throws.
    std::optional<Explanation> assert_atom(AtomId id, bool positive);

    // Requires a consistent state. Exact minimum of the objective over the
    // asserted constraint set, or an unbounded ray.
    MinimizeResult minimize(const LinTerm& objective);

    std::map<VarId, DeltaRational> delta_model() const;
    // Current model with the symbolic delta instantiated small enough that
    // every asserted strict constraint holds exactly.
    std::map<VarId, Rational> model() const;

    Rational safe_delta() const;
    static std::map<VarId, Rational> concretize(const std::map<VarId, DeltaRational>& snapshot,
                                                const Rational& delta);

    void dump(std::ostream& os) const;

private:
    struct Bound {
        DeltaRational val;
        TheoryLit src;
    };
    struct VarState {
        std::optional<Bound> lower, upper;
        DeltaRational beta;
        bool basic = false;
    };
    struct AtomInfo {
        int var;
        Rational sign;  // +-1: atom term == sign * var
        Rel rel;
        Rational bound;
    };
    struct Undo {
        int var;
        bool is_lower;
        std::optional<Bound> old;
    };

    int var_for_term_(const LinTerm& term_no_const);
    std::optional<Explanation> assert_bound_(int v, bool is_lower, DeltaRational val,
                                             TheoryLit src, bool& changed);
    std::optional<Explanation> check_();
    void update_(int v, const DeltaRational& val);
    void pivot_and_update_(int basic, const DeltaRational& target, int nonbasic);
    void pivot_(int basic, int nonbasic);
    Explanation row_conflict_(int basic, bool need_increase) const;
    void row_add_(int row, int var, const Rational& coeff);

    int n_external_ = 0;
    std::vector<VarState> vars_;
    std::map<int, std::map<int, Rational>> rows_;  // basic var -> combo of nonbasics
    std::map<int, std::set<int>> cols_;            // nonbasic var -> rows touching it
    std::map<std::string, int> term_slack_;
    std::map<AtomId, AtomInfo> atom_info_;
    std::vector<Undo> undo_;
};

}  // namespace lmt::simplex
