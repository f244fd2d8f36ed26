#include <doctest.h>

#include <functional>
#include <random>

#include "lmt/simplex.hpp"
#include "lp_oracle.hpp"

using namespace lmt;
using namespace lmt::simplex;

namespace {

struct AtomSpec {
    LinCmp cmp;
};

// registers cmp formulas as atoms 0..n-1
Tableau make_tableau(int nvars, const std::vector<LinCmp>& atoms) {
    Tableau t;
    t.ensure_external(nvars);
    for (size_t i = 0; i < atoms.size(); ++i) t.register_atom(static_cast<int>(i), atoms[i]);
    return t;
}

LinCmp cmp_of(const Formula& f) { return f.leaf().lincmp(); }

LinTerm term(std::initializer_list<std::pair<int, long>> coeffs) {
    LinTerm t;
    for (auto [v, c] : coeffs) t.add(v, Rational(c));
    return t;
}

// asserts everything; returns explanation of first conflict, if any
std::optional<Explanation> assert_all(Tableau& t, size_t count) {
    for (size_t i = 0; i < count; ++i) {
        auto confl = t.assert_atom(static_cast<int>(i), true);
        if (confl) return confl;
    }
    return std::nullopt;
}

}  // namespace

TEST_CASE("bound clash produces a two-literal explanation") {
    std::vector<LinCmp> atoms = {
        cmp_of(Formula::cmp(LinTerm::var(0), ">=", LinTerm(Rational(0)))),
        cmp_of(Formula::cmp(LinTerm::var(0), "<=", LinTerm(Rational(-1)))),
    };
    Tableau t = make_tableau(1, atoms);
    auto confl = assert_all(t, atoms.size());
    REQUIRE(confl.has_value());
    REQUIRE(confl->lits.size() == 2);
    CHECK(((confl->lits[0].atom == 0 && confl->lits[1].atom == 1) ||
           (confl->lits[0].atom == 1 && confl->lits[1].atom == 0)));
}

TEST_CASE("open interval is consistent and concretizes strictly inside") {
    std::vector<LinCmp> atoms = {
        cmp_of(Formula::cmp(LinTerm::var(0), "<", LinTerm(Rational(1)))),
        cmp_of(Formula::cmp(LinTerm::var(0), ">", LinTerm(Rational(0)))),
    };
    Tableau t = make_tableau(1, atoms);
    REQUIRE_FALSE(assert_all(t, atoms.size()).has_value());
    auto m = t.model();
    CHECK(m.at(0) > Rational(0));
    CHECK(m.at(0) < Rational(1));
}

TEST_CASE("Example 2, second branch constraint set is consistent") {
    // cost = x+y, x>=0, y>=0, 4x+y-4>=0   (vars: 0=cost, 1=x, 2=y)
    LinTerm xy = term({{1, 1}, {2, 1}});
    std::vector<LinCmp> atoms = {
        cmp_of(Formula::cmp(LinTerm::var(0), "=", xy)),
        cmp_of(Formula::cmp(LinTerm::var(1), ">=", LinTerm(Rational(0)))),
        cmp_of(Formula::cmp(LinTerm::var(2), ">=", LinTerm(Rational(0)))),
        cmp_of(Formula::cmp(term({{1, 4}, {2, 1}}), ">=", LinTerm(Rational(4)))),
    };
    Tableau t = make_tableau(3, atoms);
    REQUIRE_FALSE(assert_all(t, atoms.size()).has_value());
    auto m = t.model();
    CHECK(m.at(0) == m.at(1) + m.at(2));
    CHECK(m.at(1) >= Rational(0));
    CHECK(Rational(4) * m.at(1) + m.at(2) >= Rational(4));
}

TEST_CASE("minimize: both branches of Example 2") {
    // branch A: 2x+3y>=6
    {
        std::vector<LinCmp> atoms = {
            cmp_of(Formula::cmp(LinTerm::var(0), ">=", LinTerm(Rational(0)))),
            cmp_of(Formula::cmp(LinTerm::var(1), ">=", LinTerm(Rational(0)))),
            cmp_of(Formula::cmp(term({{0, 2}, {1, 3}}), ">=", LinTerm(Rational(6)))),
        };
        Tableau t = make_tableau(2, atoms);
        REQUIRE_FALSE(assert_all(t, atoms.size()).has_value());
        auto res = t.minimize(term({{0, 1}, {1, 1}}));
        REQUIRE_FALSE(res.unbounded);
        CHECK(res.value == DeltaRational(Rational(2)));
        CHECK(res.model.at(0) == DeltaRational(Rational(0)));
        CHECK(res.model.at(1) == DeltaRational(Rational(2)));
    }
    // branch not-A: 4x+y>=4
    {
        std::vector<LinCmp> atoms = {
            cmp_of(Formula::cmp(LinTerm::var(0), ">=", LinTerm(Rational(0)))),
            cmp_of(Formula::cmp(LinTerm::var(1), ">=", LinTerm(Rational(0)))),
            cmp_of(Formula::cmp(term({{0, 4}, {1, 1}}), ">=", LinTerm(Rational(4)))),
        };
        Tableau t = make_tableau(2, atoms);
        REQUIRE_FALSE(assert_all(t, atoms.size()).has_value());
        auto res = t.minimize(term({{0, 1}, {1, 1}}));
        REQUIRE_FALSE(res.unbounded);
        CHECK(res.value == DeltaRational(Rational(1)));
        CHECK(res.model.at(0) == DeltaRational(Rational(1)));
        CHECK(res.model.at(1) == DeltaRational(Rational(0)));
    }
}

TEST_CASE("minimize x+2y over the unit-box triangle") {
    std::vector<LinCmp> atoms = {
        cmp_of(Formula::cmp(term({{0, 1}, {1, 1}}), ">=", LinTerm(Rational(1)))),
        cmp_of(Formula::cmp(LinTerm::var(0), ">=", LinTerm(Rational(0)))),
        cmp_of(Formula::cmp(LinTerm::var(0), "<=", LinTerm(Rational(1)))),
        cmp_of(Formula::cmp(LinTerm::var(1), ">=", LinTerm(Rational(0)))),
        cmp_of(Formula::cmp(LinTerm::var(1), "<=", LinTerm(Rational(1)))),
    };
    Tableau t = make_tableau(2, atoms);
    REQUIRE_FALSE(assert_all(t, atoms.size()).has_value());
    auto res = t.minimize(term({{0, 1}, {1, 2}}));
    REQUIRE_FALSE(res.unbounded);
    CHECK(res.value == DeltaRational(Rational(1)));
    CHECK(res.model.at(0) == DeltaRational(Rational(1)));
    CHECK(res.model.at(1) == DeltaRational(Rational(0)));
}

TEST_CASE("unbounded objective returns a decreasing ray") {
    std::vector<LinCmp> atoms = {
        cmp_of(Formula::cmp(LinTerm::var(0), "<=", LinTerm(Rational(3)))),
    };
    Tableau t = make_tableau(1, atoms);
    REQUIRE_FALSE(assert_all(t, atoms.size()).has_value());
    auto res = t.minimize(LinTerm::var(0));
    CHECK(res.unbounded);
    REQUIRE(res.ray.count(0));
    CHECK(res.ray.at(0) < Rational(0));
}

TEST_CASE("retract restores answers exactly") {
    std::vector<LinCmp> atoms = {
        cmp_of(Formula::cmp(LinTerm::var(0), ">=", LinTerm(Rational(0)))),   // a
        cmp_of(Formula::cmp(LinTerm::var(0), "<=", LinTerm(Rational(5)))),   // b
        cmp_of(Formula::cmp(LinTerm::var(0), "<=", LinTerm(Rational(-2)))),  // c: clash
    };
    Tableau t = make_tableau(1, atoms);
    REQUIRE_FALSE(t.assert_atom(0, true).has_value());
    REQUIRE_FALSE(t.assert_atom(1, true).has_value());
    auto mark = t.mark();
    CHECK(t.assert_atom(2, true).has_value());
    t.retract_to(mark);
    // consistency answers equal the {a,b} state
    auto res = t.minimize(LinTerm::var(0));
    CHECK(res.value == DeltaRational(Rational(0)));
    auto res2 = t.minimize(-LinTerm::var(0));
    CHECK(res2.value == DeltaRational(Rational(-5)));

    t.retract_to(0);
    // all bounds gone: x free again
    CHECK(t.minimize(LinTerm::var(0)).unbounded);
}

TEST_CASE("concretization cases") {
    // x > 0 alone
    {
        std::vector<LinCmp> atoms = {
            cmp_of(Formula::cmp(LinTerm::var(0), ">", LinTerm(Rational(0)))),
        };
        Tableau t = make_tableau(1, atoms);
        REQUIRE_FALSE(assert_all(t, atoms.size()).has_value());
        CHECK(t.model().at(0) > Rational(0));
    }
    // no strict atoms: deltas are zero, concretization is the identity
    {
        std::vector<LinCmp> atoms = {
            cmp_of(Formula::cmp(LinTerm::var(0), ">=", LinTerm(Rational(2)))),
        };
        Tableau t = make_tableau(1, atoms);
        REQUIRE_FALSE(assert_all(t, atoms.size()).has_value());
        auto dm = t.delta_model();
        CHECK(dm.at(0).d.is_zero());
        CHECK(t.model().at(0) == dm.at(0).r);
    }
    // x > 0 and x < 1/1000
    {
        std::vector<LinCmp> atoms = {
            cmp_of(Formula::cmp(LinTerm::var(0), ">", LinTerm(Rational(0)))),
            cmp_of(Formula::cmp(LinTerm::var(0), "<", LinTerm(Rational(1, 1000)))),
        };
        Tableau t = make_tableau(1, atoms);
        REQUIRE_FALSE(assert_all(t, atoms.size()).has_value());
        auto m = t.model();
        CHECK(m.at(0) > Rational(0));
        CHECK(m.at(0) < Rational(1, 1000));
    }
}

TEST_CASE("Beale cycling instance terminates under Bland and matches the oracle") {
    // min -3/4 x0 + 150 x1 - 1/50 x2 + 6 x3
    std::vector<LinCmp> atoms;
    auto add = [&](const LinTerm& t, const char* op, Rational b) {
        atoms.push_back(cmp_of(Formula::cmp(t, op, LinTerm(b))));
    };
    LinTerm r1 = LinTerm::var(0, Rational(1, 4)) + LinTerm::var(1, Rational(-60)) +
                 LinTerm::var(2, Rational(-1, 25)) + LinTerm::var(3, Rational(9));
    LinTerm r2 = LinTerm::var(0, Rational(1, 2)) + LinTerm::var(1, Rational(-90)) +
                 LinTerm::var(2, Rational(-1, 50)) + LinTerm::var(3, Rational(3));
    add(r1, "<=", Rational(0));
    add(r2, "<=", Rational(0));
    add(LinTerm::var(2), "<=", Rational(1));
    for (int v = 0; v < 4; ++v) add(LinTerm::var(v), ">=", Rational(0));
    // generous boxes keep the oracle's vertex search finite
    for (int v = 0; v < 4; ++v) add(LinTerm::var(v), "<=", Rational(1000));

    Tableau t = make_tableau(4, atoms);
    REQUIRE_FALSE(assert_all(t, atoms.size()).has_value());
    LinTerm obj = LinTerm::var(0, Rational(-3, 4)) + LinTerm::var(1, Rational(150)) +
                  LinTerm::var(2, Rational(-1, 50)) + LinTerm::var(3, Rational(6));
    auto res = t.minimize(obj);
    REQUIRE_FALSE(res.unbounded);

    std::vector<lporacle::Row> rows;
    for (const auto& c : atoms) {
        lporacle::Row r;
        r.a.assign(4, Rational(0));
        for (const auto& [v, coef] : c.term.coeffs()) r.a[v] = coef;
        r.b = c.bound;
        r.rel = c.rel == Rel::Le ? -1 : 0;
        rows.push_back(r);
    }
    std::vector<Rational> cvec = {Rational(-3, 4), Rational(150), Rational(-1, 50), Rational(6)};
    auto oracle = lporacle::vertex_minimize(rows, cvec);
    REQUIRE(oracle.feasible);
    CHECK(res.value == DeltaRational(oracle.value));
    CHECK(oracle.value == Rational(-1, 20));
}

TEST_CASE("random LPs agree exactly with vertex enumeration") {
    std::mt19937 rng(4242);
    std::uniform_int_distribution<int> nvd(2, 3);
    std::uniform_int_distribution<int> ncd(2, 5);
    std::uniform_int_distribution<long> coef(-4, 4);
    std::uniform_int_distribution<long> rhs(-6, 6);
    std::uniform_int_distribution<int> relpick(0, 2);

    int checked = 0;
    for (int iter = 0; iter < 200; ++iter) {
        int nv = nvd(rng);
        int nc = ncd(rng);
        std::vector<LinCmp> atoms;
        std::vector<lporacle::Row> rows;
        auto push = [&](const LinTerm& t, int rel, Rational b) {
            const char* op = rel < 0 ? "<=" : (rel == 0 ? "=" : ">=");
            Formula f = Formula::cmp(t, op, LinTerm(b));
            if (f.kind() != Conn::Leaf) return;  // degenerate ground row
            atoms.push_back(cmp_of(f));
            lporacle::Row r;
            r.a.assign(nv, Rational(0));
            for (const auto& [v, cf] : t.coeffs()) r.a[v] = cf;
            r.b = b - t.constant();
            r.rel = rel;
            rows.push_back(r);
        };
        for (int i = 0; i < nc; ++i) {
            LinTerm t;
            for (int v = 0; v < nv; ++v) t.add(v, Rational(coef(rng)));
            if (t.is_constant()) continue;
            int rel = relpick(rng) - 1;
            if (rel == 0 && iter % 3) rel = -1;  // equalities less frequent
            push(t, rel, Rational(rhs(rng)));
        }
        for (int v = 0; v < nv; ++v) {
            push(LinTerm::var(v), 1, Rational(-5));
            push(LinTerm::var(v), -1, Rational(5));
        }

        Tableau t = make_tableau(nv, atoms);
        auto confl = assert_all(t, atoms.size());

        LinTerm obj;
        for (int v = 0; v < nv; ++v) obj.add(v, Rational(coef(rng)));
        std::vector<Rational> cvec(nv, Rational(0));
        for (const auto& [v, cf] : obj.coeffs()) cvec[v] = cf;
        auto oracle = lporacle::vertex_minimize(rows, cvec);

        if (confl) {
            CHECK_FALSE(oracle.feasible);
            // explanation soundness: the explanation alone is infeasible
            Tableau t2 = make_tableau(nv, atoms);
            std::optional<Explanation> confl2;
            for (auto tl : confl->lits) {
                confl2 = t2.assert_atom(tl.atom, tl.positive);
                if (confl2) break;
            }
            CHECK(confl2.has_value());
        } else {
            REQUIRE(oracle.feasible);
            auto res = t.minimize(obj);
            REQUIRE_FALSE(res.unbounded);
            CHECK(res.value == DeltaRational(oracle.value));
            ++checked;
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("randomized assert/retract trace matches from-scratch rebuilds") {
    std::mt19937 rng(31337);
    std::uniform_int_distribution<long> coef(-3, 3), rhs(-4, 4);
    std::uniform_int_distribution<int> relpick(0, 2);
    const int nv = 3;

    for (int round = 0; round < 30; ++round) {
        std::vector<LinCmp> atoms;
        for (int i = 0; i < 10; ++i) {
            LinTerm t;
            for (int v = 0; v < nv; ++v) t.add(v, Rational(coef(rng)));
            if (t.is_constant()) {
                t = LinTerm::var(0);
            }
            const char* ops[] = {"<=", ">=", "<"};
            Formula f = Formula::cmp(t, ops[relpick(rng)], LinTerm(Rational(rhs(rng))));
            atoms.push_back(cmp_of(f));
        }
        Tableau t = make_tableau(nv, atoms);

        std::vector<int> stack;             // asserted atom ids, parallel to marks
        std::vector<Tableau::Mark> marks;   // mark taken just before each assert
        bool dead = false;  // conflicted state must be retracted before reuse
        std::uniform_int_distribution<int> act(0, 2);
        std::uniform_int_distribution<int> pick(0, 9);
        for (int step = 0; step < 40; ++step) {
            int a = act(rng);
            if (dead) a = 2;
            if (a == 2 && !marks.empty()) {
                t.retract_to(marks.back());
                marks.pop_back();
                stack.pop_back();
                dead = false;
                continue;
            }
            int atom = pick(rng);
            marks.push_back(t.mark());
            auto confl = t.assert_atom(atom, true);
            stack.push_back(atom);
            // differential: rebuild from scratch
            Tableau fresh = make_tableau(nv, atoms);
            std::optional<Explanation> fconfl;
            for (int id : stack) {
                fconfl = fresh.assert_atom(id, true);
                if (fconfl) break;
            }
            CHECK(confl.has_value() == fconfl.has_value());
            if (confl) {
                dead = true;
            } else {
                // same feasible set: compare minima along two objectives
                for (int v = 0; v < 1; ++v) {
                    auto r1 = t.minimize(LinTerm::var(v));
                    auto r2 = fresh.minimize(LinTerm::var(v));
                    CHECK(r1.unbounded == r2.unbounded);
                    if (!r1.unbounded) CHECK(r1.value == r2.value);
                }
            }
        }
    }
}
