#include <doctest.h>

#include <random>

#include "lmt/smt.hpp"
#include "lp_oracle.hpp"

using namespace lmt;

namespace {

// Example 2: (cost=x+y) and (x>=0) and (y>=0) and (A or 4x+y>=4) and (~A or 2x+3y>=6)
SmtProblem example2(bool force_A = false) {
    SmtProblem p;
    VarId A = p.decls.add_bool("A");
    VarId cost = p.decls.add_rat("cost");
    VarId x = p.decls.add_rat("x");
    VarId y = p.decls.add_rat("y");
    LinTerm xy = LinTerm::var(x) + LinTerm::var(y);
    p.hard.push_back(Formula::cmp(LinTerm::var(cost), "=", xy));
    p.hard.push_back(Formula::cmp(LinTerm::var(x), ">=", LinTerm(Rational(0))));
    p.hard.push_back(Formula::cmp(LinTerm::var(y), ">=", LinTerm(Rational(0))));
    LinTerm t1 = LinTerm::var(x, Rational(4)) + LinTerm::var(y);
    LinTerm t2 = LinTerm::var(x, Rational(2)) + LinTerm::var(y, Rational(3));
    p.hard.push_back(Formula::disj({Formula::bvar(A), Formula::cmp(t1, ">=", LinTerm(Rational(4)))}));
    p.hard.push_back(Formula::disj({Formula::negate(Formula::bvar(A)),
                                    Formula::cmp(t2, ">=", LinTerm(Rational(6)))}));
    if (force_A) p.hard.push_back(Formula::bvar(A));
    p.objective = LinTerm::var(cost);
    return p;
}

struct MixedInstance {
    SmtProblem prob;
    // per clause: bool literals (var, positive) and at most one theory row
    struct OracleClause {
        std::vector<std::pair<int, bool>> blits;
        std::optional<lporacle::Row> row;
    };
    std::vector<OracleClause> clauses;
    int nbools, nrats;
    std::vector<Rational> objective;
};

MixedInstance random_mixed(std::mt19937& rng) {
    MixedInstance mi;
    std::uniform_int_distribution<int> nb(1, 4), nr(1, 3), nc(2, 7);
    std::uniform_int_distribution<long> coef(-3, 3), rhs(-5, 5);
    std::uniform_int_distribution<int> coin(0, 1), shape(0, 3);
    mi.nbools = nb(rng);
    mi.nrats = nr(rng);
    for (int b = 0; b < mi.nbools; ++b) mi.prob.decls.add_bool("b" + std::to_string(b));
    for (int r = 0; r < mi.nrats; ++r) mi.prob.decls.add_rat("r" + std::to_string(r));

    auto random_atom = [&]() -> std::pair<Formula, lporacle::Row> {
        LinTerm t;
        while (t.is_constant())
            for (int v = 0; v < mi.nrats; ++v) t.add(v, Rational(coef(rng)));
        int rel = coin(rng) ? -1 : 1;
        Rational b(rhs(rng));
        Formula f = Formula::cmp(t, rel < 0 ? "<=" : ">=", LinTerm(b));
        lporacle::Row row;
        row.a.assign(mi.nrats, Rational(0));
        for (const auto& [v, c] : t.coeffs()) row.a[v] = c;
        row.b = b;
        row.rel = rel;
        return {f, row};
    };

    int clauses = nc(rng);
    for (int i = 0; i < clauses; ++i) {
        MixedInstance::OracleClause oc;
        std::vector<Formula> parts;
        int nlits = 1 + coin(rng);
        for (int j = 0; j < nlits; ++j) {
            std::uniform_int_distribution<int> bv(0, mi.nbools - 1);
            int v = bv(rng);
            bool pos = coin(rng);
            oc.blits.push_back({v, pos});
            parts.push_back(pos ? Formula::bvar(v) : Formula::negate(Formula::bvar(v)));
        }
        if (shape(rng) != 0) {  // most clauses carry one theory atom
            auto [f, row] = random_atom();
            oc.row = row;
            parts.push_back(f);
        }
        mi.prob.hard.push_back(Formula::disj(parts));
        mi.clauses.push_back(std::move(oc));
    }
    // box bounds keep every branch bounded
    for (int v = 0; v < mi.nrats; ++v) {
        mi.prob.hard.push_back(Formula::cmp(LinTerm::var(v), ">=", LinTerm(Rational(-5))));
        mi.prob.hard.push_back(Formula::cmp(LinTerm::var(v), "<=", LinTerm(Rational(5))));
        MixedInstance::OracleClause lo, hi;
        lo.row = lporacle::Row{std::vector<Rational>(mi.nrats, Rational(0)), Rational(-5), 1};
        lo.row->a[v] = Rational(1);
        hi.row = lporacle::Row{std::vector<Rational>(mi.nrats, Rational(0)), Rational(5), -1};
        hi.row->a[v] = Rational(1);
        mi.clauses.push_back(lo);
        mi.clauses.push_back(hi);
    }

    LinTerm obj;
    mi.objective.assign(mi.nrats, Rational(0));
    for (int v = 0; v < mi.nrats; ++v) {
        long c = coef(rng);
        obj.add(v, Rational(c));
        mi.objective[v] = Rational(c);
    }
    mi.prob.objective = obj;
    return mi;
}

// enumerate Boolean assignments; per branch collect forced rows and call the
// vertex oracle
std::optional<Rational> oracle_minimum(const MixedInstance& mi) {
    std::optional<Rational> best;
    for (unsigned bits = 0; bits < (1u << mi.nbools); ++bits) {
        std::vector<lporacle::Row> rows;
        bool branch_dead = false;
        for (const auto& oc : mi.clauses) {
            bool bool_sat = false;
            for (auto [v, pos] : oc.blits)
                if ((((bits >> v) & 1) != 0) == pos) bool_sat = true;
            if (bool_sat) continue;
            if (!oc.row) {
                branch_dead = true;
                break;
            }
            rows.push_back(*oc.row);
        }
        if (branch_dead) continue;
        auto r = lporacle::vertex_minimize(rows, mi.objective);
        if (!r.feasible) continue;
        if (!best || r.value < *best) best = r.value;
    }
    return best;
}

}  // namespace

TEST_CASE("Example 2 is satisfiable and optimizes to 1 at A=false,x=1,y=0") {
    SmtProblem p = example2();
    {
        OmtSolver s(p);
        auto sr = s.check_sat();
        REQUIRE(sr.status == sat::Status::Sat);
        REQUIRE(sr.model.has_value());
        for (const auto& f : p.hard) CHECK(f.evaluate(*sr.model));
    }
    OmtSolver s(p);
    auto out = s.minimize();
    REQUIRE(out.status == OmtStatus::Optimum);
    CHECK(out.attained);
    CHECK(*out.value == Rational(1));
    REQUIRE(out.model.has_value());
    CHECK_FALSE(out.model->bools[0]);
    CHECK(out.model->rats[1] == Rational(1));  // x
    CHECK(out.model->rats[2] == Rational(0));  // y
    CHECK(out.model->rats[0] == Rational(1));  // cost
}

TEST_CASE("Example 2 with A asserted optimizes to 2 at x=0,y=2") {
    SmtProblem p = example2(true);
    OmtSolver s(p);
    auto out = s.minimize();
    REQUIRE(out.status == OmtStatus::Optimum);
    CHECK(*out.value == Rational(2));
    CHECK(out.model->bools[0]);
    CHECK(out.model->rats[1] == Rational(0));
    CHECK(out.model->rats[2] == Rational(2));
}

TEST_CASE("contradictory strict bounds are unsat") {
    SmtProblem p;
    VarId x = p.decls.add_rat("x");
    p.hard.push_back(Formula::cmp(LinTerm::var(x), ">", LinTerm(Rational(0))));
    p.hard.push_back(Formula::cmp(LinTerm::var(x), "<", LinTerm(Rational(0))));
    OmtSolver s(p);
    CHECK(s.check_sat().status == sat::Status::Unsat);
}

TEST_CASE("tight bound: minimize x subject to x >= 3") {
    SmtProblem p;
    VarId x = p.decls.add_rat("x");
    p.hard.push_back(Formula::cmp(LinTerm::var(x), ">=", LinTerm(Rational(3))));
    p.objective = LinTerm::var(x);
    OmtSolver s(p);
    auto out = s.minimize();
    REQUIRE(out.status == OmtStatus::Optimum);
    CHECK(*out.value == Rational(3));
    CHECK(out.attained);
    CHECK(out.model->rats[x] == Rational(3));
}

TEST_CASE("open infimum is reported unattained with a model inside the gap") {
    SmtProblem p;
    VarId x = p.decls.add_rat("x");
    p.hard.push_back(Formula::cmp(LinTerm::var(x), ">", LinTerm(Rational(0))));
    p.hard.push_back(Formula::cmp(LinTerm::var(x), "<=", LinTerm(Rational(10))));
    p.objective = LinTerm::var(x);
    OmtSolver s(p);
    auto out = s.minimize();
    REQUIRE(out.status == OmtStatus::Optimum);
    CHECK(*out.value == Rational(0));
    CHECK_FALSE(out.attained);
    CHECK(out.model->rats[x] > Rational(0));
    CHECK(out.model->rats[x] <= Rational(1, 1000000));
}

TEST_CASE("unbounded objective is reported") {
    SmtProblem p;
    VarId x = p.decls.add_rat("x");
    p.hard.push_back(Formula::cmp(LinTerm::var(x), "<=", LinTerm(Rational(0))));
    p.objective = LinTerm::var(x);
    OmtSolver s(p);
    CHECK(s.minimize().status == OmtStatus::Unbounded);
}

TEST_CASE("zero budget yields timeout without a model") {
    SmtProblem p;
    for (int i = 0; i < 30; ++i) p.decls.add_bool("b" + std::to_string(i));
    std::mt19937 rng(1);
    std::uniform_int_distribution<int> var(0, 29), coin(0, 1);
    for (int i = 0; i < 120; ++i) {
        std::vector<Formula> lits;
        for (int j = 0; j < 3; ++j) {
            int v = var(rng);
            lits.push_back(coin(rng) ? Formula::bvar(v) : Formula::negate(Formula::bvar(v)));
        }
        p.hard.push_back(Formula::disj(lits));
    }
    p.budget = std::chrono::milliseconds(0);
    OmtSolver s(p);
    auto sr = s.check_sat();
    CHECK(sr.status == sat::Status::Timeout);
}

TEST_CASE("evaluate: boundary, model re-evaluation, objective consistency") {
    Assignment a;
    a.rats = {Rational(1)};
    Formula le = Formula::cmp(LinTerm::var(0), "<=", LinTerm(Rational(1)));
    CHECK(OmtSolver::evaluate(le, a));

    SmtProblem p = example2();
    OmtSolver s(p);
    auto out = s.minimize();
    REQUIRE(out.model.has_value());
    for (const auto& f : p.hard) CHECK(OmtSolver::evaluate(f, *out.model));
    CHECK(OmtSolver::evaluate(*p.objective, *out.model) == *out.value);
}

TEST_CASE("random mixed instances match the enumeration oracle") {
    std::mt19937 rng(60601);
    int sat_count = 0, unsat_count = 0;
    for (int iter = 0; iter < 120; ++iter) {
        MixedInstance mi = random_mixed(rng);
        auto expect = oracle_minimum(mi);
        OmtSolver s(mi.prob);
        auto out = s.minimize();
        if (expect) {
            REQUIRE(out.status == OmtStatus::Optimum);
            CHECK(*out.value == *expect);
            for (const auto& f : mi.prob.hard) CHECK(f.evaluate(*out.model));
            ++sat_count;
            // anytime monotonicity: incumbents strictly decrease
            const auto& tr = s.incumbent_trace();
            for (size_t i = 1; i < tr.size(); ++i) CHECK(tr[i] < tr[i - 1]);
        } else {
            CHECK(out.status == OmtStatus::Unsat);
            ++unsat_count;
        }
    }
    CHECK(sat_count > 30);
    CHECK(unsat_count > 3);
}

TEST_CASE("binary search strategy returns identical optima") {
    std::mt19937 rng(777);
    for (int iter = 0; iter < 50; ++iter) {
        MixedInstance mi = random_mixed(rng);
        OmtSolver a(mi.prob);
        auto lin = a.minimize();
        OmtSolver b(mi.prob);
        auto bin = b.minimize_binary();
        REQUIRE(lin.status == bin.status);
        if (lin.status == OmtStatus::Optimum) {
            CHECK(*lin.value == *bin.value);
            for (const auto& f : mi.prob.hard) CHECK(f.evaluate(*bin.model));
        }
    }
    // infeasible problem: unsat under both, zero bisection steps
    SmtProblem p;
    VarId x = p.decls.add_rat("x");
    p.hard.push_back(Formula::cmp(LinTerm::var(x), ">", LinTerm(Rational(1))));
    p.hard.push_back(Formula::cmp(LinTerm::var(x), "<", LinTerm(Rational(0))));
    p.objective = LinTerm::var(x);
    OmtSolver s(p);
    auto out = s.minimize_binary();
    CHECK(out.status == OmtStatus::Unsat);
    CHECK(s.incumbent_trace().empty());
}

TEST_CASE("deterministic: same seed, same model") {
    std::mt19937 rng(9);
    MixedInstance mi = random_mixed(rng);
    OmtSolver a(mi.prob, 42), b(mi.prob, 42);
    auto ra = a.minimize();
    auto rb = b.minimize();
    REQUIRE(ra.status == rb.status);
    if (ra.status == OmtStatus::Optimum) {
        CHECK(ra.model->bools == rb.model->bools);
        for (size_t i = 0; i < ra.model->rats.size(); ++i)
            CHECK(ra.model->rats[i] == rb.model->rats[i]);
    }
}
