#include "lmt/smt.hpp"

#include <cassert>
#include <stdexcept>

namespace lmt {

using sat::Status;
using simplex::Tableau;

class OmtSolver::Adapter : public sat::TheoryHook {
public:
    explicit Adapter(OmtSolver& o) : o_(o) {}

    std::optional<std::vector<Lit>> on_assign(std::span<const Lit> lits) override {
        for (size_t i = 0; i < lits.size(); ++i) {
            Lit l = lits[i];
            ++consumed_;
            int a = l.atom();
            if (a >= o_.atoms_.size() || o_.atoms_.kind(a) != AtomTable::Kind::Theory) continue;
            marks_.push_back({consumed_, o_.tableau_.mark()});
            auto confl = o_.tableau_.assert_atom(a, !l.negated());
            if (confl) {
                consumed_ += lits.size() - i - 1;  // rest skipped; backjump unassigns them
                std::vector<Lit> out;
                out.reserve(confl->lits.size());
                for (auto tl : confl->lits) out.push_back(Lit::make(tl.atom, !tl.positive));
                return out;
            }
        }
        return std::nullopt;
    }

    void on_backtrack(size_t trail_size) override {
        while (!marks_.empty() && marks_.back().first > trail_size) {
            o_.tableau_.retract_to(marks_.back().second);
            marks_.pop_back();
        }
        consumed_ = trail_size;
    }

private:
    OmtSolver& o_;
    size_t consumed_ = 0;
    std::vector<std::pair<size_t, Tableau::Mark>> marks_;
};

OmtSolver::OmtSolver(const SmtProblem& p, uint64_t seed) : prob_(p) {
    tableau_.ensure_external(p.decls.num_rats());
    for (VarId b = 0; b < p.decls.num_bools(); ++b) atoms_.for_bool(b);
    for (const auto& f : p.hard) {
        CnfBuilder builder(atoms_, pending_);
        builder.assert_formula(f);
    }
    flush_pending_();
    adapter_ = std::make_unique<Adapter>(*this);
    sat_.set_theory(adapter_.get());
    if (seed) sat_.set_seed(seed);
    if (p.objective) {
        objective_ = *p.objective;
        obj_const_ = objective_.constant();
        objective_.set_constant(Rational(0));
    }
}

OmtSolver::~OmtSolver() = default;

void OmtSolver::flush_pending_() {
    sat_.ensure_vars(atoms_.size());
    for (int a : atoms_.theory_atoms())
        if (!tableau_.knows_atom(a)) tableau_.register_atom(a, atoms_.lincmp(a));
    for (auto& cl : pending_) sat_.add_clause(std::move(cl));
    pending_.clear();
}

void OmtSolver::assert_hard_now_(const Formula& f) {
    CnfBuilder builder(atoms_, pending_);
    builder.assert_formula(f);
    flush_pending_();
}

Lit OmtSolver::literal_for_(const Formula& atomic) {
    CnfBuilder builder(atoms_, pending_);
    Lit l = builder.convert(CnfBuilder::desugar_equalities(atomic));
    flush_pending_();
    return l;
}

void OmtSolver::arm_deadline_() {
    if (prob_.budget)
        deadline_ = std::chrono::steady_clock::now() + *prob_.budget;
    else
        deadline_.reset();
    sat_.set_deadline(deadline_);
}

Assignment OmtSolver::extract_model_(const sat::Outcome& out,
                                     const std::map<VarId, Rational>& rats) const {
    Assignment a = Assignment::zeros(prob_.decls);
    for (VarId b = 0; b < prob_.decls.num_bools(); ++b) {
        // declared booleans were registered first, so atom id == b
        if (b < static_cast<int>(out.model.size()))
            a.bools[b] = out.model[b] == sat::Value::True;
    }
    for (const auto& [v, val] : rats)
        if (v < static_cast<int>(a.rats.size())) a.rats[v] = val;
    return a;
}

void OmtSolver::verify_(const Assignment& a) const {
    if (!verify_models_) return;
    for (const auto& f : prob_.hard)
        if (!f.evaluate(a)) throw std::logic_error("solver returned a model violating a hard formula");
}

SatResult OmtSolver::check_sat() {
    arm_deadline_();
    SatResult res;
    auto out = sat_.solve();
    res.status = out.status;
    if (out.status != Status::Sat) return res;

    Tableau::Mark mark = tableau_.mark();
    for (int a : atoms_.theory_atoms()) {
        if (a >= static_cast<int>(out.model.size()) || out.model[a] == sat::Value::Undef) continue;
        auto confl = tableau_.assert_atom(a, out.model[a] == sat::Value::True);
        if (confl) throw std::logic_error("inconsistent theory replay of a SAT model");
    }
    Assignment a = extract_model_(out, tableau_.model());
    tableau_.retract_to(mark);
    verify_(a);
    res.model = std::move(a);
    return res;
}

std::optional<OmtSolver::Incumbent> OmtSolver::branch_minimum_(const sat::Outcome& out) {
    Tableau::Mark mark = tableau_.mark();
    for (int a : atoms_.theory_atoms()) {
        if (a >= static_cast<int>(out.model.size()) || out.model[a] == sat::Value::Undef) continue;
        auto confl = tableau_.assert_atom(a, out.model[a] == sat::Value::True);
        if (confl) throw std::logic_error("inconsistent theory replay of a SAT model");
    }
    auto mres = tableau_.minimize(objective_);
    if (mres.unbounded) {
        tableau_.retract_to(mark);
        return std::nullopt;
    }
    Incumbent inc;
    inc.value = mres.value.r + obj_const_;
    inc.attained = mres.value.d.is_zero();
    Rational delta = mres.safe_delta;
    if (!inc.attained && mres.value.d.sign() > 0) {
        Rational cap = eta_ / mres.value.d;
        if (cap < delta) delta = cap;
    }
    inc.model = extract_model_(out, Tableau::concretize(mres.model, delta));
    tableau_.retract_to(mark);
    verify_(inc.model);
    if (inc.attained) {
        Rational got = evaluate_term(*prob_.objective, inc.model);
        if (got != inc.value) throw std::logic_error("objective value mismatch at optimum");
    }
    return inc;
}

OmtOutcome OmtSolver::finish_(std::optional<Incumbent>& best, Status sat_status) const {
    OmtOutcome out;
    if (sat_status == Status::Unsat) {
        if (best) {
            out.status = OmtStatus::Optimum;
            out.value = best->value;
            out.attained = best->attained;
            out.model = std::move(best->model);
        } else {
            out.status = OmtStatus::Unsat;
        }
    } else {  // timeout
        if (best) {
            out.status = OmtStatus::Feasible;
            out.value = best->value;
            out.attained = best->attained;
            out.model = std::move(best->model);
        } else {
            out.status = OmtStatus::Timeout;
        }
    }
    return out;
}

void OmtSolver::add_strengthening_(const Rational& bound, bool strict) {
    // after an unattained branch infimum the cut is non-strict: the branch
    // only holds values above the bound, while other branches may attain it
    assert_hard_now_(Formula::cmp(objective_, strict ? "<" : "<=", LinTerm(bound - obj_const_)));
}

bool OmtSolver::improves_(const std::optional<Incumbent>& best, const Incumbent& inc) {
    if (!best) return true;
    if (inc.value < best->value) return true;
    return inc.value == best->value && inc.attained && !best->attained;
}

OmtOutcome OmtSolver::minimize() {
    if (!prob_.objective) throw std::invalid_argument("minimize called without an objective");
    arm_deadline_();
    trace_.clear();

    if (objective_.is_constant()) {
        auto sr = check_sat();
        OmtOutcome out;
        switch (sr.status) {
            case Status::Sat:
                out.status = OmtStatus::Optimum;
                out.model = std::move(sr.model);
                out.value = obj_const_;
                break;
            case Status::Unsat: out.status = OmtStatus::Unsat; break;
            case Status::Timeout: out.status = OmtStatus::Timeout; break;
        }
        return out;
    }

    std::optional<Incumbent> best;
    for (;;) {
        auto out = sat_.solve();
        if (out.status != Status::Sat) return finish_(best, out.status);
        auto inc = branch_minimum_(out);
        if (!inc) {
            OmtOutcome o;
            o.status = OmtStatus::Unbounded;
            return o;
        }
        if (!improves_(best, *inc))
            throw std::logic_error("incumbent sequence not strictly decreasing");
        if (!best || inc->value < best->value) trace_.push_back(inc->value);
        Rational bound = inc->value;
        bool strict = inc->attained;
        best = std::move(*inc);
        add_strengthening_(bound, strict);
        if (!sat_.ok()) return finish_(best, Status::Unsat);
    }
}

OmtOutcome OmtSolver::minimize_binary(Rational lb) {
    if (!prob_.objective) throw std::invalid_argument("minimize called without an objective");
    arm_deadline_();
    trace_.clear();
    if (objective_.is_constant()) return minimize();

    std::optional<Incumbent> best;
    bool linear_only = false;
    for (;;) {
        auto out = sat_.solve();
        if (out.status != Status::Sat) return finish_(best, out.status);
        auto inc = branch_minimum_(out);
        if (!inc) {
            OmtOutcome o;
            o.status = OmtStatus::Unbounded;
            return o;
        }
        trace_.push_back(inc->value);
        Rational bound = inc->value;
        best = std::move(*inc);
        add_strengthening_(bound);
        if (!sat_.ok()) return finish_(best, Status::Unsat);

        if (linear_only) continue;
        if (!(lb < best->value)) {
            linear_only = true;  // incumbent crossed the initial lower bound
            continue;
        }
        // bisect: is there a model with objective <= mid?
        Rational mid = (lb + best->value) / Rational(2);
        Lit probe = literal_for_(Formula::cmp(objective_, "<=", LinTerm(mid - obj_const_)));
        std::vector<Lit> assumption{probe};
        auto out2 = sat_.solve(assumption);
        if (out2.status == Status::Timeout) return finish_(best, out2.status);
        if (out2.status == Status::Sat) {
            auto inc2 = branch_minimum_(out2);
            if (!inc2) {
                OmtOutcome o;
                o.status = OmtStatus::Unbounded;
                return o;
            }
            if (!(inc2->value < best->value))
                throw std::logic_error("bisection incumbent did not improve");
            trace_.push_back(inc2->value);
            Rational bound2 = inc2->value;
            best = std::move(*inc2);
            add_strengthening_(bound2);
            if (!sat_.ok()) return finish_(best, Status::Unsat);
        } else {
            bool probe_in_core = false;
            for (Lit l : out2.core)
                if (l == probe) probe_in_core = true;
            if (!probe_in_core) return finish_(best, Status::Unsat);
            sat_.add_clause({~probe});  // objective > mid everywhere
            lb = mid;
            if (!sat_.ok()) return finish_(best, Status::Unsat);
        }
    }
}

}  // namespace lmt
