#pragma once

#include <chrono>
#include <optional>

#include "lmt/cnf.hpp"
#include "lmt/sat.hpp"
#include "lmt/simplex.hpp"

namespace lmt {

struct SmtProblem {
    Declarations decls;
    std::vector<Formula> hard;
    std::optional<LinTerm> objective;
    std::optional<std::chrono::milliseconds> budget;
};

enum class OmtStatus {
    Unsat,
    Optimum,    // exact (attained may still be false for open infima)
    Feasible,   // timeout with an incumbent: best-so-far model
    Timeout,    // timeout before any model was found
    Unbounded,  // objective decreases without bound
};

struct OmtOutcome {
    OmtStatus status = OmtStatus::Timeout;
    std::optional<Assignment> model;
    std::optional<Rational> value;  // objective value (infimum when !attained)
    bool attained = true;

    bool has_model() const { return model.has_value(); }
};

struct SatResult {
    sat::Status status = sat::Status::Unsat;
    std::optional<Assignment> model;
};

// Lazy SMT(LRA) solver with optimization: CDCL enumerates Boolean models,
// the simplex tableau checks consistency incrementally and minimizes per
// branch, and cost-strengthening clauses drive the search to the optimum.
class OmtSolver {
public:
    explicit OmtSolver(const SmtProblem& p, uint64_t seed = 0);
    ~OmtSolver();

    SatResult check_sat();
    OmtOutcome minimize();
    // Mixed strategy: plain incumbent search plus bisection on the cost
    // bound. Falls back to the linear schema when the incumbent crosses the
    // initial lower bound.
    OmtOutcome minimize_binary(Rational initial_lb = Rational(-1000000));

    // Objective gap tolerance for reporting models of non-attained infima.
    void set_infimum_gap(Rational eta) { eta_ = std::move(eta); }
    void set_verify_models(bool v) { verify_models_ = v; }

    const std::vector<Rational>& incumbent_trace() const { return trace_; }

    static bool evaluate(const Formula& f, const Assignment& a) { return f.evaluate(a); }
    static Rational evaluate(const LinTerm& t, const Assignment& a) {
        return evaluate_term(t, a);
    }

private:
    class Adapter;
    friend class Adapter;

    struct Incumbent {
        Rational value;
        bool attained;
        Assignment model;
    };

    Assignment extract_model_(const sat::Outcome& out,
                              const std::map<VarId, Rational>& rats) const;
    void add_strengthening_(const Rational& bound);
    void assert_hard_now_(const Formula& f);
    Lit literal_for_(const Formula& atomic);
    void flush_pending_();
    std::optional<Incumbent> branch_minimum_(const sat::Outcome& out);
    void verify_(const Assignment& a) const;
    OmtOutcome finish_(std::optional<Incumbent>& best, sat::Status sat_status) const;
    void arm_deadline_();

    const SmtProblem& prob_;
    sat::Solver sat_;
    simplex::Tableau tableau_;
    AtomTable atoms_;
    std::vector<Clause> pending_;
    std::unique_ptr<Adapter> adapter_;
    std::optional<std::chrono::steady_clock::time_point> deadline_;
    Rational eta_ = Rational(1, 1000000);
    bool verify_models_ = true;
    std::vector<Rational> trace_;
    LinTerm objective_;  // constant stripped
    Rational obj_const_;
};

}  // namespace lmt
