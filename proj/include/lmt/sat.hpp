#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "lmt/cnf.hpp"

namespace lmt::sat {

using lmt::Clause;
using lmt::Lit;

enum class Value : uint8_t { False, True, Undef };

// Theory plugin for DPLL(T). The solver reports newly assigned literals after
// each propagation fixpoint and trail shrinkage on backtracking. A conflict is
// a set of trail literals whose conjunction is theory-inconsistent.
class TheoryHook {
public:
    virtual ~TheoryHook() = default;
    virtual std::optional<std::vector<Lit>> on_assign(std::span<const Lit> lits) = 0;
    virtual void on_backtrack(size_t trail_size) = 0;
};

enum class Status { Sat, Unsat, Timeout };

struct Outcome {
    Status status = Status::Unsat;
    std::vector<Value> model;  // indexed by var, Sat only
    std::vector<Lit> core;     // subset of assumptions, Unsat only
};

// CDCL solver: two-watched literals, 1UIP learning, VSIDS decisions, Luby
// restarts, assumption literals, monotone incremental clause addition.
class Solver {
public:
    int new_var();
    int num_vars() const { return static_cast<int>(assigns_.size()); }
    void ensure_vars(int n);

    // Returns false if the clause is empty after level-0 simplification
    // (solver enters a permanent unsat state; further solves return Unsat).
    bool add_clause(Clause lits);
    bool ok() const { return ok_; }

    Outcome solve(std::span<const Lit> assumptions = std::span<const Lit>());

    void set_theory(TheoryHook* hook) { theory_ = hook; }
    void set_seed(uint64_t seed);
    void set_deadline(std::optional<std::chrono::steady_clock::time_point> d) { deadline_ = d; }

    Value value(int var) const { return assigns_[var]; }
    Value value(Lit l) const;

    // Exposed for unit tests of the propagation engine.
    bool test_decide(Lit l);
    std::optional<Clause> test_propagate();
    const std::vector<Lit>& trail() const { return trail_; }
    const Clause* last_learnt() const { return learnts_log_.empty() ? nullptr : &learnts_log_.back(); }
    void log_learnts(bool on) { log_learnts_ = on; }

    void write_dimacs(std::ostream& os) const;

    uint64_t conflicts = 0, decisions = 0, propagations = 0;

private:
    struct ClauseData {
        std::vector<Lit> lits;
        double act = 0.0;
        bool learnt = false;
        bool dead = false;
    };
    struct Watch {
        int cref;
        Lit blocker;
    };

    int propagate_();  // returns conflicting cref or -1
    void enqueue_(Lit l, int reason);
    void analyze_(int confl, Clause& out_learnt, int& out_btlevel);
    void analyze_final_(Lit p, std::vector<Lit>& out_core);
    void cancel_until_(int level);
    void attach_(int cref);
    int add_internal_(Clause lits, bool learnt);
    Lit pick_branch_();
    void var_bump_(int v);
    void cla_bump_(ClauseData& c);
    void decay_();
    void reduce_db_();
    bool lit_redundant_(Lit l, uint32_t levels_mask, std::vector<int>& marked);
    int level_(int v) const { return vardata_[v].level; }
    bool timed_out_() const;
    int theory_check_();  // feeds new trail lits to hook; returns cref or -1

    // heap keyed by activity, ties by index
    void heap_insert_(int v);
    int heap_pop_();
    void heap_update_(int v);
    bool heap_less_(int a, int b) const;
    void heap_sift_up_(int i);
    void heap_sift_down_(int i);

    struct VarData {
        int reason = -1;
        int level = 0;
    };

    std::vector<ClauseData> clauses_;
    std::vector<std::vector<Watch>> watches_;
    std::vector<Value> assigns_;
    std::vector<VarData> vardata_;
    std::vector<double> activity_;
    std::vector<bool> polarity_;
    std::vector<Lit> trail_;
    std::vector<int> trail_lim_;
    size_t qhead_ = 0;
    size_t theory_head_ = 0;

    std::vector<int> heap_;
    std::vector<int> heap_pos_;

    std::vector<uint8_t> seen_;
    double var_inc_ = 1.0;
    double cla_inc_ = 1.0;
    bool ok_ = true;
    TheoryHook* theory_ = nullptr;
    std::optional<std::chrono::steady_clock::time_point> deadline_;
    uint64_t seed_ = 0;
    int num_learnts_ = 0;
    int max_learnts_base_ = 4000;
    bool log_learnts_ = false;
    std::vector<Clause> learnts_log_;
};

}  // namespace lmt::sat
