#include "lmt/sat.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <ostream>
#include <random>

namespace lmt::sat {

namespace {

// Luby sequence scaled by base conflicts per restart.
uint64_t luby(uint64_t i) {
    uint64_t k = 1;
    while ((1ull << k) - 1 < i + 1) ++k;
    while ((1ull << k) - 1 != i + 1) {
        i -= (1ull << (k - 1)) - 1;
        k = 1;
        while ((1ull << k) - 1 < i + 1) ++k;
    }
    return 1ull << (k - 1);
}

constexpr double kVarDecay = 0.95;
constexpr double kClaDecay = 0.999;
constexpr uint64_t kRestartBase = 100;

}  // namespace

int Solver::new_var() {
    int v = num_vars();
    assigns_.push_back(Value::Undef);
    vardata_.push_back({});
    activity_.push_back(0.0);
    polarity_.push_back(false);
    watches_.emplace_back();
    watches_.emplace_back();
    seen_.push_back(0);
    heap_pos_.push_back(-1);
    heap_insert_(v);
    return v;
}

void Solver::ensure_vars(int n) {
    while (num_vars() < n) new_var();
}

void Solver::set_seed(uint64_t seed) {
    seed_ = seed;
    if (seed == 0) return;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1e-6);
    for (int v = 0; v < num_vars(); ++v) {
        activity_[v] = dist(rng);
        heap_update_(v);
    }
}

Value Solver::value(Lit l) const {
    Value v = assigns_[l.atom()];
    if (v == Value::Undef) return v;
    bool b = (v == Value::True) != l.negated();
    return b ? Value::True : Value::False;
}

bool Solver::heap_less_(int a, int b) const {
    if (activity_[a] != activity_[b]) return activity_[a] > activity_[b];
    return a < b;
}

void Solver::heap_insert_(int v) {
    if (heap_pos_[v] != -1) return;
    heap_pos_[v] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    heap_sift_up_(heap_pos_[v]);
}

void Solver::heap_sift_up_(int i) {
    int v = heap_[i];
    while (i > 0) {
        int p = (i - 1) >> 1;
        if (!heap_less_(v, heap_[p])) break;
        heap_[i] = heap_[p];
        heap_pos_[heap_[i]] = i;
        i = p;
    }
    heap_[i] = v;
    heap_pos_[v] = i;
}

void Solver::heap_sift_down_(int i) {
    int v = heap_[i];
    int n = static_cast<int>(heap_.size());
    for (;;) {
        int c = 2 * i + 1;
        if (c >= n) break;
        if (c + 1 < n && heap_less_(heap_[c + 1], heap_[c])) ++c;
        if (!heap_less_(heap_[c], v)) break;
        heap_[i] = heap_[c];
        heap_pos_[heap_[i]] = i;
        i = c;
    }
    heap_[i] = v;
    heap_pos_[v] = i;
}

int Solver::heap_pop_() {
    int v = heap_[0];
    heap_pos_[v] = -1;
    int last = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
        heap_[0] = last;
        heap_pos_[last] = 0;
        heap_sift_down_(0);
    }
    return v;
}

void Solver::heap_update_(int v) {
    if (heap_pos_[v] == -1) return;
    heap_sift_up_(heap_pos_[v]);
    heap_sift_down_(heap_pos_[v]);
}

void Solver::var_bump_(int v) {
    activity_[v] += var_inc_;
    if (activity_[v] > 1e100) {
        for (int i = 0; i < num_vars(); ++i) activity_[i] *= 1e-100;
        var_inc_ *= 1e-100;
    }
    heap_update_(v);
}

void Solver::cla_bump_(ClauseData& c) {
    c.act += cla_inc_;
    if (c.act > 1e20) {
        for (auto& cl : clauses_)
            if (cl.learnt) cl.act *= 1e-20;
        cla_inc_ *= 1e-20;
    }
}

void Solver::decay_() {
    var_inc_ /= kVarDecay;
    cla_inc_ /= kClaDecay;
}

void Solver::attach_(int cref) {
    const auto& lits = clauses_[cref].lits;
    assert(lits.size() >= 2);
    watches_[(~lits[0]).x].push_back({cref, lits[1]});
    watches_[(~lits[1]).x].push_back({cref, lits[0]});
}

int Solver::add_internal_(Clause lits, bool learnt) {
    int cref = static_cast<int>(clauses_.size());
    clauses_.push_back({std::move(lits), 0.0, learnt, false});
    if (learnt) ++num_learnts_;
    attach_(cref);
    return cref;
}

bool Solver::add_clause(Clause lits) {
    if (!ok_) return false;
    assert(trail_lim_.empty());
    // level-0 simplification: drop false lits, drop satisfied clauses, dedup
    std::sort(lits.begin(), lits.end());
    Clause out;
    Lit prev{-2};
    for (Lit l : lits) {
        assert(l.atom() < num_vars());
        if (value(l) == Value::True || (~l) == prev) return true;
        if (value(l) == Value::False || l == prev) continue;
        out.push_back(l);
        prev = l;
    }
    if (out.empty()) {
        ok_ = false;
        return false;
    }
    if (out.size() == 1) {
        enqueue_(out[0], -1);
        if (propagate_() != -1) ok_ = false;
        return ok_;
    }
    add_internal_(std::move(out), false);
    return true;
}

void Solver::enqueue_(Lit l, int reason) {
    assert(value(l) == Value::Undef);
    int v = l.atom();
    assigns_[v] = l.negated() ? Value::False : Value::True;
    vardata_[v] = {reason, static_cast<int>(trail_lim_.size())};
    trail_.push_back(l);
}

int Solver::propagate_() {
    while (qhead_ < trail_.size()) {
        Lit p = trail_[qhead_++];
        ++propagations;
        auto& ws = watches_[p.x];
        size_t i = 0, j = 0;
        while (i < ws.size()) {
            Watch w = ws[i];
            if (value(w.blocker) == Value::True) {
                ws[j++] = ws[i++];
                continue;
            }
            ClauseData& c = clauses_[w.cref];
            auto& lits = c.lits;
            // make lits[1] the false literal (~p)
            Lit not_p = ~p;
            if (lits[0] == not_p) std::swap(lits[0], lits[1]);
            assert(lits[1] == not_p);
            if (value(lits[0]) == Value::True) {
                ws[j++] = {w.cref, lits[0]};
                ++i;
                continue;
            }
            bool found = false;
            for (size_t k = 2; k < lits.size(); ++k) {
                if (value(lits[k]) != Value::False) {
                    std::swap(lits[1], lits[k]);
                    watches_[(~lits[1]).x].push_back({w.cref, lits[0]});
                    found = true;
                    break;
                }
            }
            if (found) {
                ++i;
                continue;
            }
            // unit or conflict
            if (value(lits[0]) == Value::False) {
                while (i < ws.size()) ws[j++] = ws[i++];
                ws.resize(j);
                qhead_ = trail_.size();
                return w.cref;
            }
            enqueue_(lits[0], w.cref);
            ws[j++] = ws[i++];
        }
        ws.resize(j);
    }
    return -1;
}

int Solver::theory_check_() {
    if (!theory_ || theory_head_ >= trail_.size()) return -1;
    std::span<const Lit> fresh(trail_.data() + theory_head_, trail_.size() - theory_head_);
    auto confl = theory_->on_assign(fresh);
    theory_head_ = trail_.size();
    if (!confl) return -1;
    // theory lemma: negation of the inconsistent literal set
    Clause lemma;
    lemma.reserve(confl->size());
    for (Lit l : *confl) lemma.push_back(~l);
    assert(!lemma.empty());
    if (lemma.size() == 1) {
        // falsified unit lemma; force it at level 0
        Lit u = lemma[0];
        cancel_until_(0);
        if (value(u) == Value::False) {
            ok_ = false;
            return -2;  // permanently unsat
        }
        if (value(u) == Value::Undef) enqueue_(u, -1);
        return -3;  // trail changed, restart propagation
    }
    // order by decreasing level so watches sit on the highest levels
    std::sort(lemma.begin(), lemma.end(), [&](Lit a, Lit b) {
        return level_(a.atom()) > level_(b.atom());
    });
    int maxlvl = level_(lemma[0].atom());
    if (maxlvl == 0) {
        ok_ = false;
        return -2;
    }
    int cref = add_internal_(std::move(lemma), true);
    // ensure the conflict clause has literals at the current decision level
    if (maxlvl < static_cast<int>(trail_lim_.size())) cancel_until_(maxlvl);
    return cref;
}

void Solver::cancel_until_(int level) {
    if (static_cast<int>(trail_lim_.size()) <= level) return;
    size_t lim = trail_lim_[level];
    for (size_t i = trail_.size(); i-- > lim;) {
        int v = trail_[i].atom();
        polarity_[v] = assigns_[v] == Value::True;
        assigns_[v] = Value::Undef;
        vardata_[v].reason = -1;
        heap_insert_(v);
    }
    trail_.resize(lim);
    trail_lim_.resize(level);
    qhead_ = lim;
    if (theory_head_ > lim) {
        theory_head_ = lim;
        if (theory_) theory_->on_backtrack(lim);
    }
}

bool Solver::lit_redundant_(Lit l, uint32_t levels_mask, std::vector<int>& marked) {
    // simple recursive reason-side redundancy check (MiniSat ccmin light);
    // marks made on success stay seen until analyze_ cleans up
    std::vector<Lit> stack{l};
    size_t first_new = marked.size();
    while (!stack.empty()) {
        Lit q = stack.back();
        stack.pop_back();
        int reason = vardata_[q.atom()].reason;
        if (reason < 0) {
            for (size_t i = first_new; i < marked.size(); ++i) seen_[marked[i]] = 0;
            marked.resize(first_new);
            return false;
        }
        for (size_t k = 1; k < clauses_[reason].lits.size(); ++k) {
            Lit r = clauses_[reason].lits[k];
            int v = r.atom();
            if (seen_[v] || level_(v) == 0) continue;
            if (vardata_[v].reason < 0 || !((levels_mask >> (level_(v) & 31)) & 1)) {
                for (size_t i = first_new; i < marked.size(); ++i) seen_[marked[i]] = 0;
                marked.resize(first_new);
                return false;
            }
            seen_[v] = 1;
            marked.push_back(v);
            stack.push_back(r);
        }
    }
    return true;
}

void Solver::analyze_(int confl, Clause& out_learnt, int& out_btlevel) {
    int path = 0;
    Lit p{-2};
    out_learnt.clear();
    out_learnt.push_back(Lit{-2});  // slot for the asserting literal
    size_t idx = trail_.size();
    int cur_level = static_cast<int>(trail_lim_.size());

    int cref = confl;
    for (;;) {
        ClauseData& c = clauses_[cref];
        if (c.learnt) cla_bump_(c);
        size_t start = (p.x == -2) ? 0 : 1;
        for (size_t k = start; k < c.lits.size(); ++k) {
            Lit q = c.lits[k];
            int v = q.atom();
            if (seen_[v] || level_(v) == 0) continue;
            seen_[v] = 1;
            var_bump_(v);
            if (level_(v) >= cur_level)
                ++path;
            else
                out_learnt.push_back(q);
        }
        // next literal on the trail to resolve
        while (!seen_[trail_[idx - 1].atom()]) --idx;
        p = trail_[--idx];
        seen_[p.atom()] = 0;
        --path;
        if (path == 0) break;
        cref = vardata_[p.atom()].reason;
        assert(cref >= 0);
    }
    out_learnt[0] = ~p;

    // clause minimization
    uint32_t mask = 0;
    for (size_t i = 1; i < out_learnt.size(); ++i)
        mask |= 1u << (level_(out_learnt[i].atom()) & 31);
    std::vector<int> extra_marked;
    size_t j = 1;
    for (size_t i = 1; i < out_learnt.size(); ++i) {
        int v = out_learnt[i].atom();
        if (vardata_[v].reason < 0 || !lit_redundant_(out_learnt[i], mask, extra_marked))
            out_learnt[j++] = out_learnt[i];
    }
    out_learnt.resize(j);
    for (int v : extra_marked) seen_[v] = 0;

    out_btlevel = 0;
    if (out_learnt.size() > 1) {
        size_t max_i = 1;
        for (size_t i = 2; i < out_learnt.size(); ++i)
            if (level_(out_learnt[i].atom()) > level_(out_learnt[max_i].atom())) max_i = i;
        std::swap(out_learnt[1], out_learnt[max_i]);
        out_btlevel = level_(out_learnt[1].atom());
    }
    for (Lit l : out_learnt) seen_[l.atom()] = 0;
}

// failed: an assumption literal currently evaluating to False. The core is
// the set of assumption literals whose conjunction (with the clauses) is
// unsatisfiable, always including failed itself.
void Solver::analyze_final_(Lit failed, std::vector<Lit>& out_core) {
    out_core.clear();
    out_core.push_back(failed);
    if (trail_lim_.empty()) return;
    seen_[failed.atom()] = 1;
    for (size_t i = trail_.size(); i-- > trail_lim_[0];) {
        int v = trail_[i].atom();
        if (!seen_[v]) continue;
        seen_[v] = 0;
        int r = vardata_[v].reason;
        if (r < 0) {
            out_core.push_back(trail_[i]);  // decision = assumption literal
        } else {
            for (size_t k = 1; k < clauses_[r].lits.size(); ++k) {
                Lit q = clauses_[r].lits[k];
                if (level_(q.atom()) > 0) seen_[q.atom()] = 1;
            }
        }
    }
    seen_[failed.atom()] = 0;
}

Lit Solver::pick_branch_() {
    while (!heap_.empty()) {
        int v = heap_[0];
        if (assigns_[v] == Value::Undef) {
            heap_pop_();
            return Lit::make(v, !polarity_[v]);
        }
        heap_pop_();
    }
    return Lit{-2};
}

void Solver::reduce_db_() {
    // drop the least active half of long learnt clauses; keep reasons
    std::vector<int> cands;
    for (int i = 0; i < static_cast<int>(clauses_.size()); ++i) {
        auto& c = clauses_[i];
        if (!c.learnt || c.dead || c.lits.size() <= 2) continue;
        int v0 = c.lits[0].atom();
        if (vardata_[v0].reason == i && assigns_[v0] != Value::Undef) continue;  // locked
        cands.push_back(i);
    }
    std::sort(cands.begin(), cands.end(),
              [&](int a, int b) { return clauses_[a].act < clauses_[b].act; });
    size_t kill = cands.size() / 2;
    for (size_t i = 0; i < kill; ++i) {
        clauses_[cands[i]].dead = true;
        --num_learnts_;
    }
    if (kill == 0) return;
    for (int v = 0; v < num_vars(); ++v)
        for (int s = 0; s < 2; ++s) {
            auto& ws = watches_[2 * v + s];
            ws.erase(std::remove_if(ws.begin(), ws.end(),
                                    [&](const Watch& w) { return clauses_[w.cref].dead; }),
                     ws.end());
        }
}

bool Solver::timed_out_() const {
    return deadline_ && std::chrono::steady_clock::now() > *deadline_;
}

Outcome Solver::solve(std::span<const Lit> assumptions) {
    Outcome out;
    if (!ok_) {
        out.status = Status::Unsat;
        return out;
    }
    cancel_until_(0);
    // sync theory with the level-0 trail
    if (theory_ && theory_head_ > 0) {
        theory_->on_backtrack(0);
        theory_head_ = 0;
    }

    uint64_t restart_round = 0;
    uint64_t conflict_budget = kRestartBase * luby(restart_round);
    uint64_t conflicts_here = 0;
    Clause learnt;
    int btlevel;

    for (;;) {
        int confl = propagate_();
        if (confl == -1) confl = theory_check_();
        if (confl == -3) continue;  // theory forced a level-0 literal
        if (confl == -2 || !ok_) {
            ok_ = false;
            out.status = Status::Unsat;
            cancel_until_(0);
            return out;
        }
        if (confl >= 0) {
            ++conflicts;
            ++conflicts_here;
            if (trail_lim_.empty()) {
                ok_ = false;
                out.status = Status::Unsat;
                return out;
            }
            analyze_(confl, learnt, btlevel);
            if (log_learnts_) learnts_log_.push_back(learnt);
            cancel_until_(btlevel);
            if (learnt.size() == 1) {
                cancel_until_(0);
                if (value(learnt[0]) == Value::False) {
                    ok_ = false;
                    out.status = Status::Unsat;
                    return out;
                }
                if (value(learnt[0]) == Value::Undef) enqueue_(learnt[0], -1);
            } else {
                int cref = add_internal_(learnt, true);
                enqueue_(learnt[0], cref);
            }
            decay_();
            if (conflicts % 256 == 0 && timed_out_()) {
                out.status = Status::Timeout;
                cancel_until_(0);
                return out;
            }
            if (conflicts_here >= conflict_budget) {
                ++restart_round;
                conflict_budget = kRestartBase * luby(restart_round);
                conflicts_here = 0;
                cancel_until_(0);
                if (num_learnts_ > max_learnts_base_ + static_cast<int>(conflicts / 8))
                    reduce_db_();
            }
            continue;
        }

        // fixpoint, no conflict: extend the assumption prefix, then decide
        if (trail_lim_.size() < assumptions.size()) {
            Lit a = assumptions[trail_lim_.size()];
            if (value(a) == Value::True) {
                trail_lim_.push_back(trail_.size());  // vacuous level
                continue;
            }
            if (value(a) == Value::False) {
                analyze_final_(a, out.core);
                out.status = Status::Unsat;
                cancel_until_(0);
                return out;
            }
            trail_lim_.push_back(trail_.size());
            enqueue_(a, -1);
            continue;
        }

        if (timed_out_()) {
            out.status = Status::Timeout;
            cancel_until_(0);
            return out;
        }

        Lit next = pick_branch_();
        if (next.x == -2) {
            out.status = Status::Sat;
            out.model = assigns_;
            cancel_until_(0);
            return out;
        }
        ++decisions;
        trail_lim_.push_back(trail_.size());
        enqueue_(next, -1);
    }
}

bool Solver::test_decide(Lit l) {
    if (value(l) != Value::Undef) return false;
    trail_lim_.push_back(trail_.size());
    enqueue_(l, -1);
    return true;
}

std::optional<Clause> Solver::test_propagate() {
    int confl = propagate_();
    if (confl < 0) return std::nullopt;
    return clauses_[confl].lits;
}

void Solver::write_dimacs(std::ostream& os) const {
    size_t n = 0;
    for (const auto& c : clauses_)
        if (!c.dead && !c.learnt) ++n;
    os << "p cnf " << num_vars() << " " << n << "\n";
    for (const auto& c : clauses_) {
        if (c.dead || c.learnt) continue;
        for (Lit l : c.lits) os << (l.negated() ? -(l.atom() + 1) : l.atom() + 1) << " ";
        os << "0\n";
    }
}

}  // namespace lmt::sat
