#include "lmt/simplex.hpp"

#include <cassert>
#include <ostream>
#include <set>
#include <stdexcept>

namespace lmt::simplex {

std::string DeltaRational::str() const {
    if (d.is_zero()) return r.str();
    return r.str() + (d.sign() > 0 ? "+" : "") + d.str() + "d";
}

void Tableau::ensure_external(int count) {
    if (count < n_external_) return;
    if (static_cast<int>(vars_.size()) > n_external_ && count > n_external_)
        throw std::logic_error("external variables must be registered before slacks exist");
    while (static_cast<int>(vars_.size()) < count) vars_.emplace_back();
    n_external_ = count;
}

void Tableau::row_add_(int row, int var, const Rational& coeff) {
    if (coeff.is_zero()) return;
    auto& r = rows_[row];
    auto it = r.find(var);
    if (it == r.end()) {
        r.emplace(var, coeff);
        cols_[var].insert(row);
        return;
    }
    it->second += coeff;
    if (it->second.is_zero()) {
        r.erase(it);
        cols_[var].erase(row);
    }
}

int Tableau::var_for_term_(const LinTerm& term_no_const) {
    const auto& cs = term_no_const.coeffs();
    assert(!cs.empty());
    if (cs.size() == 1 && cs.begin()->second.abs() == Rational(1)) return cs.begin()->first;

    std::string key = term_no_const.key();
    auto it = term_slack_.find(key);
    if (it != term_slack_.end()) return it->second;

    int s = static_cast<int>(vars_.size());
    vars_.emplace_back();
    vars_[s].basic = true;
    DeltaRational beta;
    for (const auto& [v, c] : cs) {
        if (vars_[v].basic) {
            for (const auto& [w, cw] : rows_.at(v)) {
                row_add_(s, w, c * cw);
                beta += vars_[w].beta * (c * cw);
            }
        } else {
            row_add_(s, v, c);
            beta += vars_[v].beta * c;
        }
    }
    // an all-cancelling expansion would mean the term is identically zero,
    // which atom normalization rules out
    assert(!rows_[s].empty());
    vars_[s].beta = beta;
    term_slack_.emplace(std::move(key), s);
    return s;
}

void Tableau::register_atom(AtomId id, const LinCmp& cmp) {
    if (atom_info_.count(id)) return;
    for (const auto& [v, c] : cmp.term.coeffs())
        if (v >= n_external_)
            throw std::invalid_argument("atom references unregistered variable");
    AtomInfo info;
    const auto& cs = cmp.term.coeffs();
    if (cs.size() == 1 && cs.begin()->second.abs() == Rational(1)) {
        info.var = cs.begin()->first;
        info.sign = cs.begin()->second;
    } else {
        info.var = var_for_term_(cmp.term);
        info.sign = Rational(1);
    }
    info.rel = cmp.rel;
    info.bound = cmp.bound;
    atom_info_.emplace(id, info);
}

void Tableau::retract_to(Mark m) {
    if (m > undo_.size()) throw std::invalid_argument("stale tableau mark");
    while (undo_.size() > m) {
        Undo u = std::move(undo_.back());
        undo_.pop_back();
        (u.is_lower ? vars_[u.var].lower : vars_[u.var].upper) = std::move(u.old);
    }
}

std::optional<Explanation> Tableau::assert_bound_(int v, bool is_lower, DeltaRational val,
                                                  TheoryLit src, bool& changed) {
    VarState& s = vars_[v];
    if (is_lower) {
        if (s.lower && val <= s.lower->val) return std::nullopt;
        if (s.upper && val > s.upper->val)
            return Explanation{{src, s.upper->src}};
        undo_.push_back({v, true, s.lower});
        s.lower = Bound{val, src};
        if (!s.basic && s.beta < val) update_(v, val);
        changed = true;
    } else {
        if (s.upper && val >= s.upper->val) return std::nullopt;
        if (s.lower && val < s.lower->val)
            return Explanation{{src, s.lower->src}};
        undo_.push_back({v, false, s.upper});
        s.upper = Bound{val, src};
        if (!s.basic && s.beta > val) update_(v, val);
        changed = true;
    }
    return std::nullopt;
}

std::optional<Explanation> Tableau::assert_atom(AtomId id, bool positive) {
    auto it = atom_info_.find(id);
    if (it == atom_info_.end()) throw std::invalid_argument("assert of unregistered atom");
    const AtomInfo& a = it->second;
    bool flip = a.sign.sign() < 0;
    Rational c = flip ? -a.bound : a.bound;
    TheoryLit src{id, positive};
    bool changed = false;
    std::optional<Explanation> confl;

    auto lower = [&](DeltaRational val) { return assert_bound_(a.var, true, val, src, changed); };
    auto upper = [&](DeltaRational val) { return assert_bound_(a.var, false, val, src, changed); };

    switch (a.rel) {
        case Rel::Le:
            if (positive)
                confl = flip ? lower({c}) : upper({c});
            else
                confl = flip ? upper({c, Rational(-1)}) : lower({c, Rational(1)});
            break;
        case Rel::Lt:
            if (positive)
                confl = flip ? lower({c, Rational(1)}) : upper({c, Rational(-1)});
            else
                confl = flip ? upper({c}) : lower({c});
            break;
        case Rel::Eq:
            if (!positive)
                throw std::invalid_argument("negated equality reached the theory solver");
            confl = lower({c});
            if (!confl) confl = upper({c});
            break;
    }
    if (confl) return confl;
    if (!changed) return std::nullopt;
    return check_();
}

void Tableau::update_(int v, const DeltaRational& val) {
    DeltaRational diff = val - vars_[v].beta;
    auto ci = cols_.find(v);
    if (ci != cols_.end())
        for (int r : ci->second) vars_[r].beta += diff * rows_.at(r).at(v);
    vars_[v].beta = val;
}

void Tableau::pivot_and_update_(int b, const DeltaRational& target, int j) {
    const Rational& a = rows_.at(b).at(j);
    DeltaRational theta = (target - vars_[b].beta) / a;
    vars_[b].beta = target;
    vars_[j].beta += theta;
    for (int r : cols_.at(j))
        if (r != b) vars_[r].beta += theta * rows_.at(r).at(j);
    pivot_(b, j);
}

void Tableau::pivot_(int b, int j) {
    std::map<int, Rational> row_b = std::move(rows_.at(b));
    rows_.erase(b);
    for (const auto& [v, c] : row_b) cols_[v].erase(b);

    Rational a = row_b.at(j);
    std::map<int, Rational> row_j;
    row_j.emplace(b, a.inverse());
    for (const auto& [v, c] : row_b)
        if (v != j) row_j.emplace(v, -(c / a));

    // substitute j in every remaining row that mentions it
    std::set<int> touched = cols_.count(j) ? cols_.at(j) : std::set<int>{};
    for (int r : touched) {
        Rational cj = rows_.at(r).at(j);
        rows_.at(r).erase(j);
        cols_[j].erase(r);
        for (const auto& [v, c] : row_j) row_add_(r, v, cj * c);
    }

    for (const auto& [v, c] : row_j) cols_[v].insert(j);
    rows_.emplace(j, std::move(row_j));
    vars_[b].basic = false;
    vars_[j].basic = true;
}

std::optional<Explanation> Tableau::check_() {
    for (;;) {
        int bad = -1;
        bool need_increase = false;
        for (const auto& [b, row] : rows_) {
            const VarState& s = vars_[b];
            if (s.lower && s.beta < s.lower->val) {
                bad = b;
                need_increase = true;
                break;
            }
            if (s.upper && s.beta > s.upper->val) {
                bad = b;
                need_increase = false;
                break;
            }
        }
        if (bad < 0) return std::nullopt;

        const auto& row = rows_.at(bad);
        int enter = -1;
        for (const auto& [j, a] : row) {
            const VarState& sj = vars_[j];
            bool can;
            if (need_increase)
                can = (a.sign() > 0) ? (!sj.upper || sj.beta < sj.upper->val)
                                     : (!sj.lower || sj.beta > sj.lower->val);
            else
                can = (a.sign() > 0) ? (!sj.lower || sj.beta > sj.lower->val)
                                     : (!sj.upper || sj.beta < sj.upper->val);
            if (can) {
                enter = j;
                break;  // rows are index-sorted: Bland's rule
            }
        }
        if (enter < 0) return row_conflict_(bad, need_increase);
        const DeltaRational target =
            need_increase ? vars_[bad].lower->val : vars_[bad].upper->val;
        pivot_and_update_(bad, target, enter);
    }
}

Explanation Tableau::row_conflict_(int b, bool need_increase) const {
    std::set<TheoryLit> lits;
    const VarState& s = vars_[b];
    lits.insert(need_increase ? s.lower->src : s.upper->src);
    for (const auto& [j, a] : rows_.at(b)) {
        const VarState& sj = vars_[j];
        bool up = need_increase ? (a.sign() > 0) : (a.sign() < 0);
        lits.insert(up ? sj.upper->src : sj.lower->src);
    }
    Explanation e;
    e.lits.assign(lits.begin(), lits.end());
    return e;
}

MinimizeResult Tableau::minimize(const LinTerm& objective) {
    // objective over nonbasics
    std::map<int, Rational> d;
    auto d_add = [&](int v, const Rational& c) {
        auto it = d.find(v);
        if (it == d.end()) {
            if (!c.is_zero()) d.emplace(v, c);
            return;
        }
        it->second += c;
        if (it->second.is_zero()) d.erase(it);
    };
    for (const auto& [v, c] : objective.coeffs()) {
        if (v >= static_cast<int>(vars_.size()))
            throw std::invalid_argument("objective references unknown variable");
        if (vars_[v].basic)
            for (const auto& [w, cw] : rows_.at(v)) d_add(w, c * cw);
        else
            d_add(v, c);
    }

    MinimizeResult res;
    for (;;) {
        int enter = -1;
        int dir = 0;
        for (const auto& [j, dj] : d) {
            const VarState& sj = vars_[j];
            if (dj.sign() < 0 && (!sj.upper || sj.beta < sj.upper->val)) {
                enter = j;
                dir = 1;
                break;
            }
            if (dj.sign() > 0 && (!sj.lower || sj.beta > sj.lower->val)) {
                enter = j;
                dir = -1;
                break;
            }
        }
        if (enter < 0) break;  // optimal

        const VarState& se = vars_[enter];
        bool capped = false;
        DeltaRational cap;
        int leave = -1;  // -1 = entering variable's own bound (index: enter)
        if (dir > 0 && se.upper) {
            capped = true;
            cap = se.upper->val - se.beta;
        } else if (dir < 0 && se.lower) {
            capped = true;
            cap = se.beta - se.lower->val;
        }
        auto consider = [&](int r, const DeltaRational& t) {
            // min cap; ties resolved toward the smallest variable index (Bland)
            if (!capped || t < cap) {
                cap = t;
                leave = r;
                capped = true;
            } else if (t == cap && r < (leave < 0 ? enter : leave)) {
                leave = r;
            }
        };
        auto ci = cols_.find(enter);
        if (ci != cols_.end()) {
            for (int r : ci->second) {
                const Rational& a = rows_.at(r).at(enter);
                const VarState& sb = vars_[r];
                Rational rate = a * Rational(dir);
                if (rate.sign() > 0 && sb.upper)
                    consider(r, (sb.upper->val - sb.beta) / rate);
                else if (rate.sign() < 0 && sb.lower)
                    consider(r, (sb.lower->val - sb.beta) / rate);
            }
        }
        if (!capped) {
            res.unbounded = true;
            res.ray.clear();
            res.ray.emplace(enter, Rational(dir));
            if (ci != cols_.end())
                for (int r : ci->second) {
                    if (r < n_external_)
                        res.ray.emplace(r, rows_.at(r).at(enter) * Rational(dir));
                }
            return res;
        }
        if (leave < 0) {
            update_(enter, se.beta + (dir > 0 ? cap : -cap));
        } else {
            const Rational& a = rows_.at(leave).at(enter);
            Rational rate = a * Rational(dir);
            DeltaRational target = rate.sign() > 0 ? vars_[leave].upper->val : vars_[leave].lower->val;
            pivot_and_update_(leave, target, enter);
            // entering var became basic: substitute it out of the objective
            auto itd = d.find(enter);
            if (itd != d.end()) {
                Rational ce = itd->second;
                d.erase(itd);
                for (const auto& [v, c] : rows_.at(enter)) d_add(v, ce * c);
            }
        }
    }

    DeltaRational z;
    for (const auto& [v, c] : objective.coeffs()) z += vars_[v].beta * c;
    res.value = z;
    res.model = delta_model();
    res.safe_delta = safe_delta();
    return res;
}

std::map<VarId, DeltaRational> Tableau::delta_model() const {
    std::map<VarId, DeltaRational> m;
    for (int v = 0; v < n_external_; ++v) m.emplace(v, vars_[v].beta);
    return m;
}

Rational Tableau::safe_delta() const {
    Rational cap(1);
    bool have = true;  // cap starts at 1
    auto tighten = [&](const Rational& num, const Rational& den) {
        Rational t = num / den;
        if (!have || t < cap) cap = t;
        have = true;
    };
    for (const auto& s : vars_) {
        if (s.lower) {
            const auto& l = s.lower->val;
            if (l.r < s.beta.r && l.d > s.beta.d) tighten(s.beta.r - l.r, l.d - s.beta.d);
        }
        if (s.upper) {
            const auto& u = s.upper->val;
            if (s.beta.r < u.r && s.beta.d > u.d) tighten(u.r - s.beta.r, s.beta.d - u.d);
        }
    }
    if (cap > Rational(1)) cap = Rational(1);
    return cap;
}

std::map<VarId, Rational> Tableau::concretize(const std::map<VarId, DeltaRational>& snapshot,
                                              const Rational& delta) {
    std::map<VarId, Rational> m;
    for (const auto& [v, dr] : snapshot) m.emplace(v, dr.r + dr.d * delta);
    return m;
}

std::map<VarId, Rational> Tableau::model() const {
    return concretize(delta_model(), safe_delta());
}

void Tableau::dump(std::ostream& os) const {
    os << "tableau: " << vars_.size() << " vars (" << n_external_ << " external), "
       << rows_.size() << " rows\n";
    for (const auto& [b, row] : rows_) {
        os << "  v" << b << " =";
        for (const auto& [v, c] : row) os << " " << c.str() << "*v" << v;
        os << "\n";
    }
    for (size_t v = 0; v < vars_.size(); ++v) {
        const auto& s = vars_[v];
        os << "  v" << v << " beta=" << s.beta.str();
        if (s.lower) os << " lo=" << s.lower->val.str();
        if (s.upper) os << " hi=" << s.upper->val.str();
        os << (s.basic ? " basic" : "") << "\n";
    }
}

}  // namespace lmt::simplex
