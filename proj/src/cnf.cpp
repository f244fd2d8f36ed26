#include "lmt/cnf.hpp"

#include <stdexcept>

namespace lmt {

int AtomTable::for_bool(VarId declared) {
    auto it = bool_atom_.find(declared);
    if (it != bool_atom_.end()) return it->second;
    int id = size();
    kinds_.push_back(Kind::Bool);
    bool_atom_.emplace(declared, id);
    bool_decl_.emplace(id, declared);
    return id;
}

int AtomTable::for_lincmp(const LinCmp& c) {
    std::string key = c.key();
    auto it = by_key_.find(key);
    if (it != by_key_.end()) return it->second;
    int id = size();
    kinds_.push_back(Kind::Theory);
    lincmps_.emplace(id, c);
    by_key_.emplace(std::move(key), id);
    return id;
}

int AtomTable::fresh_aux() {
    int id = size();
    kinds_.push_back(Kind::Aux);
    return id;
}

std::vector<int> AtomTable::theory_atoms() const {
    std::vector<int> ids;
    for (int i = 0; i < size(); ++i)
        if (kinds_[i] == Kind::Theory) ids.push_back(i);
    return ids;
}

Formula CnfBuilder::desugar_equalities(const Formula& f) {
    switch (f.kind()) {
        case Conn::Leaf: {
            const Atom& a = f.leaf();
            if (a.is_bool() || a.lincmp().rel != Rel::Eq) return f;
            const LinCmp& c = a.lincmp();
            Formula le = Formula::atom(Atom{LinCmp{c.term, Rel::Le, c.bound}});
            Formula ge = Formula::atom(Atom{LinCmp{-c.term, Rel::Le, -c.bound}});
            return Formula::conj({le, ge});
        }
        case Conn::Not: return Formula::negate(desugar_equalities(f.kids()[0]));
        case Conn::And:
        case Conn::Or: {
            std::vector<Formula> kids;
            kids.reserve(f.kids().size());
            for (const auto& k : f.kids()) kids.push_back(desugar_equalities(k));
            return f.kind() == Conn::And ? Formula::conj(std::move(kids))
                                         : Formula::disj(std::move(kids));
        }
        case Conn::Implies:
            return Formula::implies(desugar_equalities(f.kids()[0]), desugar_equalities(f.kids()[1]));
        case Conn::Iff:
            return Formula::iff(desugar_equalities(f.kids()[0]), desugar_equalities(f.kids()[1]));
    }
    throw std::logic_error("unreachable");
}

Lit CnfBuilder::constant(bool b) {
    if (true_atom_ < 0) {
        true_atom_ = atoms_.fresh_aux();
        out_.push_back({Lit::make(true_atom_)});
    }
    return Lit::make(true_atom_, !b);
}

Lit CnfBuilder::convert(const Formula& f) {
    auto hit = memo_.find(f.id());
    if (hit != memo_.end()) return hit->second;

    Lit result;
    switch (f.kind()) {
        case Conn::Leaf: {
            const Atom& a = f.leaf();
            if (a.is_bool()) {
                result = Lit::make(atoms_.for_bool(a.boolref().id));
            } else if (a.lincmp().rel == Rel::Eq) {
                result = convert(desugar_equalities(f));
            } else {
                result = Lit::make(atoms_.for_lincmp(a.lincmp()));
            }
            break;
        }
        case Conn::Not:
            result = ~convert(f.kids()[0]);
            break;
        case Conn::And:
        case Conn::Or: {
            bool is_and = f.kind() == Conn::And;
            if (f.kids().empty()) {
                result = constant(is_and);
                break;
            }
            std::vector<Lit> lits;
            lits.reserve(f.kids().size());
            for (const auto& k : f.kids()) lits.push_back(convert(k));
            if (lits.size() == 1) {
                result = lits[0];
                break;
            }
            Lit a = Lit::make(atoms_.fresh_aux());
            // and: a <-> /\ li ; or: a <-> \/ li (dual via sign flips)
            Clause big;
            big.reserve(lits.size() + 1);
            big.push_back(is_and ? a : ~a);
            for (Lit l : lits) {
                out_.push_back({is_and ? ~a : a, is_and ? l : ~l});
                big.push_back(is_and ? ~l : l);
            }
            out_.push_back(std::move(big));
            result = a;
            break;
        }
        case Conn::Implies: {
            Lit p = convert(f.kids()[0]);
            Lit q = convert(f.kids()[1]);
            Lit a = Lit::make(atoms_.fresh_aux());
            out_.push_back({~a, ~p, q});
            out_.push_back({a, p});
            out_.push_back({a, ~q});
            result = a;
            break;
        }
        case Conn::Iff: {
            Lit p = convert(f.kids()[0]);
            Lit q = convert(f.kids()[1]);
            Lit a = Lit::make(atoms_.fresh_aux());
            out_.push_back({~a, ~p, q});
            out_.push_back({~a, p, ~q});
            out_.push_back({a, p, q});
            out_.push_back({a, ~p, ~q});
            result = a;
            break;
        }
        default:
            throw std::logic_error("unreachable");
    }
    memo_.emplace(f.id(), result);
    return result;
}

void CnfBuilder::assert_top_(const Formula& f) {
    switch (f.kind()) {
        case Conn::And:
            for (const auto& k : f.kids()) assert_top_(k);
            return;
        case Conn::Or: {
            if (f.kids().empty()) {
                out_.push_back({});  // empty clause: unsatisfiable
                return;
            }
            Clause cl;
            cl.reserve(f.kids().size());
            for (const auto& k : f.kids()) cl.push_back(convert(k));
            out_.push_back(std::move(cl));
            return;
        }
        case Conn::Implies:
            out_.push_back({~convert(f.kids()[0]), convert(f.kids()[1])});
            return;
        case Conn::Not: {
            const Formula& inner = f.kids()[0];
            if (inner.kind() == Conn::Or) {
                for (const auto& k : inner.kids()) assert_top_(Formula::negate(k));
                return;
            }
            out_.push_back({~convert(inner)});
            return;
        }
        default:
            out_.push_back({convert(f)});
            return;
    }
}

void CnfBuilder::assert_formula(const Formula& f) {
    assert_top_(desugar_equalities(f));
}

CnfResult to_cnf(const Formula& f) {
    CnfResult r;
    CnfBuilder b(r.atoms, r.clauses);
    r.root = b.convert(CnfBuilder::desugar_equalities(f));
    return r;
}

}  // namespace lmt
