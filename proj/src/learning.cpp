#include "lmt/learning.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace lmt {

void LmtProblem::complete(Assignment& a) const {
    a.bools.resize(decls.num_bools(), false);
    a.rats.resize(decls.num_rats(), Rational(0));
    for (const auto& d : derived) d.eval(a);
}

bool LmtProblem::hard_feasible(const Assignment& a) const {
    for (const auto& f : hard)
        if (!f.evaluate(a)) return false;
    return true;
}

std::vector<std::string> LmtProblem::soft_names() const {
    std::vector<std::string> names;
    names.reserve(softs.size());
    for (const auto& s : softs) names.push_back(s.name);
    return names;
}

FeatureVector extract_features(const LmtProblem& p, const Assignment& a) {
    FeatureVector f;
    f.psi.reserve(p.softs.size());
    for (const auto& s : p.softs) {
        if (s.is_bool)
            f.psi.push_back(s.formula.evaluate(a) ? Rational(1) : Rational(-1));
        else
            f.psi.push_back(-evaluate_term(s.cost, a));
    }
    f.hard_feasible = p.hard_feasible(a);
    return f;
}

Rational loss(const FeatureVector& a, const FeatureVector& b) {
    if (a.psi.size() != b.psi.size()) throw std::invalid_argument("feature dimension mismatch");
    Rational d;
    for (size_t i = 0; i < a.psi.size(); ++i) d += (a.psi[i] - b.psi[i]).abs();
    return d;
}

Rational loss(const LmtProblem& p, const Assignment& gold, const Assignment& other) {
    return loss(extract_features(p, gold), extract_features(p, other));
}

std::vector<Rational> exact_weights(const std::vector<double>& w) {
    std::vector<Rational> out;
    out.reserve(w.size());
    for (double x : w) out.push_back(Rational::from_double(x));
    return out;
}

Rational dot(const std::vector<Rational>& w, const FeatureVector& f) {
    if (w.size() != f.psi.size()) throw std::invalid_argument("weight/feature dimension mismatch");
    Rational s;
    for (size_t i = 0; i < w.size(); ++i) s += w[i] * f.psi[i];
    return s;
}

Rational compatibility(const LmtProblem& p, const Assignment& a) {
    if (p.weights.size() != p.softs.size())
        throw std::invalid_argument("weight/feature dimension mismatch");
    return dot(exact_weights(p.weights), extract_features(p, a));
}

namespace {

// Shared inference/separation encoder. Builds the SmtProblem whose variables
// extend p.decls (same ids for the common prefix), with {-1,+1} indicator
// variables tied to each Boolean soft constraint.
struct Encoder {
    const LmtProblem& p;
    SmtProblem smt;
    std::vector<VarId> indicator;  // per bool soft, else -1

    explicit Encoder(const LmtProblem& prob) : p(prob) {
        smt.decls = p.decls;
        smt.hard = p.hard;
        indicator.assign(p.softs.size(), -1);
        for (size_t k = 0; k < p.softs.size(); ++k) {
            const auto& s = p.softs[k];
            if (!s.is_bool) continue;
            VarId ind = smt.decls.add_rat("psi!" + s.name);
            indicator[k] = ind;
            smt.hard.push_back(Formula::implies(
                s.formula, Formula::cmp(LinTerm::var(ind), "=", LinTerm(Rational(1)))));
            smt.hard.push_back(Formula::implies(
                Formula::negate(s.formula),
                Formula::cmp(LinTerm::var(ind), "=", LinTerm(Rational(-1)))));
        }
    }

    void fix_inputs(const Assignment& input_values) {
        for (auto [is_bool, v] : p.inputs) {
            if (is_bool) {
                bool val = v < static_cast<VarId>(input_values.bools.size()) && input_values.bools[v];
                smt.hard.push_back(val ? Formula::bvar(v) : Formula::negate(Formula::bvar(v)));
            } else {
                if (v >= static_cast<VarId>(input_values.rats.size()))
                    throw std::invalid_argument("input assignment missing a rational input");
                smt.hard.push_back(
                    Formula::cmp(LinTerm::var(v), "=", LinTerm(input_values.rats[v])));
            }
        }
    }

    // objective -= w . psi
    void add_compatibility_objective(const std::vector<Rational>& w, LinTerm& obj) {
        for (size_t k = 0; k < p.softs.size(); ++k) {
            if (w[k].is_zero()) continue;
            if (p.softs[k].is_bool)
                obj.add(indicator[k], -w[k]);
            else
                obj += p.softs[k].cost * w[k];  // -w*psi = w*cost
        }
    }

    void add_hardened_weights(const std::vector<double>& w) {
        for (const auto& group : p.harden_groups) {
            std::vector<Formula> pos;
            for (size_t k : group)
                if (w[k] > 0.0) pos.push_back(p.softs[k].formula);
            if (!pos.empty()) smt.hard.push_back(Formula::disj(std::move(pos)));
        }
    }
};

Assignment project_to(const Declarations& d, const Assignment& full) {
    Assignment a = Assignment::zeros(d);
    for (int i = 0; i < d.num_bools() && i < static_cast<int>(full.bools.size()); ++i)
        a.bools[i] = full.bools[i];
    for (int i = 0; i < d.num_rats() && i < static_cast<int>(full.rats.size()); ++i)
        a.rats[i] = full.rats[i];
    return a;
}

}  // namespace

InferResult infer(const LmtProblem& p, const Assignment& input_values, const InferOptions& opts) {
    if (p.weights.size() != p.softs.size())
        throw std::invalid_argument("infer requires trained weights");
    Encoder enc(p);
    enc.fix_inputs(input_values);
    if (opts.harden_weights) enc.add_hardened_weights(p.weights);
    LinTerm obj;
    enc.add_compatibility_objective(exact_weights(p.weights), obj);
    enc.smt.objective = obj;
    enc.smt.budget = opts.budget;

    OmtSolver solver(enc.smt, opts.seed);
    OmtOutcome out = opts.binary_search ? solver.minimize_binary() : solver.minimize();
    InferResult res;
    res.status = out.status;
    if (out.model) {
        res.model = project_to(p.decls, *out.model);
        res.objective = out.value;
    }
    return res;
}

SmtProblem encode_loss_augmented(const LmtProblem& p, const Assignment& gold,
                                 const std::vector<double>& w) {
    if (w.size() != p.softs.size()) throw std::invalid_argument("weight dimension mismatch");
    FeatureVector gold_psi = extract_features(p, gold);
    std::vector<Rational> wr = exact_weights(w);

    Encoder enc(p);
    enc.fix_inputs(gold);
    LinTerm obj;  // minimize -(Delta + w.psi')
    enc.add_compatibility_objective(wr, obj);
    for (size_t k = 0; k < p.softs.size(); ++k) {
        const auto& s = p.softs[k];
        if (s.is_bool) {
            // Delta_k = |1_k(gold) - ind| = 1 - g*ind for g = +-1; so
            // -Delta_k = g*ind - 1
            const Rational& g = gold_psi.psi[k];
            obj.add(enc.indicator[k], g);
            obj.add_constant(Rational(-1));
        } else {
            // Delta_k = |c_k - c_k(gold)| held exactly by t via a sign case
            Rational at_gold = -gold_psi.psi[k];  // c_k(gold)
            LinTerm diff = s.cost - LinTerm(at_gold);
            VarId t = enc.smt.decls.add_rat("dabs!" + s.name);
            VarId d = enc.smt.decls.add_bool("dsign!" + s.name);
            Formula pos = Formula::bvar(d);
            enc.smt.hard.push_back(
                Formula::implies(pos, Formula::cmp(diff, ">=", LinTerm(Rational(0)))));
            enc.smt.hard.push_back(
                Formula::implies(pos, Formula::cmp(LinTerm::var(t), "=", diff)));
            enc.smt.hard.push_back(Formula::implies(
                Formula::negate(pos), Formula::cmp(diff, "<=", LinTerm(Rational(0)))));
            enc.smt.hard.push_back(Formula::implies(
                Formula::negate(pos), Formula::cmp(LinTerm::var(t), "=", -diff)));
            obj.add(t, Rational(-1));  // -Delta_k
        }
    }
    enc.smt.objective = obj;
    return enc.smt;
}

SeparationResult separate(const LmtProblem& p, const Assignment& gold,
                          const std::vector<double>& w,
                          std::optional<std::chrono::milliseconds> budget, uint64_t seed) {
    SmtProblem smt = encode_loss_augmented(p, gold, w);
    smt.budget = budget;
    OmtSolver solver(smt, seed);
    OmtOutcome out = solver.minimize();

    SeparationResult res;
    res.status = out.status;
    if (!out.model) return res;
    Assignment cand = project_to(p.decls, *out.model);
    FeatureVector cand_psi = extract_features(p, cand);
    FeatureVector gold_psi = extract_features(p, gold);
    std::vector<Rational> wr = exact_weights(w);
    res.candidate = std::move(cand);
    res.features = cand_psi;
    res.loss_value = loss(gold_psi, cand_psi);
    res.violation = res.loss_value + dot(wr, cand_psi) - dot(wr, gold_psi);
    return res;
}

QpSolution solve_qp(const std::vector<std::vector<QpRow>>& blocks, size_t dim, double cap,
                    double tol) {
    QpSolution sol;
    sol.w.assign(dim, 0.0);
    sol.xi.assign(blocks.size(), 0.0);

    size_t total_rows = 0;
    for (const auto& b : blocks) total_rows += b.size();
    if (total_rows == 0) return sol;

    std::vector<std::vector<double>> alpha(blocks.size());
    std::vector<std::vector<double>> norms(blocks.size());
    for (size_t i = 0; i < blocks.size(); ++i) {
        alpha[i].assign(blocks[i].size(), 0.0);
        norms[i].resize(blocks[i].size());
        for (size_t r = 0; r < blocks[i].size(); ++r) {
            double n = 0;
            for (double x : blocks[i][r].dpsi) n += x * x;
            norms[i][r] = n;
        }
    }

    auto dual_value = [&]() {
        double v = 0;
        for (size_t i = 0; i < blocks.size(); ++i)
            for (size_t r = 0; r < blocks[i].size(); ++r) v += alpha[i][r] * blocks[i][r].delta;
        double n = 0;
        for (double x : sol.w) n += x * x;
        return v - 0.5 * n;
    };
    auto primal_value = [&]() {
        double n = 0;
        for (double x : sol.w) n += x * x;
        double v = 0.5 * n;
        for (size_t i = 0; i < blocks.size(); ++i) {
            double xi = 0;
            for (const auto& row : blocks[i]) {
                double m = row.delta;
                for (size_t j = 0; j < dim; ++j) m -= sol.w[j] * row.dpsi[j];
                xi = std::max(xi, m);
            }
            sol.xi[i] = xi;
            v += cap * xi;
        }
        return v;
    };

    const int max_epochs = 200000;
    for (int epoch = 0; epoch < max_epochs; ++epoch) {
        for (size_t i = 0; i < blocks.size(); ++i) {
            double block_sum = 0;
            for (double a : alpha[i]) block_sum += a;
            for (size_t r = 0; r < blocks[i].size(); ++r) {
                const QpRow& row = blocks[i][r];
                double g = row.delta;
                for (size_t j = 0; j < dim; ++j) g -= sol.w[j] * row.dpsi[j];
                double step;
                if (norms[i][r] > 0)
                    step = g / norms[i][r];
                else
                    step = g > 0 ? cap : -cap;  // degenerate zero row: bang-bang
                double na = alpha[i][r] + step;
                double room = cap - (block_sum - alpha[i][r]);
                na = std::min(std::max(na, 0.0), std::max(room, 0.0));
                double diff = na - alpha[i][r];
                if (diff != 0.0) {
                    for (size_t j = 0; j < dim; ++j) sol.w[j] += diff * row.dpsi[j];
                    block_sum += diff;
                    alpha[i][r] = na;
                }
            }
        }
        if (epoch % 4 == 3 || epoch == 0) {
            double gap = primal_value() - dual_value();
            if (gap <= tol) break;
        }
    }
    sol.objective = primal_value();
    return sol;
}

namespace {

struct WorkingSets {
    std::vector<std::vector<QpRow>> blocks;
};

QpRow make_row(const FeatureVector& gold, const SeparationResult& sep) {
    QpRow row;
    row.dpsi.resize(gold.psi.size());
    for (size_t k = 0; k < gold.psi.size(); ++k)
        row.dpsi[k] = (gold.psi[k] - sep.features.psi[k]).to_double();
    row.delta = sep.loss_value.to_double();
    return row;
}

}  // namespace

TrainResult train(const std::vector<TrainExample>& examples, const TrainConfig& cfg) {
    if (examples.empty()) throw std::invalid_argument("training requires at least one example");
    const size_t n = examples.size();
    const auto names = examples[0].problem->soft_names();
    for (const auto& ex : examples) {
        if (ex.problem->soft_names() != names)
            throw std::invalid_argument("training examples disagree on soft constraints");
        if (!ex.problem->hard_feasible(ex.gold))
            throw std::invalid_argument("training example violates hard constraints");
    }
    const size_t dim = names.size();

    std::vector<FeatureVector> gold_psi;
    gold_psi.reserve(n);
    for (const auto& ex : examples) gold_psi.push_back(extract_features(*ex.problem, ex.gold));

    TrainResult res;
    res.weights.assign(dim, 0.0);
    bool one_slack = cfg.formulation == Formulation::OneSlack;
    const size_t nblocks = one_slack ? 1 : n;
    const double cap = one_slack ? cfg.C : cfg.C / static_cast<double>(n);
    WorkingSets ws;
    ws.blocks.assign(nblocks, {});
    res.xi.assign(nblocks, 0.0);

    auto run_separations = [&](const std::vector<double>& w) {
        std::vector<SeparationResult> out(n);
        if (cfg.jobs <= 1) {
            for (size_t i = 0; i < n; ++i)
                out[i] = separate(*examples[i].problem, examples[i].gold, w,
                                  cfg.separation_budget, cfg.seed);
            return out;
        }
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (int j = 0; j < cfg.jobs; ++j)
            pool.emplace_back([&]() {
                for (;;) {
                    size_t i = next.fetch_add(1);
                    if (i >= n) return;
                    out[i] = separate(*examples[i].problem, examples[i].gold, w,
                                      cfg.separation_budget, cfg.seed);
                }
            });
        for (auto& t : pool) t.join();
        return out;
    };

    for (res.passes = 1; res.passes <= cfg.max_passes; ++res.passes) {
        bool changed = false;
        if (one_slack) {
            auto seps = run_separations(res.weights);
            QpRow avg;
            avg.dpsi.assign(dim, 0.0);
            double viol = 0.0;
            size_t got = 0;
            for (size_t i = 0; i < n; ++i) {
                if (!seps[i].candidate) {
                    if (seps[i].status == OmtStatus::Unsat)
                        throw std::runtime_error("separation infeasible for an example");
                    continue;  // timeout without incumbent: skip this example
                }
                QpRow row = make_row(gold_psi[i], seps[i]);
                for (size_t k = 0; k < dim; ++k) avg.dpsi[k] += row.dpsi[k];
                avg.delta += row.delta;
                viol += seps[i].violation.to_double();
                ++got;
            }
            if (got > 0) {
                double inv = 1.0 / static_cast<double>(n);
                for (auto& x : avg.dpsi) x *= inv;
                avg.delta *= inv;
                viol *= inv;
                if (viol > res.xi[0] + cfg.epsilon) {
                    ws.blocks[0].push_back(avg);
                    auto qp = solve_qp(ws.blocks, dim, cap, cfg.qp_tolerance);
                    res.weights = qp.w;
                    res.xi = qp.xi;
                    res.qp_objectives.push_back(qp.objective);
                    changed = true;
                }
            }
        } else {
            auto seps = cfg.jobs > 1 ? run_separations(res.weights)
                                     : std::vector<SeparationResult>{};
            for (size_t i = 0; i < n; ++i) {
                SeparationResult sep =
                    cfg.jobs > 1 ? std::move(seps[i])
                                 : separate(*examples[i].problem, examples[i].gold, res.weights,
                                            cfg.separation_budget, cfg.seed);
                if (!sep.candidate) {
                    if (sep.status == OmtStatus::Unsat)
                        throw std::runtime_error("separation infeasible for an example");
                    continue;
                }
                // with stale weights (jobs > 1) the violation must be
                // re-evaluated against the current ones
                std::vector<Rational> wr = exact_weights(res.weights);
                Rational viol = sep.loss_value + dot(wr, sep.features) - dot(wr, gold_psi[i]);
                if (viol.to_double() > res.xi[i] + cfg.epsilon) {
                    QpRow row = make_row(gold_psi[i], sep);
                    ws.blocks[i].push_back(row);
                    auto qp = solve_qp(ws.blocks, dim, cap, cfg.qp_tolerance);
                    res.weights = qp.w;
                    res.xi = qp.xi;
                    res.qp_objectives.push_back(qp.objective);
                    changed = true;
                }
            }
        }
        if (cfg.log) {
            *cfg.log << "pass " << res.passes << ": rows";
            for (const auto& b : ws.blocks) *cfg.log << " " << b.size();
            if (!res.qp_objectives.empty())
                *cfg.log << " qp_objective " << res.qp_objectives.back();
            *cfg.log << "\n";
        }
        if (!changed) {
            res.converged = true;
            break;
        }
    }
    return res;
}

bool epsilon_certificate(const std::vector<TrainExample>& examples,
                         const std::vector<double>& w, const std::vector<double>& xi,
                         double epsilon) {
    for (size_t i = 0; i < examples.size(); ++i) {
        auto sep = separate(*examples[i].problem, examples[i].gold, w, std::nullopt);
        if (!sep.candidate) return false;
        double slack = xi.size() == 1 ? xi[0] : xi[i];
        if (sep.violation.to_double() > slack + epsilon) return false;
    }
    return true;
}

}  // namespace lmt
