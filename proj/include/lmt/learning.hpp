#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "lmt/smt.hpp"

namespace lmt {

// A weighted constraint: either a Boolean formula (indicator feature in
// {-1,+1}) or an arithmetic cost term (feature -cost).
struct SoftConstraint {
    std::string name;
    bool is_bool = true;
    Formula formula;  // Boolean kind
    LinTerm cost;     // arithmetic kind, over declared (possibly derived) vars
};

// Derived variables (ground predicates, case selectors, max/min carriers) are
// pinned by hard constraints during solving; for externally supplied
// assignments they are recomputed in registration order.
struct DerivedDef {
    bool is_bool = true;
    VarId var = -1;
    std::function<void(Assignment&)> eval;
};

struct LmtProblem {
    Declarations decls;
    std::vector<std::pair<bool, VarId>> inputs;   // (is_bool, id)
    std::vector<std::pair<bool, VarId>> outputs;  // core output variables
    std::vector<Formula> hard;
    std::vector<SoftConstraint> softs;
    std::vector<DerivedDef> derived;
    // soft-constraint index groups eligible for weight hardening (per
    // segment / per connection pair); empty for domains without the mode
    std::vector<std::vector<size_t>> harden_groups;
    std::vector<double> weights;  // empty until trained; else |softs|

    void complete(Assignment& a) const;
    bool hard_feasible(const Assignment& a) const;
    std::vector<std::string> soft_names() const;
};

struct FeatureVector {
    std::vector<Rational> psi;  // parallel to problem.softs
    bool hard_feasible = true;
};

FeatureVector extract_features(const LmtProblem& p, const Assignment& a);
Rational loss(const FeatureVector& a, const FeatureVector& b);  // L1
Rational loss(const LmtProblem& p, const Assignment& gold, const Assignment& other);

std::vector<Rational> exact_weights(const std::vector<double>& w);
Rational dot(const std::vector<Rational>& w, const FeatureVector& f);
Rational compatibility(const LmtProblem& p, const Assignment& a);  // w . psi

struct InferOptions {
    std::optional<std::chrono::milliseconds> budget;
    bool harden_weights = false;
    bool binary_search = false;
    uint64_t seed = 0;
};

struct InferResult {
    OmtStatus status = OmtStatus::Timeout;
    std::optional<Assignment> model;      // full assignment over p.decls
    std::optional<Rational> objective;    // OMT objective = -compatibility
};

// Most compatible output for the fixed input: argmax_w psi via OMT.
InferResult infer(const LmtProblem& p, const Assignment& input_values, const InferOptions& opts);

struct SeparationResult {
    OmtStatus status = OmtStatus::Timeout;
    std::optional<Assignment> candidate;
    Rational loss_value;
    FeatureVector features;
    Rational violation;  // Delta + w.psi' - w.psi_gold
};

// Most violated constraint: argmax Delta + w.psi via OMT (loss-augmented).
SeparationResult separate(const LmtProblem& p, const Assignment& gold,
                          const std::vector<double>& w,
                          std::optional<std::chrono::milliseconds> budget, uint64_t seed = 0);

// Loss-augmented inference encoding, exposed for oracle tests.
SmtProblem encode_loss_augmented(const LmtProblem& p, const Assignment& gold,
                                 const std::vector<double>& w);

struct TrainExample {
    std::shared_ptr<const LmtProblem> problem;  // shared soft signature
    Assignment gold;                            // completed, hard-feasible
};

enum class Formulation { NSlack, OneSlack };

struct TrainConfig {
    double C = 100.0;
    double epsilon = 0.01;
    std::optional<std::chrono::milliseconds> separation_budget;
    Formulation formulation = Formulation::NSlack;
    double qp_tolerance = 1e-8;
    int max_passes = 500;
    int jobs = 1;
    uint64_t seed = 0;
    std::ostream* log = nullptr;
};

struct TrainResult {
    std::vector<double> weights;
    std::vector<double> xi;
    bool converged = false;
    int passes = 0;
    std::vector<double> qp_objectives;  // one per QP re-solve
};

TrainResult train(const std::vector<TrainExample>& examples, const TrainConfig& cfg);

// One exact separation pass (no budget): true iff no example violates its
// slack by more than epsilon.
bool epsilon_certificate(const std::vector<TrainExample>& examples,
                         const std::vector<double>& w, const std::vector<double>& xi,
                         double epsilon);

// Working-set QP: min 1/2 |w|^2 + cap * sum_i xi_i subject to
// w . dpsi >= delta - xi_i for every row of block i. Solved in the dual by
// coordinate ascent with the per-block simplex cap.
struct QpRow {
    std::vector<double> dpsi;
    double delta = 0.0;
};

struct QpSolution {
    std::vector<double> w;
    std::vector<double> xi;
    double objective = 0.0;
};

QpSolution solve_qp(const std::vector<std::vector<QpRow>>& blocks, size_t dim, double cap,
                    double tol);

}  // namespace lmt
