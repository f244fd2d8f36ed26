#include <doctest.h>

#include <random>

#include "lmt/domains.hpp"
#include "lmt/learning.hpp"

using namespace lmt;
using domains::build_toy_blocks_problem;
using domains::toy_input;

namespace {

// input block from the toy example: centered-ish fixed block
Assignment default_toy_full(const LmtProblem& p, const Rational& x2, const Rational& y2,
                            const Rational& dx2, const Rational& dy2) {
    Assignment a = toy_input(Rational(1, 4), Rational(1, 4), Rational(1, 2), Rational(1, 4));
    a.rats.resize(p.decls.num_rats(), Rational(0));
    a.rats[p.decls.rat_id("x_2")] = x2;
    a.rats[p.decls.rat_id("y_2")] = y2;
    a.rats[p.decls.rat_id("dx_2")] = dx2;
    a.rats[p.decls.rat_id("dy_2")] = dy2;
    p.complete(a);
    return a;
}

// independent projected-gradient reference for the dual QP
struct PgRef {
    std::vector<double> w;
    double objective;
};

PgRef pg_reference(const std::vector<std::vector<QpRow>>& blocks, size_t dim, double cap) {
    std::vector<std::vector<double>> alpha(blocks.size());
    for (size_t i = 0; i < blocks.size(); ++i) alpha[i].assign(blocks[i].size(), 0.0);
    std::vector<double> w(dim, 0.0);
    auto recompute_w = [&]() {
        std::fill(w.begin(), w.end(), 0.0);
        for (size_t i = 0; i < blocks.size(); ++i)
            for (size_t r = 0; r < blocks[i].size(); ++r)
                for (size_t j = 0; j < dim; ++j) w[j] += alpha[i][r] * blocks[i][r].dpsi[j];
    };
    double step = 0.05;
    for (int it = 0; it < 200000; ++it) {
        recompute_w();
        for (size_t i = 0; i < blocks.size(); ++i) {
            for (size_t r = 0; r < blocks[i].size(); ++r) {
                double g = blocks[i][r].delta;
                for (size_t j = 0; j < dim; ++j) g -= w[j] * blocks[i][r].dpsi[j];
                alpha[i][r] += step * g;
                if (alpha[i][r] < 0) alpha[i][r] = 0;
            }
            // project the block onto the simplex sum <= cap
            double s = 0;
            for (double a : alpha[i]) s += a;
            if (s > cap) {
                // bisection on the shift for the simplex projection
                double lo = 0, hi = s;
                for (int b = 0; b < 100; ++b) {
                    double mid = (lo + hi) / 2;
                    double t = 0;
                    for (double a : alpha[i]) t += std::max(0.0, a - mid);
                    (t > cap ? lo : hi) = mid;
                }
                for (double& a : alpha[i]) a = std::max(0.0, a - hi);
            }
        }
    }
    recompute_w();
    double primal = 0;
    for (double x : w) primal += x * x;
    primal *= 0.5;
    for (size_t i = 0; i < blocks.size(); ++i) {
        double xi = 0;
        for (const auto& row : blocks[i]) {
            double m = row.delta;
            for (size_t j = 0; j < dim; ++j) m -= w[j] * row.dpsi[j];
            xi = std::max(xi, m);
        }
        primal += cap * xi;
    }
    return {w, primal};
}

}  // namespace

TEST_CASE("toy feature vector is (-dx2, -dy2)") {
    LmtProblem p = build_toy_blocks_problem();
    Assignment a = default_toy_full(p, Rational(3, 4), Rational(1, 4), Rational(1, 8), Rational(1, 3));
    auto f = extract_features(p, a);
    REQUIRE(f.psi.size() == 2);
    CHECK(f.psi[0] == Rational(-1, 8));
    CHECK(f.psi[1] == Rational(-1, 3));
}

TEST_CASE("compatibility against the cost sign convention") {
    LmtProblem p = build_toy_blocks_problem();
    p.weights = {-1.0, -1.0};
    Assignment a = default_toy_full(p, Rational(3, 4), Rational(1, 4), Rational(1, 8), Rational(1, 3));
    // w=(-1,-1): compatibility = dx2+dy2
    CHECK(compatibility(p, a) == Rational(1, 8) + Rational(1, 3));
    p.weights = {0.0, 0.0};
    CHECK(compatibility(p, a) == Rational(0));
}

TEST_CASE("loss: identity, Boolean flip quantum, direct L1") {
    LmtProblem p = build_toy_blocks_problem();
    Assignment a = default_toy_full(p, Rational(3, 4), Rational(1, 4), Rational(1, 2), Rational(0));
    CHECK(loss(p, a, a) == Rational(0));

    // toy blocks: O with (dx,dy)=(1/2,0), O' with (1/4,1/4)
    Assignment b = default_toy_full(p, Rational(3, 4), Rational(1, 4), Rational(1, 4), Rational(1, 4));
    CHECK(loss(p, a, b) == Rational(1, 2));

    // one Boolean indicator flipped contributes exactly 2
    FeatureVector fa{{Rational(1), Rational(5, 7)}, true};
    FeatureVector fb{{Rational(-1), Rational(5, 7)}, true};
    CHECK(loss(fa, fb) == Rational(2));
}

TEST_CASE("loss L1 properties over random assignment pairs") {
    LmtProblem p = build_toy_blocks_problem();
    std::mt19937 rng(8);
    std::uniform_int_distribution<long> num(0, 8);
    auto rnd = [&]() {
        Assignment a = default_toy_full(p, Rational(num(rng), 16), Rational(num(rng), 16),
                                        Rational(num(rng), 16), Rational(num(rng), 16));
        return extract_features(p, a);
    };
    for (int i = 0; i < 1000; ++i) {
        auto a = rnd(), b = rnd(), c = rnd();
        CHECK(loss(a, b) == loss(b, a));
        CHECK(loss(a, b) >= Rational(0));
        CHECK(loss(a, c) <= loss(a, b) + loss(b, c));
        CHECK(loss(a, a) == Rational(0));
    }
}

TEST_CASE("qp: empty working set gives zero weights") {
    auto sol = solve_qp({}, 3, 10.0, 1e-10);
    CHECK(sol.w == std::vector<double>{0, 0, 0});
    CHECK(sol.objective == 0.0);
}

TEST_CASE("qp: single row matches the hand KKT solution") {
    // minimize 1/2|w|^2 + 10 xi st w1 >= 2 - xi: optimum w=(2,0), xi=0
    std::vector<std::vector<QpRow>> blocks{{QpRow{{1.0, 0.0}, 2.0}}};
    auto sol = solve_qp(blocks, 2, 10.0, 1e-12);
    CHECK(sol.w[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(sol.w[1] == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(sol.xi[0] == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("qp agrees with a projected-gradient reference on random instances") {
    std::mt19937 rng(51);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::uniform_real_distribution<double> dl(0.0, 2.0);
    for (int iter = 0; iter < 12; ++iter) {
        size_t dim = 3;
        std::vector<std::vector<QpRow>> blocks(2);
        for (auto& b : blocks)
            for (int r = 0; r < 3; ++r) {
                QpRow row;
                for (size_t j = 0; j < dim; ++j) row.dpsi.push_back(val(rng));
                row.delta = dl(rng);
                b.push_back(row);
            }
        double cap = 5.0;
        auto sol = solve_qp(blocks, dim, cap, 1e-12);
        auto ref = pg_reference(blocks, dim, cap);
        CHECK(sol.objective == doctest::Approx(ref.objective).epsilon(1e-3));
    }
}

TEST_CASE("toy inference follows the weights") {
    LmtProblem p = build_toy_blocks_problem();
    Assignment input = toy_input(Rational(1, 4), Rational(1, 4), Rational(1, 2), Rational(1, 4));

    // both weights positive: a zero-area touching block
    p.weights = {1.0, 1.0};
    auto res = infer(p, input, {});
    REQUIRE(res.status == OmtStatus::Optimum);
    CHECK(res.model->rats[p.decls.rat_id("dx_2")] == Rational(0));
    CHECK(res.model->rats[p.decls.rat_id("dy_2")] == Rational(0));
    CHECK(p.hard_feasible(*res.model));

    // w1 >> |w2|, w2 negative: occupy as much vertical space as possible
    p.weights = {10.0, -1.0};
    res = infer(p, input, {});
    REQUIRE(res.status == OmtStatus::Optimum);
    CHECK(res.model->rats[p.decls.rat_id("dy_2")] > res.model->rats[p.decls.rat_id("dx_2")]);
    CHECK(res.model->rats[p.decls.rat_id("dx_2")] == Rational(0));
    CHECK(res.model->rats[p.decls.rat_id("dy_2")] == Rational(1));

    // sign convention: OMT objective equals -compatibility exactly
    CHECK(*res.objective == -compatibility(p, *res.model));
}

TEST_CASE("argmax is invariant to positive weight scaling") {
    LmtProblem p = build_toy_blocks_problem();
    Assignment input = toy_input(Rational(1, 4), Rational(1, 4), Rational(1, 2), Rational(1, 4));
    p.weights = {10.0, -1.0};
    auto a = infer(p, input, {});
    p.weights = {35.0, -3.5};
    auto b = infer(p, input, {});
    REQUIRE(a.status == OmtStatus::Optimum);
    REQUIRE(b.status == OmtStatus::Optimum);
    for (auto [is_bool, v] : p.outputs)
        CHECK(a.model->rats[v] == b.model->rats[v]);
}

TEST_CASE("separation: degenerate weights maximize the loss alone") {
    LmtProblem p = build_toy_blocks_problem();
    Assignment gold = default_toy_full(p, Rational(3, 4), Rational(1, 4), Rational(0), Rational(1, 4));
    std::vector<double> w0(p.softs.size(), 0.0);
    auto sep = separate(p, gold, w0, std::nullopt);
    REQUIRE(sep.status == OmtStatus::Optimum);
    // with w=0 the violation equals the loss and must be the max loss
    CHECK(sep.violation == sep.loss_value);
    CHECK(sep.violation >= Rational(0));
    // the candidate is hard-feasible
    CHECK(p.hard_feasible(*sep.candidate));
    // distance in feature space: max |dx| + |dy| differences from (0, 1/4):
    // the box allows dx up to 1/2 (touching constraints keep it beside the
    // input block) so the loss is at least 1
    CHECK(sep.loss_value >= Rational(1));
}

TEST_CASE("separation violation is never negative (self-candidate bound)") {
    LmtProblem p = build_toy_blocks_problem();
    Assignment gold = default_toy_full(p, Rational(3, 4), Rational(1, 4), Rational(0), Rational(1, 2));
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> wv(-2.0, 2.0);
    for (int it = 0; it < 5; ++it) {
        std::vector<double> w{wv(rng), wv(rng)};
        auto sep = separate(p, gold, w, std::nullopt);
        REQUIRE(sep.status == OmtStatus::Optimum);
        CHECK(sep.violation >= Rational(0));
    }
}

TEST_CASE("separation agrees with a grid brute force on a boolean-soft toy") {
    // toy problem variant with two Boolean softs: prefers-left, prefers-flat
    LmtProblem p = build_toy_blocks_problem();
    p.softs.clear();
    p.harden_groups.clear();
    {
        SoftConstraint s1;
        s1.name = "in-left-half";
        s1.is_bool = true;
        LinTerm reach = LinTerm::var(p.decls.rat_id("x_2")) + LinTerm::var(p.decls.rat_id("dx_2"));
        s1.formula = Formula::cmp(reach, "<=", LinTerm(Rational(1, 2)));
        p.softs.push_back(s1);
        SoftConstraint s2;
        s2.name = "flat";
        s2.is_bool = true;
        s2.formula = Formula::cmp(LinTerm::var(p.decls.rat_id("dy_2")), "<=",
                                  LinTerm::var(p.decls.rat_id("dx_2")));
        p.softs.push_back(s2);
    }
    Assignment gold = default_toy_full(p, Rational(3, 4), Rational(1, 4), Rational(1, 8), Rational(1, 4));
    std::vector<double> w{0.75, -0.5};

    auto sep = separate(p, gold, w, std::nullopt);
    REQUIRE(sep.status == OmtStatus::Optimum);

    // brute force over a 1/8 grid of output blocks
    Rational best(-1000);
    auto wr = exact_weights(w);
    for (int xi = 0; xi <= 8; ++xi)
        for (int yi = 0; yi <= 8; ++yi)
            for (int wi = 0; xi + wi <= 8; ++wi)
                for (int hi = 0; yi + hi <= 8; ++hi) {
                    Assignment cand = default_toy_full(p, Rational(xi, 8), Rational(yi, 8),
                                                       Rational(wi, 8), Rational(hi, 8));
                    if (!p.hard_feasible(cand)) continue;
                    auto f = extract_features(p, cand);
                    Rational value = loss(p, gold, cand) + dot(wr, f);
                    if (value > best) best = value;
                }
    Rational solver_value = sep.loss_value + dot(wr, sep.features);
    CHECK(solver_value >= best);  // grid is a subset of the feasible space
    // and the encoding evaluated at the solver's optimum matches its parts
    CHECK(solver_value == sep.violation + dot(wr, extract_features(p, gold)));
}

TEST_CASE("loss-augmented encoding matches enumeration on all-Boolean softs") {
    LmtProblem p = build_toy_blocks_problem();
    p.softs.clear();
    p.harden_groups.clear();
    const char* names[] = {"a", "b", "c"};
    std::vector<Rational> cuts{Rational(1, 4), Rational(1, 2), Rational(3, 4)};
    for (int k = 0; k < 3; ++k) {
        SoftConstraint s;
        s.name = names[k];
        s.is_bool = true;
        s.formula = Formula::cmp(LinTerm::var(p.decls.rat_id("x_2")), "<=", LinTerm(cuts[k]));
        p.softs.push_back(s);
    }
    Assignment gold = default_toy_full(p, Rational(3, 4), Rational(1, 4), Rational(0), Rational(1, 4));
    std::vector<double> w{0.25, -1.5, 0.5};
    auto wr = exact_weights(w);
    auto gold_psi = extract_features(p, gold);

    auto sep = separate(p, gold, w, std::nullopt);
    REQUIRE(sep.status == OmtStatus::Optimum);
    Rational got = sep.loss_value + dot(wr, sep.features);

    // enumerate the 2^3 indicator patterns by probing representative x_2
    // positions (patterns are monotone in x_2: cuts at 1/4,1/2,3/4)
    Rational best(-1000000);
    for (Rational x2 : {Rational(0), Rational(3, 8), Rational(5, 8), Rational(7, 8)}) {
        Assignment cand = default_toy_full(p, x2, Rational(1, 4), Rational(0), Rational(1, 4));
        if (!p.hard_feasible(cand)) continue;
        auto f = extract_features(p, cand);
        Rational v = loss(gold_psi, f) + dot(wr, f);
        if (v > best) best = v;
    }
    CHECK(got == best);
}

TEST_CASE("training terminates immediately when the gold output is optimal") {
    LmtProblem p = build_toy_blocks_problem();
    // gold: zero-size block touching the input; with w=0 separation maximizes
    // loss alone, so pick the gold to already be a loss-0 argmax: impossible
    // in general, so instead verify the no-violation exit with a converged
    // one-example run
    auto ex = std::make_shared<LmtProblem>(p);
    Assignment gold = default_toy_full(*ex, Rational(3, 4), Rational(1, 4), Rational(0), Rational(1));
    TrainConfig cfg;
    cfg.C = 10;
    cfg.epsilon = 0.01;
    auto res = train({{ex, gold}}, cfg);
    CHECK(res.converged);
    CHECK(res.weights.size() == 2);
    // QP objective history is non-decreasing (working set only grows)
    for (size_t i = 1; i < res.qp_objectives.size(); ++i)
        CHECK(res.qp_objectives[i] >= res.qp_objectives[i - 1] - 1e-9);
    // after convergence the epsilon certificate holds with exact separation
    CHECK(epsilon_certificate({{ex, gold}}, res.weights, res.xi, cfg.epsilon));
}

TEST_CASE("trained toy weights reproduce the preference") {
    // training outputs prefer tall thin blocks; learned weights should make
    // inference produce tall thin blocks
    auto ex = std::make_shared<LmtProblem>(build_toy_blocks_problem());
    std::vector<TrainExample> examples;
    examples.push_back({ex, default_toy_full(*ex, Rational(3, 4), Rational(0), Rational(0), Rational(1))});
    TrainConfig cfg;
    cfg.C = 100;
    cfg.epsilon = 0.001;
    auto res = train(examples, cfg);
    CHECK(res.converged);

    LmtProblem trained = *ex;
    trained.weights = res.weights;
    auto inf = infer(trained, toy_input(Rational(1, 4), Rational(1, 4), Rational(1, 2), Rational(1, 4)), {});
    REQUIRE(inf.status == OmtStatus::Optimum);
    CHECK(inf.model->rats[trained.decls.rat_id("dy_2")] >
          inf.model->rats[trained.decls.rat_id("dx_2")]);

    // determinism: the same run yields identical weights
    auto res2 = train(examples, cfg);
    CHECK(res2.weights == res.weights);

    // 1-slack reaches a model of the same quality
    TrainConfig cfg1 = cfg;
    cfg1.formulation = Formulation::OneSlack;
    auto res1 = train(examples, cfg1);
    CHECK(res1.converged);
    LmtProblem t1 = *ex;
    t1.weights = res1.weights;
    auto inf1 = infer(t1, toy_input(Rational(1, 4), Rational(1, 4), Rational(1, 2), Rational(1, 4)), {});
    REQUIRE(inf1.status == OmtStatus::Optimum);
    CHECK(inf1.model->rats[t1.decls.rat_id("dy_2")] > inf1.model->rats[t1.decls.rat_id("dx_2")]);
}
