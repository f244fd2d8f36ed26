#include "lmt/domains.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lmt/grounding.hpp"

namespace lmt::domains {

namespace {

LinTerm tv(VarId v) { return LinTerm::var(v); }
LinTerm tc(long c) { return LinTerm(Rational(c)); }

Formula between(const LinTerm& lo, const LinTerm& mid, const LinTerm& hi) {
    return Formula::conj({Formula::cmp(lo, "<=", mid), Formula::cmp(mid, "<=", hi)});
}

// declare a ground predicate: fresh boolean + defining iff + derived eval
VarId define_pred(LmtProblem& p, const std::string& name, const Formula& body) {
    VarId b = p.decls.add_bool(name);
    p.hard.push_back(Formula::iff(Formula::bvar(b), body));
    p.derived.push_back({true, b, [b, body](Assignment& a) { a.bools[b] = body.evaluate(a); }});
    return b;
}

}  // namespace

// ----------------------------------------------------------------- stairways

namespace {

struct BlockVars {
    VarId x, y, dx, dy;
};

struct StairEnv {
    std::vector<BlockVars> blk;  // blk[i-1] for block i

    LinTerm xv(int i) const { return tv(blk[i - 1].x); }
    LinTerm yv(int i) const { return tv(blk[i - 1].y); }
    LinTerm dxv(int i) const { return tv(blk[i - 1].dx); }
    LinTerm dyv(int i) const { return tv(blk[i - 1].dy); }
    LinTerm right(int i) const { return xv(i) + dxv(i); }
    LinTerm top(int i) const { return yv(i) + dyv(i); }
};

Formula corner_body(const StairEnv& e, const std::string& which, int i) {
    if (which == "bottom_left")
        return Formula::conj({Formula::cmp(e.xv(i), "=", tc(0)), Formula::cmp(e.yv(i), "=", tc(0))});
    if (which == "bottom_right")
        return Formula::conj({Formula::cmp(e.right(i), "=", tc(1)), Formula::cmp(e.yv(i), "=", tc(0))});
    if (which == "top_left")
        return Formula::conj({Formula::cmp(e.xv(i), "=", tc(0)), Formula::cmp(e.top(i), "=", tc(1))});
    return Formula::conj({Formula::cmp(e.right(i), "=", tc(1)), Formula::cmp(e.top(i), "=", tc(1))});
}

Formula y_overlap(const StairEnv& e, int i, int j) {
    return Formula::disj({between(e.yv(j), e.yv(i), e.top(j)), between(e.yv(j), e.top(i), e.top(j))});
}

Formula x_overlap(const StairEnv& e, int i, int j) {
    return Formula::disj({between(e.xv(j), e.xv(i), e.right(j)),
                          between(e.xv(j), e.right(i), e.right(j))});
}

Formula left_body(const StairEnv& e, int i, int j) {
    return Formula::conj({Formula::cmp(e.right(i), "=", e.xv(j)), y_overlap(e, i, j)});
}

Formula below_body(const StairEnv& e, int i, int j) {
    return Formula::conj({Formula::cmp(e.top(i), "=", e.yv(j)), x_overlap(e, i, j)});
}

Formula over_body(const StairEnv& e, int i, int j) {
    return Formula::conj({Formula::cmp(e.top(j), "=", e.yv(i)), x_overlap(e, i, j)});
}

Formula left_step_body(const StairEnv& e, int i, int j, Formula left_ij, Formula over_ij) {
    return Formula::disj({
        Formula::conj({std::move(left_ij), Formula::cmp(e.top(i), ">", e.top(j))}),
        Formula::conj({std::move(over_ij), Formula::cmp(e.right(i), "<", e.right(j))}),
    });
}

Formula right_step_body(const StairEnv& e, int i, int j, Formula left_ij, Formula below_ij) {
    return Formula::disj({
        Formula::conj({std::move(left_ij), Formula::cmp(e.top(i), "<", e.top(j))}),
        Formula::conj({std::move(below_ij), Formula::cmp(e.right(i), "<", e.right(j))}),
    });
}

StairEnv declare_blocks(LmtProblem& p, int m) {
    StairEnv e;
    for (int i = 1; i <= m; ++i) {
        BlockVars b;
        b.x = p.decls.add_rat("x_" + std::to_string(i));
        b.y = p.decls.add_rat("y_" + std::to_string(i));
        b.dx = p.decls.add_rat("dx_" + std::to_string(i));
        b.dy = p.decls.add_rat("dy_" + std::to_string(i));
        e.blk.push_back(b);
        for (VarId v : {b.x, b.y, b.dx, b.dy}) p.outputs.push_back({false, v});
    }
    return e;
}

void block_box_rules(LmtProblem& p, const StairEnv& e, int i) {
    for (const LinTerm& t : {e.xv(i), e.yv(i), e.dxv(i), e.dyv(i), e.right(i), e.top(i)})
        p.hard.push_back(between(tc(0), t, tc(1)));
}

Formula no_overlap(const StairEnv& e, int i, int j) {
    return Formula::disj({
        Formula::cmp(e.right(i), "<=", e.xv(j)),
        Formula::cmp(e.right(j), "<=", e.xv(i)),
        Formula::cmp(e.top(i), "<=", e.yv(j)),
        Formula::cmp(e.top(j), "<=", e.yv(i)),
    });
}

// case variable: guard ? expr : other, exact in both directions
VarId define_case(LmtProblem& p, const std::string& name, VarId guard, const LinTerm& expr,
                  const Rational& other) {
    VarId v = p.decls.add_rat(name);
    Formula g = Formula::bvar(guard);
    p.hard.push_back(Formula::implies(g, Formula::cmp(tv(v), "=", expr)));
    p.hard.push_back(
        Formula::implies(Formula::negate(g), Formula::cmp(tv(v), "=", LinTerm(other))));
    p.derived.push_back({false, v, [v, guard, expr, other](Assignment& a) {
                             a.rats[v] = a.bools[guard] ? evaluate_term(expr, a) : other;
                         }});
    return v;
}

// extremum variable over the given case variables
VarId define_extremum(LmtProblem& p, const std::string& name, const std::vector<VarId>& cases,
                      bool is_max) {
    VarId v = p.decls.add_rat(name);
    std::vector<Formula> any;
    for (VarId c : cases) {
        p.hard.push_back(Formula::cmp(tv(v), is_max ? ">=" : "<=", tv(c)));
        any.push_back(Formula::cmp(tv(v), "=", tv(c)));
    }
    p.hard.push_back(Formula::disj(std::move(any)));
    p.derived.push_back({false, v, [v, cases, is_max](Assignment& a) {
                             Rational best = a.rats[cases[0]];
                             for (VarId c : cases) {
                                 const Rational& x = a.rats[c];
                                 if (is_max ? x > best : x < best) best = x;
                             }
                             a.rats[v] = best;
                         }});
    return v;
}

}  // namespace

const char* stair_type_name(StairType t) {
    switch (t) {
        case StairType::LeftLadder: return "left-ladder";
        case StairType::RightLadder: return "right-ladder";
        case StairType::LeftPillarH: return "left-pillar-h";
        case StairType::RightPillarH: return "right-pillar-h";
        case StairType::LeftPillarV: return "left-pillar-v";
        case StairType::RightPillarV: return "right-pillar-v";
    }
    return "?";
}

StairType stair_type_from_name(const std::string& name) {
    for (StairType t : {StairType::LeftLadder, StairType::RightLadder, StairType::LeftPillarH,
                        StairType::RightPillarH, StairType::LeftPillarV, StairType::RightPillarV})
        if (name == stair_type_name(t)) return t;
    throw std::invalid_argument("unknown stairway type: " + name);
}

bool stair_type_is_left(StairType t) {
    return t == StairType::LeftLadder || t == StairType::LeftPillarH || t == StairType::LeftPillarV;
}

LmtProblem build_stairway_problem(int m) {
    if (m < 2) throw std::invalid_argument("stairway problems need at least two blocks");
    LmtProblem p;
    StairEnv e = declare_blocks(p, m);

    for (int i = 1; i <= m; ++i) block_box_rules(p, e, i);
    for (int i = 1; i <= m; ++i)
        for (int j = i + 1; j <= m; ++j) p.hard.push_back(no_overlap(e, i, j));
    for (int i = 1; i < m; ++i) p.hard.push_back(Formula::cmp(e.xv(i), "<=", e.xv(i + 1)));

    // ground background predicates (Table-style definitions)
    std::vector<IndexRange> one{{"i", 1, m}};
    std::vector<IndexRange> pairs{{"i", 1, m}, {"j", 1, m}};
    auto consecutive = [](const std::vector<int>& ix) { return ix[1] == ix[0] + 1; };

    for (const char* corner : {"bottom_left", "bottom_right", "top_left", "top_right"}) {
        PredicateTemplate tpl{corner, {"i"}, [&e, corner](const std::vector<int>& ix) {
                                  return corner_body(e, corner, ix[0]);
                              }};
        for (auto& [name, body] : ground_template(tpl, one)) define_pred(p, name, body);
    }

    std::vector<VarId> left_ij, below_ij, over_ij, lstep, rstep;
    {
        PredicateTemplate tpl{"left", {"i", "j"}, [&e](const std::vector<int>& ix) {
                                  return left_body(e, ix[0], ix[1]);
                              }};
        for (auto& [name, body] : ground_template(tpl, pairs, consecutive))
            left_ij.push_back(define_pred(p, name, body));
    }
    {
        PredicateTemplate tpl{"below", {"i", "j"}, [&e](const std::vector<int>& ix) {
                                  return below_body(e, ix[0], ix[1]);
                              }};
        for (auto& [name, body] : ground_template(tpl, pairs, consecutive))
            below_ij.push_back(define_pred(p, name, body));
    }
    {
        PredicateTemplate tpl{"over", {"i", "j"}, [&e](const std::vector<int>& ix) {
                                  return over_body(e, ix[0], ix[1]);
                              }};
        for (auto& [name, body] : ground_template(tpl, pairs, consecutive))
            over_ij.push_back(define_pred(p, name, body));
    }
    {
        PredicateTemplate tpl{"left_step", {"i", "j"}, [&](const std::vector<int>& ix) {
                                  int i = ix[0];
                                  return left_step_body(e, i, i + 1, Formula::bvar(left_ij[i - 1]),
                                                        Formula::bvar(over_ij[i - 1]));
                              }};
        for (auto& [name, body] : ground_template(tpl, pairs, consecutive))
            lstep.push_back(define_pred(p, name, body));
    }
    {
        PredicateTemplate tpl{"right_step", {"i", "j"}, [&](const std::vector<int>& ix) {
                                  int i = ix[0];
                                  return right_step_body(e, i, i + 1, Formula::bvar(left_ij[i - 1]),
                                                         Formula::bvar(below_ij[i - 1]));
                              }};
        for (auto& [name, body] : ground_template(tpl, pairs, consecutive))
            rstep.push_back(define_pred(p, name, body));
    }

    // per-pair case values for the step-size features; non-steps take the
    // worst case: 1 for max features, 0 for min features
    std::vector<VarId> shl_max, shl_min, shr_max, shr_min, swl_max, swl_min, swr_max, swr_min;
    for (int i = 1; i < m; ++i) {
        LinTerm drop = e.top(i) - e.top(i + 1);
        LinTerm rise = e.top(i + 1) - e.top(i);
        LinTerm wstep = e.right(i + 1) - e.right(i);
        std::string s = std::to_string(i);
        shl_max.push_back(define_case(p, "shl_hi_" + s, lstep[i - 1], drop, Rational(1)));
        shl_min.push_back(define_case(p, "shl_lo_" + s, lstep[i - 1], drop, Rational(0)));
        shr_max.push_back(define_case(p, "shr_hi_" + s, rstep[i - 1], rise, Rational(1)));
        shr_min.push_back(define_case(p, "shr_lo_" + s, rstep[i - 1], rise, Rational(0)));
        swl_max.push_back(define_case(p, "swl_hi_" + s, lstep[i - 1], wstep, Rational(1)));
        swl_min.push_back(define_case(p, "swl_lo_" + s, lstep[i - 1], wstep, Rational(0)));
        swr_max.push_back(define_case(p, "swr_hi_" + s, rstep[i - 1], wstep, Rational(1)));
        swr_min.push_back(define_case(p, "swr_lo_" + s, rstep[i - 1], wstep, Rational(0)));
    }

    struct Feat {
        const char* name;
        std::vector<VarId>* cases;
        bool is_max;
    };
    Feat feats[] = {
        {"maxshl", &shl_max, true}, {"minshl", &shl_min, false},
        {"maxshr", &shr_max, true}, {"minshr", &shr_min, false},
        {"maxswl", &swl_max, true}, {"minswl", &swl_min, false},
        {"maxswr", &swr_max, true}, {"minswr", &swr_min, false},
    };
    for (const Feat& f : feats) {
        VarId ex = define_extremum(p, std::string(f.name) + "!raw", *f.cases, f.is_max);
        SoftConstraint sc;
        sc.name = f.name;
        sc.is_bool = false;
        sc.cost = LinTerm::var(ex, Rational(m));
        p.softs.push_back(std::move(sc));
    }
    {
        SoftConstraint vmat, hmat;
        vmat.name = "vmat";
        vmat.is_bool = false;
        hmat.name = "hmat";
        hmat.is_bool = false;
        for (int i = 1; i <= m; ++i) {
            vmat.cost.add(e.blk[i - 1].dy, Rational(1, m));
            hmat.cost.add(e.blk[i - 1].dx, Rational(1, m));
        }
        p.softs.push_back(std::move(vmat));
        p.softs.push_back(std::move(hmat));
    }
    return p;
}

std::vector<Rational> stairway_blocks(const LmtProblem& p, const Assignment& a) {
    std::vector<Rational> out;
    for (auto [is_bool, v] : p.outputs)
        if (!is_bool) out.push_back(a.rats.at(v));
    return out;
}

bool stairway_checker(const std::vector<Rational>& blocks, int m, bool left) {
    if (static_cast<int>(blocks.size()) != 4 * m)
        throw std::invalid_argument("checker needs 4m block values");
    LmtProblem scratch;  // local variable space for the withheld formula
    StairEnv e = declare_blocks(scratch, m);
    Assignment a = Assignment::zeros(scratch.decls);
    a.rats = blocks;

    std::vector<Formula> cs;
    cs.push_back(corner_body(e, left ? "top_left" : "bottom_left", 1));
    for (int i = 1; i < m; ++i) {
        if (left)
            cs.push_back(left_step_body(e, i, i + 1, left_body(e, i, i + 1), over_body(e, i, i + 1)));
        else
            cs.push_back(
                right_step_body(e, i, i + 1, left_body(e, i, i + 1), below_body(e, i, i + 1)));
    }
    cs.push_back(corner_body(e, left ? "bottom_right" : "top_right", m));
    return Formula::conj(std::move(cs)).evaluate(a);
}

Assignment generate_perfect_stairway(const LmtProblem& p, StairType type, int m) {
    Assignment a = Assignment::zeros(p.decls);
    auto set_block = [&](int i, Rational x, Rational y, Rational dx, Rational dy) {
        a.rats[p.decls.rat_id("x_" + std::to_string(i))] = std::move(x);
        a.rats[p.decls.rat_id("y_" + std::to_string(i))] = std::move(y);
        a.rats[p.decls.rat_id("dx_" + std::to_string(i))] = std::move(dx);
        a.rats[p.decls.rat_id("dy_" + std::to_string(i))] = std::move(dy);
    };
    for (int i = 1; i <= m; ++i) {
        Rational im1(i - 1, m), inv(1, m);
        switch (type) {
            case StairType::LeftLadder:
                set_block(i, im1, Rational(m - i, m), inv, inv);
                break;
            case StairType::RightLadder:
                set_block(i, im1, im1, inv, inv);
                break;
            case StairType::LeftPillarV:
                set_block(i, im1, Rational(0), inv, Rational(m - i + 1, m));
                break;
            case StairType::RightPillarV:
                set_block(i, im1, Rational(0), inv, Rational(i, m));
                break;
            case StairType::LeftPillarH:
                set_block(i, Rational(0), Rational(m - i, m), Rational(i, m), inv);
                break;
            case StairType::RightPillarH:
                set_block(i, Rational(0), im1, Rational(i, m), inv);
                break;
        }
    }
    p.complete(a);
    return a;
}

// ---------------------------------------------------------------- toy blocks

LmtProblem build_toy_blocks_problem() {
    LmtProblem p;
    StairEnv e = declare_blocks(p, 2);
    p.outputs.clear();
    for (VarId v : {e.blk[0].x, e.blk[0].y, e.blk[0].dx, e.blk[0].dy}) p.inputs.push_back({false, v});
    for (VarId v : {e.blk[1].x, e.blk[1].y, e.blk[1].dx, e.blk[1].dy})
        p.outputs.push_back({false, v});

    block_box_rules(p, e, 1);
    block_box_rules(p, e, 2);

    // touching relations between the fixed block and the generated one
    VarId l = define_pred(p, "left(1,2)", left_body(e, 1, 2));
    VarId r = define_pred(p, "right(1,2)",
                          Formula::conj({Formula::cmp(e.right(2), "=", e.xv(1)), y_overlap(e, 1, 2)}));
    VarId b = define_pred(p, "below(1,2)", below_body(e, 1, 2));
    VarId o = define_pred(p, "over(1,2)", over_body(e, 1, 2));
    p.hard.push_back(Formula::disj(
        {Formula::bvar(l), Formula::bvar(r), Formula::bvar(b), Formula::bvar(o)}));

    SoftConstraint width, height;
    width.name = "width";
    width.is_bool = false;
    width.cost = tv(e.blk[1].dx);
    height.name = "height";
    height.is_bool = false;
    height.cost = tv(e.blk[1].dy);
    p.softs.push_back(std::move(width));
    p.softs.push_back(std::move(height));
    return p;
}

Assignment toy_input(const Rational& x1, const Rational& y1, const Rational& dx1,
                     const Rational& dy1) {
    Assignment a;
    a.rats = {x1, y1, dx1, dy1};
    return a;
}

// ---------------------------------------------------------------- characters

namespace {

struct SegVars {
    VarId xb, yb, xe, ye;
};

struct CharEnv {
    std::vector<SegVars> seg;  // seg[i-1]

    LinTerm xb(int i) const { return tv(seg[i - 1].xb); }
    LinTerm yb(int i) const { return tv(seg[i - 1].yb); }
    LinTerm xe(int i) const { return tv(seg[i - 1].xe); }
    LinTerm ye(int i) const { return tv(seg[i - 1].ye); }
};

struct CharPreds {
    // per segment, 1-based
    std::vector<VarId> horizontal, vertical, diagonal, increasing, decreasing, rightward;
    std::vector<VarId> incr_vert, decr_vert, incr_diag, decr_diag;
};

}  // namespace

LmtProblem build_character_problem(const PixelImage& img, int m, const CharOptions& opts) {
    if (m < 1) throw std::invalid_argument("character problems need at least one segment");
    if (img.empty()) throw std::invalid_argument("character image has no on-pixels");

    LmtProblem p;
    CharEnv e;
    for (int i = 1; i <= m; ++i) {
        SegVars s;
        std::string n = std::to_string(i);
        s.xb = p.decls.add_rat("xb_" + n);
        s.yb = p.decls.add_rat("yb_" + n);
        s.xe = p.decls.add_rat("xe_" + n);
        s.ye = p.decls.add_rat("ye_" + n);
        e.seg.push_back(s);
        for (VarId v : {s.xb, s.yb, s.xe, s.ye}) p.outputs.push_back({false, v});
    }

    Rational min_len = opts.min_length
                           ? *opts.min_length
                           : Rational(1, std::max(img.width, img.height));
    // rational stand-in for 1/sqrt(2) in the diagonal length bounds
    const Rational diag_scale(12, 17);

    for (int i = 1; i <= m; ++i) {
        for (const LinTerm& t : {e.xb(i), e.yb(i), e.xe(i), e.ye(i)})
            p.hard.push_back(between(tc(0), t, tc(1)));
        p.hard.push_back(Formula::cmp(e.xb(i), "<=", e.xe(i)));
    }

    CharPreds pr;
    for (int i = 1; i <= m; ++i) {
        std::string n = "(" + std::to_string(i) + ")";
        LinTerm run = e.xe(i) - e.xb(i);
        LinTerm riseb = e.ye(i) - e.yb(i);
        pr.horizontal.push_back(define_pred(
            p, "horizontal" + n,
            Formula::conj({Formula::cmp(run, "!=", tc(0)), Formula::cmp(riseb, "=", tc(0))})));
        pr.vertical.push_back(define_pred(
            p, "vertical" + n,
            Formula::conj({Formula::cmp(run, "=", tc(0)), Formula::cmp(riseb, "!=", tc(0))})));
        pr.diagonal.push_back(define_pred(
            p, "diagonal" + n,
            Formula::disj({Formula::cmp(run, "=", riseb), Formula::cmp(run, "=", -riseb)})));
        pr.increasing.push_back(define_pred(p, "increasing" + n, Formula::cmp(riseb, ">", tc(0))));
        pr.decreasing.push_back(define_pred(p, "decreasing" + n, Formula::cmp(riseb, "<", tc(0))));
        pr.rightward.push_back(define_pred(p, "right" + n, Formula::cmp(run, ">", tc(0))));
        int k = i - 1;
        pr.incr_vert.push_back(define_pred(
            p, "incr_vert" + n,
            Formula::conj({Formula::bvar(pr.increasing[k]), Formula::bvar(pr.vertical[k])})));
        pr.decr_vert.push_back(define_pred(
            p, "decr_vert" + n,
            Formula::conj({Formula::bvar(pr.decreasing[k]), Formula::bvar(pr.vertical[k])})));
        pr.incr_diag.push_back(define_pred(
            p, "incr_diag" + n,
            Formula::conj({Formula::bvar(pr.increasing[k]), Formula::bvar(pr.diagonal[k])})));
        pr.decr_diag.push_back(define_pred(
            p, "decr_diag" + n,
            Formula::conj({Formula::bvar(pr.decreasing[k]), Formula::bvar(pr.diagonal[k])})));

        // allowed orientations and per-orientation length bounds
        p.hard.push_back(Formula::disj({Formula::bvar(pr.horizontal[k]),
                                        Formula::bvar(pr.vertical[k]),
                                        Formula::bvar(pr.diagonal[k])}));
        auto lenrule = [&](VarId guard, const LinTerm& len, const Rational& lo, const Rational& hi) {
            p.hard.push_back(Formula::implies(
                Formula::bvar(guard),
                Formula::conj({Formula::cmp(LinTerm(lo), "<=", len),
                               Formula::cmp(len, "<=", LinTerm(hi))})));
        };
        lenrule(pr.horizontal[k], run, min_len, Rational(1));
        lenrule(pr.incr_vert[k], riseb, min_len, Rational(1));
        lenrule(pr.decr_vert[k], -riseb, min_len, Rational(1));
        lenrule(pr.incr_diag[k], riseb, min_len * diag_scale, diag_scale);
        lenrule(pr.decr_diag[k], -riseb, min_len * diag_scale, diag_scale);
    }

    // connections
    auto conn_body = [&](const char* kind, int i, int j) {
        LinTerm xi_h = e.xe(i), yi_h = e.ye(i), xi_t = e.xb(i), yi_t = e.yb(i);
        LinTerm xj_h = e.xe(j), yj_h = e.ye(j), xj_t = e.xb(j), yj_t = e.yb(j);
        if (std::string(kind) == "h2t")
            return Formula::conj({Formula::cmp(xi_h, "=", xj_t), Formula::cmp(yi_h, "=", yj_t)});
        if (std::string(kind) == "t2h")
            return Formula::conj({Formula::cmp(xi_t, "=", xj_h), Formula::cmp(yi_t, "=", yj_h)});
        if (std::string(kind) == "h2h")
            return Formula::conj({Formula::cmp(xi_h, "=", xj_h), Formula::cmp(yi_h, "=", yj_h)});
        return Formula::conj({Formula::cmp(xi_t, "=", xj_t), Formula::cmp(yi_t, "=", yj_t)});
    };

    std::vector<std::pair<int, int>> feat_pairs;
    for (int i = 1; i <= m; ++i)
        for (int j = i + 1; j <= m; ++j)
            if (opts.all_pairs || j == i + 1) feat_pairs.push_back({i, j});

    std::map<std::pair<int, int>, std::array<VarId, 4>> conn;
    for (auto [i, j] : feat_pairs) {
        std::array<VarId, 4> ids{};
        const char* kinds[] = {"h2t", "t2h", "h2h", "t2t"};
        for (int k = 0; k < 4; ++k)
            ids[k] = define_pred(p, ground_name(kinds[k], {i, j}), conn_body(kinds[k], i, j));
        conn[{i, j}] = ids;
        define_pred(p, ground_name("connected", {i, j}),
                    Formula::disj({Formula::bvar(ids[0]), Formula::bvar(ids[1]),
                                   Formula::bvar(ids[2]), Formula::bvar(ids[3])}));
    }
    for (int i = 1; i < m; ++i)
        p.hard.push_back(Formula::bvar(p.decls.bool_id(ground_name("connected", {i, i + 1}))));

    // pixel coverage
    std::vector<VarId> cps;
    for (auto [c, r] : img.on) {
        auto [px, py] = pixel_center(img, c, r);
        std::vector<Formula> any_seg;
        for (int i = 1; i <= m; ++i) {
            int k = i - 1;
            std::vector<Formula> cases;
            cases.push_back(Formula::conj({Formula::bvar(pr.incr_vert[k]),
                                           between(e.yb(i), LinTerm(py), e.ye(i)),
                                           Formula::cmp(e.xb(i), "=", LinTerm(px))}));
            cases.push_back(Formula::conj({Formula::bvar(pr.decr_vert[k]),
                                           between(e.ye(i), LinTerm(py), e.yb(i)),
                                           Formula::cmp(e.xb(i), "=", LinTerm(px))}));
            cases.push_back(Formula::conj({Formula::bvar(pr.horizontal[k]),
                                           between(e.xb(i), LinTerm(px), e.xe(i)),
                                           Formula::cmp(e.yb(i), "=", LinTerm(py))}));
            cases.push_back(Formula::conj({Formula::bvar(pr.incr_diag[k]),
                                           between(e.yb(i), LinTerm(py), e.ye(i)),
                                           between(e.xb(i), LinTerm(px), e.xe(i)),
                                           Formula::cmp(e.xb(i) - e.yb(i), "=", LinTerm(px - py))}));
            cases.push_back(Formula::conj({Formula::bvar(pr.decr_diag[k]),
                                           between(e.ye(i), LinTerm(py), e.yb(i)),
                                           between(e.xb(i), LinTerm(px), e.xe(i)),
                                           Formula::cmp(e.xb(i) + e.yb(i), "=", LinTerm(px + py))}));
            VarId cov_pi =
                define_pred(p, ground_name("covered", {c, r, i}), Formula::disj(std::move(cases)));
            any_seg.push_back(Formula::bvar(cov_pi));
        }
        VarId cov_p = define_pred(p, ground_name("covered", {c, r}), Formula::disj(std::move(any_seg)));
        VarId cp = p.decls.add_rat(ground_name("cov", {c, r}));
        p.hard.push_back(Formula::implies(Formula::bvar(cov_p),
                                          Formula::cmp(tv(cp), "=", tc(1))));
        p.hard.push_back(Formula::implies(Formula::negate(Formula::bvar(cov_p)),
                                          Formula::cmp(tv(cp), "=", tc(0))));
        p.derived.push_back({false, cp, [cp, cov_p](Assignment& a) {
                                 a.rats[cp] = a.bools[cov_p] ? Rational(1) : Rational(0);
                             }});
        cps.push_back(cp);
    }

    // soft constraints: per-segment directions, per-pair connections, coverage
    auto bool_soft = [&](const std::string& name, VarId v) {
        SoftConstraint s;
        s.name = name;
        s.is_bool = true;
        s.formula = Formula::bvar(v);
        p.softs.push_back(std::move(s));
    };
    for (int i = 1; i <= m; ++i) {
        std::vector<size_t> group;
        group.push_back(p.softs.size());
        bool_soft(ground_name("increasing", {i}), pr.increasing[i - 1]);
        group.push_back(p.softs.size());
        bool_soft(ground_name("decreasing", {i}), pr.decreasing[i - 1]);
        group.push_back(p.softs.size());
        bool_soft(ground_name("right", {i}), pr.rightward[i - 1]);
        p.harden_groups.push_back(std::move(group));
    }
    for (auto [i, j] : feat_pairs) {
        std::vector<size_t> group;
        const char* kinds[] = {"h2t", "t2h", "h2h", "t2t"};
        for (int k = 0; k < 4; ++k) {
            group.push_back(p.softs.size());
            bool_soft(ground_name(kinds[k], {i, j}), conn.at({i, j})[k]);
        }
        p.harden_groups.push_back(std::move(group));
    }
    {
        SoftConstraint cover;
        cover.name = "coverage";
        cover.is_bool = false;
        Rational inv(-1, static_cast<long>(cps.size()));
        for (VarId cp : cps) cover.cost.add(cp, inv);  // cost = -coverage
        p.softs.push_back(std::move(cover));
    }
    return p;
}

std::vector<Segment> segments_of(const LmtProblem& p, const Assignment& a) {
    std::vector<Segment> out;
    for (int i = 1;; ++i) {
        VarId xb = p.decls.find_rat("xb_" + std::to_string(i));
        if (xb < 0) break;
        Segment s;
        s.xb = a.rats.at(xb);
        s.yb = a.rats.at(p.decls.rat_id("yb_" + std::to_string(i)));
        s.xe = a.rats.at(p.decls.rat_id("xe_" + std::to_string(i)));
        s.ye = a.rats.at(p.decls.rat_id("ye_" + std::to_string(i)));
        out.push_back(std::move(s));
    }
    return out;
}

Assignment assignment_of_segments(const LmtProblem& p, const std::vector<Segment>& segs) {
    Assignment a = Assignment::zeros(p.decls);
    for (size_t i = 0; i < segs.size(); ++i) {
        std::string n = std::to_string(i + 1);
        a.rats[p.decls.rat_id("xb_" + n)] = segs[i].xb;
        a.rats[p.decls.rat_id("yb_" + n)] = segs[i].yb;
        a.rats[p.decls.rat_id("xe_" + n)] = segs[i].xe;
        a.rats[p.decls.rat_id("ye_" + n)] = segs[i].ye;
    }
    p.complete(a);
    return a;
}

double distance_to_gold(const std::vector<Segment>& pred, const std::vector<Segment>& gold) {
    if (pred.size() != gold.size()) throw std::invalid_argument("segment count mismatch");
    const size_t n = pred.size();
    double tx = 0, ty = 0;
    auto dx = [](const Rational& a, const Rational& b) { return (a - b).to_double(); };
    for (size_t i = 0; i < n; ++i) {
        tx += dx(gold[i].xb, pred[i].xb) + dx(gold[i].xe, pred[i].xe);
        ty += dx(gold[i].yb, pred[i].yb) + dx(gold[i].ye, pred[i].ye);
    }
    tx /= 2.0 * n;
    ty /= 2.0 * n;
    double total = 0;
    for (size_t i = 0; i < n; ++i) {
        double bx = dx(pred[i].xb, gold[i].xb) + tx, by = dx(pred[i].yb, gold[i].yb) + ty;
        double ex = dx(pred[i].xe, gold[i].xe) + tx, ey = dx(pred[i].ye, gold[i].ye) + ty;
        total += std::sqrt(bx * bx + by * by) + std::sqrt(ex * ex + ey * ey);
    }
    return total;
}

CharTemplate parse_template_text(const std::string& text) {
    // line format: "segments N" then "require <pred> <i> [<j>]"
    CharTemplate t;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word) || word[0] == '#') continue;
        if (word == "segments") {
            if (!(ls >> t.segments)) throw std::invalid_argument("bad segments line: " + line);
        } else if (word == "require") {
            std::string pred;
            if (!(ls >> pred)) throw std::invalid_argument("bad require line: " + line);
            std::vector<int> ix;
            int v;
            while (ls >> v) ix.push_back(v);
            t.requirements.push_back({pred, std::move(ix)});
        } else {
            throw std::invalid_argument("bad template directive: " + word);
        }
    }
    if (t.segments < 1) throw std::invalid_argument("template missing segment count");
    return t;
}

std::string template_text(const CharTemplate& t) {
    std::ostringstream os;
    os << "segments " << t.segments << "\n";
    for (const auto& [pred, ix] : t.requirements) {
        os << "require " << pred;
        for (int v : ix) os << " " << v;
        os << "\n";
    }
    return os.str();
}

Formula template_conjunction(const LmtProblem& p, const CharTemplate& t) {
    std::vector<Formula> cs;
    for (const auto& [pred, ix] : t.requirements) {
        std::string name = ground_name(pred, ix);
        VarId v = p.decls.find_bool(name);
        if (v < 0) throw std::invalid_argument("template references unknown predicate " + name);
        cs.push_back(Formula::bvar(v));
    }
    return Formula::conj(std::move(cs));
}

InferResult fit_template(const PixelImage& img, const CharTemplate& t,
                         std::optional<std::chrono::milliseconds> budget, uint64_t seed,
                         const CharOptions& opts) {
    CharOptions o = opts;
    for (const auto& [pred, ix] : t.requirements)
        if (ix.size() == 2 && ix[1] != ix[0] + 1) o.all_pairs = true;
    LmtProblem p = build_character_problem(img, t.segments, o);
    p.hard.push_back(template_conjunction(p, t));
    p.weights.assign(p.softs.size(), 0.0);
    p.weights.back() = 1.0;  // coverage only
    InferOptions io;
    io.budget = budget;
    io.seed = seed;
    Assignment empty;
    return infer(p, empty, io);
}

// -------------------------------------------------------------------- output

namespace {

double svg_x(const Rational& x) { return x.to_double() * 480.0; }
double svg_y(const Rational& y) { return (1.0 - y.to_double()) * 480.0; }

const char* kPalette[] = {"#d64541", "#2e8b57", "#2457a8", "#c7790d",
                          "#7b3fa0", "#1098a0", "#a0346c", "#5b6710",
                          "#444444"};

void svg_open(std::ostringstream& os) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" "
          "viewBox=\"0 0 480 480\">\n"
       << "<rect x=\"0\" y=\"0\" width=\"480\" height=\"480\" fill=\"#fbfbf8\" "
          "stroke=\"#999\"/>\n";
}

void svg_close(std::ostringstream& os, bool feasible) {
    if (!feasible)
        os << "<text x=\"240\" y=\"240\" font-size=\"40\" fill=\"#c0392b\" opacity=\"0.6\" "
              "text-anchor=\"middle\" transform=\"rotate(-30 240 240)\">INFEASIBLE</text>\n";
    os << "</svg>\n";
}

}  // namespace

std::string render_stairway_svg(const LmtProblem& p, const Assignment& a) {
    if (a.rats.empty()) throw std::invalid_argument("cannot render an empty assignment");
    std::vector<Rational> blocks = stairway_blocks(p, a);
    std::ostringstream os;
    svg_open(os);
    for (size_t i = 0; i + 3 < blocks.size(); i += 4) {
        double x = svg_x(blocks[i]);
        double w = blocks[i + 2].to_double() * 480.0;
        double h = blocks[i + 3].to_double() * 480.0;
        double y = svg_y(blocks[i + 1] + blocks[i + 3]);
        os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << h
           << "\" fill=\"#7da7d9\" fill-opacity=\"0.8\" stroke=\"#1c3d5a\"/>\n";
    }
    svg_close(os, p.hard_feasible(a));
    return os.str();
}

std::string render_character_svg(const LmtProblem& p, const Assignment& a, const PixelImage* img) {
    if (a.rats.empty()) throw std::invalid_argument("cannot render an empty assignment");
    std::ostringstream os;
    svg_open(os);
    if (img) {
        double pw = 480.0 / img->width, ph = 480.0 / img->height;
        for (auto [c, r] : img->on)
            os << "<rect x=\"" << c * pw << "\" y=\"" << r * ph << "\" width=\"" << pw
               << "\" height=\"" << ph << "\" fill=\"#cfcfcf\"/>\n";
    }
    auto segs = segments_of(p, a);
    for (size_t i = 0; i < segs.size(); ++i) {
        const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
        os << "<line x1=\"" << svg_x(segs[i].xb) << "\" y1=\"" << svg_y(segs[i].yb) << "\" x2=\""
           << svg_x(segs[i].xe) << "\" y2=\"" << svg_y(segs[i].ye) << "\" stroke=\"" << color
           << "\" stroke-width=\"5\" stroke-linecap=\"round\"/>\n";
    }
    svg_close(os, p.hard_feasible(a));
    return os.str();
}

}  // namespace lmt::domains
