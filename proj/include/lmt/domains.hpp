#pragma once

#include "lmt/charimg.hpp"
#include "lmt/learning.hpp"

namespace lmt::domains {

using lmt::Assignment;
using lmt::LmtProblem;
using lmt::PixelImage;
using lmt::Rational;
using lmt::Segment;

// ---------------------------------------------------------------- toy blocks

// One fixed block (input) and one generated block (output) that must touch
// it inside the unit box. Two arithmetic soft constraints: width and height
// of the output block, so psi = (-dx2, -dy2).
LmtProblem build_toy_blocks_problem();

// Input half of an assignment for the toy problem.
Assignment toy_input(const Rational& x1, const Rational& y1, const Rational& dx1,
                     const Rational& dy1);

// ----------------------------------------------------------------- stairways

enum class StairType {
    LeftLadder,
    RightLadder,
    LeftPillarH,
    RightPillarH,
    LeftPillarV,
    RightPillarV,
};

const char* stair_type_name(StairType t);
StairType stair_type_from_name(const std::string& name);
bool stair_type_is_left(StairType t);

// m blocks in the unit box; hard rules: bounding box, pairwise no-overlap,
// left-to-right order. Ten arithmetic soft constraints: max/min step height
// and width per orientation (m-normalized, with worst-case values on
// non-step pairs) plus average vertical/horizontal material.
LmtProblem build_stairway_problem(int m);

// Block fields of an assignment, in x1,y1,dx1,dy1,x2,... order.
std::vector<Rational> stairway_blocks(const LmtProblem& p, const Assignment& a);

// The withheld stairway definition, evaluated on block coordinates only.
// Used for evaluation; never part of a learned problem.
bool stairway_checker(const std::vector<Rational>& blocks, int m, bool left);

// Canonical perfect stairway, hard-feasible and checker-valid for its own
// orientation.
Assignment generate_perfect_stairway(const LmtProblem& p, StairType type, int m);

// ---------------------------------------------------------------- characters

struct CharOptions {
    std::optional<Rational> min_length;  // default: one pixel
    bool all_pairs = false;              // connection features for all i<j
};

// m directed segments over the image's unit box. Hard rules: left-to-right,
// orientation restriction, consecutive connectivity, length bounds. Soft:
// per-segment direction indicators, per-pair connection indicators, pixel
// coverage.
LmtProblem build_character_problem(const PixelImage& img, int m,
                                   const CharOptions& opts = {});

std::vector<Segment> segments_of(const LmtProblem& p, const Assignment& a);
Assignment assignment_of_segments(const LmtProblem& p, const std::vector<Segment>& segs);

// Sum of endpoint distances after the L2-optimal translation of the
// prediction onto the gold standard.
double distance_to_gold(const std::vector<Segment>& pred, const std::vector<Segment>& gold);

// Letter template: required per-segment / per-pair predicates, as in a
// "looking like an A" rule.
struct CharTemplate {
    int segments = 0;
    std::vector<std::pair<std::string, std::vector<int>>> requirements;
};

CharTemplate parse_template_text(const std::string& text);
std::string template_text(const CharTemplate& t);

// Conjunction of the template requirements over the problem's predicates.
Formula template_conjunction(const LmtProblem& p, const CharTemplate& t);

// Template-constrained maximum-coverage fit: the supervision generator.
InferResult fit_template(const PixelImage& img, const CharTemplate& t,
                         std::optional<std::chrono::milliseconds> budget, uint64_t seed = 0,
                         const CharOptions& opts = {});

// -------------------------------------------------------------------- output

// 480x480 viewport over the unit box. Blocks render as rectangles, segments
// as colored strokes over the faded bitmap. Hard-infeasible assignments are
// rendered with an INFEASIBLE watermark; an empty assignment is an error.
std::string render_stairway_svg(const LmtProblem& p, const Assignment& a);
std::string render_character_svg(const LmtProblem& p, const Assignment& a, const PixelImage* img);

}  // namespace lmt::domains
