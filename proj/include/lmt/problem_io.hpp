#pragma once

#include <map>
#include <memory>

#include "lmt/learning.hpp"
#include "lmt/sexpr.hpp"

namespace lmt::io {

using sexpr::Node;

// ---- formulas and terms over a declaration table

LinTerm parse_term(const Node& n, const Declarations& d);
Formula parse_formula(const Node& n, const Declarations& d);
Node term_node(const LinTerm& t, const Declarations& d);
Node formula_node(const Formula& f, const Declarations& d);

// ---- solver problem files: declare-bool / declare-rat / assert / minimize /
// set-budget

SmtProblem load_smt_problem(const std::string& text);

// ---- assignment files: (assignment (<name> <value>) ...)

void bind_assignment(const Node& n, const Declarations& d, Assignment& a);
Assignment load_assignment_text(const std::string& text, const LmtProblem& p);
// key-sorted, restricted to the given variables (all declared when empty)
std::string write_assignment(const Declarations& d, const Assignment& a,
                             const std::vector<std::pair<bool, VarId>>& vars = {});

// ---- learner model files

struct ModelFile {
    std::string domain = "generic";                 // stairway | character | toy-blocks | generic
    std::map<std::string, std::string> args;        // domain parameters
    std::shared_ptr<LmtProblem> generic;            // for domain == generic
    std::vector<std::pair<std::string, double>> weights;
};

ModelFile load_model_text(const std::string& text);
std::string write_model_text(const ModelFile& mf);

ModelFile load_model_file(const std::string& path);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace lmt::io
