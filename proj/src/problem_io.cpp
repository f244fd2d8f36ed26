#include "lmt/problem_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace lmt::io {

using sexpr::ParseError;

namespace {

[[noreturn]] void fail(const Node& n, const std::string& msg) {
    throw ParseError(n.line, n.col, msg);
}

bool is_number(const std::string& s) {
    if (s.empty()) return false;
    char c = s[0];
    return isdigit(static_cast<unsigned char>(c)) ||
           ((c == '-' || c == '+') && s.size() > 1 && isdigit(static_cast<unsigned char>(s[1])));
}

}  // namespace

LinTerm parse_term(const Node& n, const Declarations& d) {
    if (n.is_atom) {
        if (is_number(n.atom)) {
            try {
                return LinTerm(Rational::parse(n.atom));
            } catch (const std::exception& e) {
                fail(n, e.what());
            }
        }
        VarId v = d.find_rat(n.atom);
        if (v < 0) fail(n, "undeclared rational variable: " + n.atom);
        return LinTerm::var(v);
    }
    const std::string& op = n.head();
    if (op == "+") {
        LinTerm t;
        for (size_t i = 1; i < n.size(); ++i) t += parse_term(n.at(i), d);
        return t;
    }
    if (op == "-") {
        if (n.size() == 2) return -parse_term(n.at(1), d);
        if (n.size() < 3) fail(n, "'-' needs at least one argument");
        LinTerm t = parse_term(n.at(1), d);
        for (size_t i = 2; i < n.size(); ++i) t -= parse_term(n.at(i), d);
        return t;
    }
    if (op == "*") {
        if (n.size() != 3) fail(n, "'*' takes exactly two arguments");
        LinTerm a = parse_term(n.at(1), d);
        LinTerm b = parse_term(n.at(2), d);
        if (a.is_constant()) return b * a.constant();
        if (b.is_constant()) return a * b.constant();
        fail(n, "nonlinear product of two non-constant terms");
    }
    fail(n, "unknown term operator: " + op);
}

Formula parse_formula(const Node& n, const Declarations& d) {
    if (n.is_atom) {
        if (n.atom == "true") return Formula::truth(true);
        if (n.atom == "false") return Formula::truth(false);
        VarId v = d.find_bool(n.atom);
        if (v < 0) fail(n, "undeclared Boolean variable: " + n.atom);
        return Formula::bvar(v);
    }
    const std::string& op = n.head();
    if (op == "and" || op == "or") {
        std::vector<Formula> kids;
        for (size_t i = 1; i < n.size(); ++i) kids.push_back(parse_formula(n.at(i), d));
        return op == "and" ? Formula::conj(std::move(kids)) : Formula::disj(std::move(kids));
    }
    if (op == "not") {
        if (n.size() != 2) fail(n, "'not' takes one argument");
        return Formula::negate(parse_formula(n.at(1), d));
    }
    if (op == "=>" || op == "implies") {
        if (n.size() != 3) fail(n, "'=>' takes two arguments");
        return Formula::implies(parse_formula(n.at(1), d), parse_formula(n.at(2), d));
    }
    if (op == "iff" || op == "<->" || op == "<=>") {
        if (n.size() != 3) fail(n, "'iff' takes two arguments");
        return Formula::iff(parse_formula(n.at(1), d), parse_formula(n.at(2), d));
    }
    if (op == "<=" || op == "<" || op == "=" || op == ">=" || op == ">" || op == "!=" ||
        op == "distinct") {
        if (n.size() != 3) fail(n, "comparison takes two arguments");
        return Formula::cmp(parse_term(n.at(1), d), op, parse_term(n.at(2), d));
    }
    fail(n, "unknown formula operator: " + op);
}

Node term_node(const LinTerm& t, const Declarations& d) {
    std::vector<Node> parts;
    for (const auto& [v, c] : t.coeffs()) {
        Node var = Node::make_atom(d.rat_name(v));
        if (c == Rational(1))
            parts.push_back(var);
        else
            parts.push_back(
                Node::make_list({Node::make_atom("*"), Node::make_atom(c.str()), var}));
    }
    if (!t.constant().is_zero() || parts.empty())
        parts.push_back(Node::make_atom(t.constant().str()));
    if (parts.size() == 1) return parts[0];
    parts.insert(parts.begin(), Node::make_atom("+"));
    return Node::make_list(std::move(parts));
}

Node formula_node(const Formula& f, const Declarations& d) {
    switch (f.kind()) {
        case Conn::Leaf: {
            const Atom& a = f.leaf();
            if (a.is_bool()) return Node::make_atom(d.bool_name(a.boolref().id));
            const LinCmp& c = a.lincmp();
            const char* rel = c.rel == Rel::Le ? "<=" : (c.rel == Rel::Lt ? "<" : "=");
            return Node::make_list({Node::make_atom(rel), term_node(c.term, d),
                                    Node::make_atom(c.bound.str())});
        }
        case Conn::Not:
            return Node::make_list({Node::make_atom("not"), formula_node(f.kids()[0], d)});
        case Conn::And:
        case Conn::Or: {
            if (f.kids().empty()) return Node::make_atom(f.kind() == Conn::And ? "true" : "false");
            std::vector<Node> kids{Node::make_atom(f.kind() == Conn::And ? "and" : "or")};
            for (const auto& k : f.kids()) kids.push_back(formula_node(k, d));
            return Node::make_list(std::move(kids));
        }
        case Conn::Implies:
            return Node::make_list({Node::make_atom("=>"), formula_node(f.kids()[0], d),
                                    formula_node(f.kids()[1], d)});
        case Conn::Iff:
            return Node::make_list({Node::make_atom("iff"), formula_node(f.kids()[0], d),
                                    formula_node(f.kids()[1], d)});
    }
    throw std::logic_error("unreachable");
}

SmtProblem load_smt_problem(const std::string& text) {
    SmtProblem p;
    for (const Node& n : sexpr::parse_all(text)) {
        if (n.is_atom) fail(n, "expected a directive list");
        const std::string& op = n.head();
        if (op == "declare-bool") {
            p.decls.add_bool(n.at(1).atom);
        } else if (op == "declare-rat") {
            p.decls.add_rat(n.at(1).atom);
        } else if (op == "assert") {
            if (n.size() != 2) fail(n, "'assert' takes one formula");
            p.hard.push_back(parse_formula(n.at(1), p.decls));
        } else if (op == "minimize") {
            if (n.size() != 2) fail(n, "'minimize' takes one term");
            p.objective = parse_term(n.at(1), p.decls);
        } else if (op == "set-budget") {
            p.budget = std::chrono::milliseconds(std::stol(n.at(1).atom));
        } else {
            fail(n, "unknown directive: " + op);
        }
    }
    return p;
}

void bind_assignment(const Node& n, const Declarations& d, Assignment& a) {
    if (n.is_atom || n.size() < 1 || n.head() != "assignment") fail(n, "expected (assignment ...)");
    a.bools.resize(d.num_bools(), false);
    a.rats.resize(d.num_rats(), Rational(0));
    for (size_t i = 1; i < n.size(); ++i) {
        const Node& pair = n.at(i);
        if (pair.is_atom || pair.size() != 2) fail(pair, "expected (<var> <value>)");
        const std::string& name = pair.at(0).atom;
        const std::string& val = pair.at(1).atom;
        VarId b = d.find_bool(name);
        if (b >= 0) {
            if (val != "true" && val != "false") fail(pair, "boolean value must be true/false");
            a.bools[b] = val == "true";
            continue;
        }
        VarId r = d.find_rat(name);
        if (r < 0) fail(pair, "undeclared variable in assignment: " + name);
        a.rats[r] = Rational::parse(val);
    }
}

Assignment load_assignment_text(const std::string& text, const LmtProblem& p) {
    auto nodes = sexpr::parse_all(text);
    if (nodes.size() != 1) throw std::runtime_error("assignment file must hold one form");
    Assignment a = Assignment::zeros(p.decls);
    bind_assignment(nodes[0], p.decls, a);
    p.complete(a);
    return a;
}

std::string write_assignment(const Declarations& d, const Assignment& a,
                             const std::vector<std::pair<bool, VarId>>& vars) {
    std::vector<std::pair<bool, VarId>> use = vars;
    if (use.empty()) {
        for (VarId v = 0; v < d.num_bools(); ++v) use.push_back({true, v});
        for (VarId v = 0; v < d.num_rats(); ++v) use.push_back({false, v});
    }
    std::vector<std::pair<std::string, std::string>> rows;
    for (auto [is_bool, v] : use) {
        if (is_bool)
            rows.push_back({d.bool_name(v), a.bools.at(v) ? "true" : "false"});
        else
            rows.push_back({d.rat_name(v), a.rats.at(v).str()});
    }
    std::sort(rows.begin(), rows.end());
    std::ostringstream os;
    os << "(assignment";
    for (const auto& [k, v] : rows) os << "\n  (" << sexpr::quote_atom(k) << " " << v << ")";
    os << ")\n";
    return os.str();
}

ModelFile load_model_text(const std::string& text) {
    ModelFile mf;
    auto problem = std::make_shared<LmtProblem>();
    bool saw_generic_directive = false;
    for (const Node& n : sexpr::parse_all(text)) {
        if (n.is_atom) fail(n, "expected a directive list");
        const std::string& op = n.head();
        if (op == "domain") {
            mf.domain = n.at(1).atom;
            for (size_t i = 2; i < n.size(); ++i) {
                const Node& arg = n.at(i);
                if (arg.is_atom || arg.size() != 2) fail(arg, "expected (key value)");
                mf.args[arg.at(0).atom] = arg.at(1).atom;
            }
        } else if (op == "declare-bool") {
            problem->decls.add_bool(n.at(1).atom);
            saw_generic_directive = true;
        } else if (op == "declare-rat") {
            problem->decls.add_rat(n.at(1).atom);
            saw_generic_directive = true;
        } else if (op == "input" || op == "output") {
            for (size_t i = 1; i < n.size(); ++i) {
                const std::string& name = n.at(i).atom;
                VarId b = problem->decls.find_bool(name);
                VarId r = problem->decls.find_rat(name);
                if (b < 0 && r < 0) fail(n.at(i), "undeclared variable: " + name);
                auto& list = op == "input" ? problem->inputs : problem->outputs;
                list.push_back(b >= 0 ? std::make_pair(true, b) : std::make_pair(false, r));
            }
            saw_generic_directive = true;
        } else if (op == "assert") {
            problem->hard.push_back(parse_formula(n.at(1), problem->decls));
            saw_generic_directive = true;
        } else if (op == "soft-bool") {
            if (n.size() != 3) fail(n, "(soft-bool <name> <formula>)");
            SoftConstraint s;
            s.name = n.at(1).atom;
            s.is_bool = true;
            s.formula = parse_formula(n.at(2), problem->decls);
            problem->softs.push_back(std::move(s));
            saw_generic_directive = true;
        } else if (op == "soft-cost") {
            if (n.size() != 3) fail(n, "(soft-cost <name> <term>)");
            SoftConstraint s;
            s.name = n.at(1).atom;
            s.is_bool = false;
            s.cost = parse_term(n.at(2), problem->decls);
            problem->softs.push_back(std::move(s));
            saw_generic_directive = true;
        } else if (op == "weights") {
            for (size_t i = 1; i < n.size(); ++i) {
                const Node& pair = n.at(i);
                if (pair.is_atom || pair.size() != 2) fail(pair, "expected (<name> <weight>)");
                mf.weights.push_back({pair.at(0).atom, std::stod(pair.at(1).atom)});
            }
        } else {
            fail(n, "unknown model directive: " + op);
        }
    }
    if (mf.domain == "generic") {
        if (!saw_generic_directive) throw std::runtime_error("generic model file has no problem");
        mf.generic = problem;
    }
    return mf;
}

std::string write_model_text(const ModelFile& mf) {
    std::ostringstream os;
    os << "(domain " << sexpr::quote_atom(mf.domain);
    for (const auto& [k, v] : mf.args)
        os << " (" << sexpr::quote_atom(k) << " " << sexpr::quote_atom(v) << ")";
    os << ")\n";
    if (mf.generic) {
        const LmtProblem& p = *mf.generic;
        for (VarId v = 0; v < p.decls.num_bools(); ++v)
            os << "(declare-bool " << sexpr::quote_atom(p.decls.bool_name(v)) << ")\n";
        for (VarId v = 0; v < p.decls.num_rats(); ++v)
            os << "(declare-rat " << sexpr::quote_atom(p.decls.rat_name(v)) << ")\n";
        auto varlist = [&](const char* tag, const std::vector<std::pair<bool, VarId>>& vars) {
            if (vars.empty()) return;
            os << "(" << tag;
            for (auto [is_bool, v] : vars)
                os << " "
                   << sexpr::quote_atom(is_bool ? p.decls.bool_name(v) : p.decls.rat_name(v));
            os << ")\n";
        };
        varlist("input", p.inputs);
        varlist("output", p.outputs);
        for (const auto& f : p.hard)
            os << "(assert " << sexpr::write(formula_node(f, p.decls)) << ")\n";
        for (const auto& s : p.softs) {
            if (s.is_bool)
                os << "(soft-bool " << sexpr::quote_atom(s.name) << " "
                   << sexpr::write(formula_node(s.formula, p.decls)) << ")\n";
            else
                os << "(soft-cost " << sexpr::quote_atom(s.name) << " "
                   << sexpr::write(term_node(s.cost, p.decls)) << ")\n";
        }
    }
    if (!mf.weights.empty()) {
        os << "(weights";
        char buf[64];
        for (const auto& [name, w] : mf.weights) {
            snprintf(buf, sizeof buf, "%.17g", w);
            os << "\n  (" << sexpr::quote_atom(name) << " " << buf << ")";
        }
        os << ")\n";
    }
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

ModelFile load_model_file(const std::string& path) { return load_model_text(read_file(path)); }

}  // namespace lmt::io
