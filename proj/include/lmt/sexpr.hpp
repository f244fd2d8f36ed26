#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lmt::sexpr {

struct ParseError : std::runtime_error {
    int line, col;
    ParseError(int l, int c, const std::string& msg)
        : std::runtime_error(std::to_string(l) + ":" + std::to_string(c) + ": " + msg),
          line(l),
          col(c) {}
};

struct Node {
    bool is_atom = true;
    std::string atom;
    std::vector<Node> kids;
    int line = 0, col = 0;

    static Node make_atom(std::string s) {
        Node n;
        n.atom = std::move(s);
        return n;
    }
    static Node make_list(std::vector<Node> kids) {
        Node n;
        n.is_atom = false;
        n.kids = std::move(kids);
        return n;
    }

    const Node& at(size_t i) const;
    const std::string& head() const;  // first child's atom
    size_t size() const { return kids.size(); }
};

// Parses a sequence of top-level expressions. Comments run from ';' to end
// of line. Atoms containing delimiters are written double-quoted.
std::vector<Node> parse_all(const std::string& text);

std::string write(const Node& n);
std::string quote_atom(const std::string& s);

}  // namespace lmt::sexpr
