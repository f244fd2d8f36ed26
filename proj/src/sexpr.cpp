#include "lmt/sexpr.hpp"

#include <sstream>

namespace lmt::sexpr {

const Node& Node::at(size_t i) const {
    if (is_atom || i >= kids.size())
        throw ParseError(line, col, "expected a list with at least " + std::to_string(i + 1) +
                                        " elements");
    return kids[i];
}

const std::string& Node::head() const {
    const Node& h = at(0);
    if (!h.is_atom) throw ParseError(line, col, "expected an atom head");
    return h.atom;
}

namespace {

struct Lexer {
    const std::string& text;
    size_t pos = 0;
    int line = 1, col = 1;

    int peek() const { return pos < text.size() ? text[pos] : -1; }
    int get() {
        if (pos >= text.size()) return -1;
        char c = text[pos++];
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        return c;
    }
    void skip_ws() {
        for (;;) {
            int c = peek();
            if (c == ';') {
                while (peek() != -1 && peek() != '\n') get();
                continue;
            }
            if (c == -1 || !isspace(c)) return;
            get();
        }
    }
};

bool is_delim(int c) { return c == -1 || isspace(c) || c == '(' || c == ')' || c == ';' || c == '"'; }

Node parse_one(Lexer& lx) {
    lx.skip_ws();
    int l = lx.line, c = lx.col;
    int ch = lx.peek();
    if (ch == -1) throw ParseError(l, c, "unexpected end of input");
    if (ch == ')') throw ParseError(l, c, "unbalanced ')'");
    if (ch == '(') {
        lx.get();
        std::vector<Node> kids;
        for (;;) {
            lx.skip_ws();
            if (lx.peek() == ')') {
                lx.get();
                break;
            }
            if (lx.peek() == -1) throw ParseError(lx.line, lx.col, "missing ')'");
            kids.push_back(parse_one(lx));
        }
        Node n = Node::make_list(std::move(kids));
        n.line = l;
        n.col = c;
        return n;
    }
    std::string s;
    if (ch == '"') {
        lx.get();
        for (;;) {
            int k = lx.get();
            if (k == -1) throw ParseError(l, c, "unterminated string atom");
            if (k == '"') break;
            if (k == '\\') {
                int esc = lx.get();
                if (esc == -1) throw ParseError(l, c, "unterminated escape");
                s.push_back(static_cast<char>(esc));
                continue;
            }
            s.push_back(static_cast<char>(k));
        }
    } else {
        while (!is_delim(lx.peek())) s.push_back(static_cast<char>(lx.get()));
        if (s.empty()) throw ParseError(l, c, "empty atom");
    }
    Node n = Node::make_atom(std::move(s));
    n.line = l;
    n.col = c;
    return n;
}

}  // namespace

std::vector<Node> parse_all(const std::string& text) {
    Lexer lx{text};
    std::vector<Node> out;
    for (;;) {
        lx.skip_ws();
        if (lx.peek() == -1) return out;
        out.push_back(parse_one(lx));
    }
}

std::string quote_atom(const std::string& s) {
    bool need = s.empty();
    for (char c : s)
        if (isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ';' || c == '"')
            need = true;
    if (!need) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string write(const Node& n) {
    if (n.is_atom) return quote_atom(n.atom);
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < n.kids.size(); ++i) {
        if (i) os << " ";
        os << write(n.kids[i]);
    }
    os << ")";
    return os.str();
}

}  // namespace lmt::sexpr
