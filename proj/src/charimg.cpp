#include "lmt/charimg.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lmt {

namespace {

// P1 token stream: whitespace-separated, # comments to end of line; bit runs
// like "0101" are also legal
struct PbmLexer {
    std::istream& in;
    int get_bit_or_token(std::string& tok) {
        tok.clear();
        int c;
        while ((c = in.get()) != EOF) {
            if (c == '#') {
                while ((c = in.get()) != EOF && c != '\n') {
                }
                continue;
            }
            if (isspace(c)) continue;
            tok.push_back(static_cast<char>(c));
            while ((c = in.peek()) != EOF && !isspace(c) && c != '#') tok.push_back(static_cast<char>(in.get()));
            return 0;
        }
        return -1;
    }
};

}  // namespace

PixelImage load_pbm(std::istream& in) {
    PbmLexer lex{in};
    std::string tok;
    if (lex.get_bit_or_token(tok) < 0 || tok != "P1")
        throw std::runtime_error("not a plain P1 bitmap (bad magic)");
    PixelImage img;
    auto read_int = [&](const char* what) {
        if (lex.get_bit_or_token(tok) < 0) throw std::runtime_error(std::string("missing ") + what);
        try {
            return std::stoi(tok);
        } catch (...) {
            throw std::runtime_error(std::string("malformed ") + what + ": " + tok);
        }
    };
    img.width = read_int("width");
    img.height = read_int("height");
    if (img.width <= 0 || img.height <= 0) throw std::runtime_error("non-positive bitmap dimensions");

    int col = 0, row = 0;
    long need = static_cast<long>(img.width) * img.height;
    long got = 0;
    while (got < need) {
        if (lex.get_bit_or_token(tok) < 0) throw std::runtime_error("bitmap data truncated");
        for (char c : tok) {
            if (c != '0' && c != '1') throw std::runtime_error("bad bitmap digit");
            if (got >= need) throw std::runtime_error("bitmap data overflow");
            if (c == '1') img.on.insert({col, row});
            ++got;
            if (++col == img.width) {
                col = 0;
                ++row;
            }
        }
    }
    return img;
}

PixelImage load_pbm_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_pbm(in);
}

void save_pbm(std::ostream& out, const PixelImage& img) {
    out << "P1\n" << img.width << " " << img.height << "\n";
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) out << (img.on.count({c, r}) ? '1' : '0');
        out << "\n";
    }
}

PixelImage downscale(const PixelImage& img, int width, int height) {
    PixelImage out;
    out.width = width;
    out.height = height;
    for (auto [c, r] : img.on) {
        int tc = static_cast<int>(static_cast<long>(c) * width / img.width);
        int tr = static_cast<int>(static_cast<long>(r) * height / img.height);
        out.on.insert({tc, tr});
    }
    return out;
}

std::pair<Rational, Rational> pixel_center(const PixelImage& img, int col, int row) {
    Rational x = Rational(2 * col + 1, 2l * img.width);
    Rational y = Rational(1) - Rational(2 * row + 1, 2l * img.height);
    return {x, y};
}

PixelImage rasterize_segments(const std::vector<Segment>& segs, int width, int height) {
    PixelImage out;
    out.width = width;
    out.height = height;
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) {
            auto [x, y] = pixel_center(out, c, r);
            for (const auto& s : segs) {
                bool hit = false;
                if (s.yb == s.ye && s.xb != s.xe) {  // horizontal
                    hit = s.xb <= x && x <= s.xe && y == s.yb;
                } else if (s.xb == s.xe) {  // vertical (either direction)
                    Rational lo = s.yb < s.ye ? s.yb : s.ye;
                    Rational hi = s.yb < s.ye ? s.ye : s.yb;
                    hit = lo <= y && y <= hi && x == s.xb;
                } else {  // diagonal
                    Rational lo = s.yb < s.ye ? s.yb : s.ye;
                    Rational hi = s.yb < s.ye ? s.ye : s.yb;
                    bool in_box = s.xb <= x && x <= s.xe && lo <= y && y <= hi;
                    if (in_box) {
                        if (s.ye > s.yb)
                            hit = (s.xb - s.yb) == (x - y);
                        else
                            hit = (s.xb + s.yb) == (x + y);
                    }
                }
                if (hit) {
                    out.on.insert({c, r});
                    break;
                }
            }
        }
    return out;
}

}  // namespace lmt
