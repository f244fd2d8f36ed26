#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "lmt/rational.hpp"

namespace lmt {

// Black-and-white raster: on-pixels by (col, row), row 0 at the top.
struct PixelImage {
    int width = 0, height = 0;
    std::set<std::pair<int, int>> on;

    bool empty() const { return on.empty(); }
};

// Plain-text P1 portable bitmap.
PixelImage load_pbm(std::istream& in);
PixelImage load_pbm_file(const std::string& path);
void save_pbm(std::ostream& out, const PixelImage& img);

// Max-pooling downscale: a target pixel is on iff any source pixel in its
// window is on.
PixelImage downscale(const PixelImage& img, int width, int height);

// Unit-box center of a pixel, y pointing up: ((c+1/2)/w, 1-(r+1/2)/h).
std::pair<Rational, Rational> pixel_center(const PixelImage& img, int col, int row);

struct Segment {
    Rational xb, yb, xe, ye;
};

// Pixels whose centers lie on one of the segments under the axis/diagonal
// coverage semantics used by the character domain.
PixelImage rasterize_segments(const std::vector<Segment>& segs, int width, int height);

}  // namespace lmt
