#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lmt/rational.hpp"

namespace lmt {

struct RunRecord {
    std::string id;
    std::string status;
    std::optional<Rational> objective;
    double wall_ms = 0.0;
    std::optional<bool> checker_pass;
    std::optional<double> distance;
};

struct RunReport {
    std::vector<RunRecord> records;
};

// Line-oriented text table with aggregate means on the final lines.
std::string format_report(const RunReport& r);

}  // namespace lmt
