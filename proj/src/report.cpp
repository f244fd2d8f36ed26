#include "lmt/report.hpp"

#include <iomanip>
#include <sstream>

namespace lmt {

std::string format_report(const RunReport& r) {
    std::ostringstream os;
    os << "instance\tstatus\tobjective\twall_ms\tchecker\tdistance\n";
    double wall = 0;
    int passes = 0, with_checker = 0, with_dist = 0;
    double dist = 0;
    for (const auto& rec : r.records) {
        os << rec.id << "\t" << rec.status << "\t"
           << (rec.objective ? rec.objective->str() : "-") << "\t" << std::fixed
           << std::setprecision(1) << rec.wall_ms << "\t";
        if (rec.checker_pass) {
            os << (*rec.checker_pass ? "pass" : "fail");
            ++with_checker;
            if (*rec.checker_pass) ++passes;
        } else {
            os << "-";
        }
        os << "\t";
        if (rec.distance) {
            os << std::setprecision(6) << *rec.distance;
            dist += *rec.distance;
            ++with_dist;
        } else {
            os << "-";
        }
        os << "\n";
        wall += rec.wall_ms;
    }
    os << "# instances " << r.records.size();
    if (!r.records.empty())
        os << "  mean_wall_ms " << std::setprecision(1) << wall / r.records.size();
    if (with_checker) os << "  checker_pass " << passes << "/" << with_checker;
    if (with_dist) os << "  mean_distance " << std::setprecision(6) << dist / with_dist;
    os << "\n";
    return os.str();
}

}  // namespace lmt
