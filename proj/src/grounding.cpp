#include "lmt/grounding.hpp"

#include <algorithm>
#include <stdexcept>

namespace lmt {

std::string ground_name(const std::string& pred, const std::vector<int>& indices) {
    std::string s = pred + "(";
    for (size_t i = 0; i < indices.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(indices[i]);
    }
    return s + ")";
}

std::vector<std::pair<std::string, Formula>> ground_template(
    const PredicateTemplate& tpl, const std::vector<IndexRange>& ranges,
    const std::function<bool(const std::vector<int>&)>& filter) {
    std::vector<const IndexRange*> ordered;
    for (const auto& p : tpl.params) {
        auto it = std::find_if(ranges.begin(), ranges.end(),
                               [&](const IndexRange& r) { return r.param == p; });
        if (it == ranges.end())
            throw std::invalid_argument("unbound index parameter: " + p + " in template " + tpl.name);
        ordered.push_back(&*it);
    }

    std::vector<std::pair<std::string, Formula>> out;
    std::vector<int> tuple(tpl.params.size());
    std::function<void(size_t)> rec = [&](size_t depth) {
        if (depth == tuple.size()) {
            if (filter && !filter(tuple)) return;
            out.emplace_back(ground_name(tpl.name, tuple), tpl.body(tuple));
            return;
        }
        for (int v = ordered[depth]->lo; v <= ordered[depth]->hi; ++v) {
            tuple[depth] = v;
            rec(depth + 1);
        }
    };
    rec(0);
    return out;
}

}  // namespace lmt
