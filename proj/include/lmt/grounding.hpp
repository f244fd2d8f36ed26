#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lmt/formula.hpp"

namespace lmt {

// Indexed predicate template: name + index parameters + a body builder that
// receives one concrete index tuple (values parallel to params).
struct PredicateTemplate {
    std::string name;
    std::vector<std::string> params;
    std::function<Formula(const std::vector<int>&)> body;
};

struct IndexRange {
    std::string param;
    int lo = 0, hi = -1;  // inclusive
};

// Ground name "pred(i,j)" with decimal indices.
std::string ground_name(const std::string& pred, const std::vector<int>& indices);

// Enumerates index tuples lexicographically (ranges in the order given),
// applies the optional tuple filter, and instantiates the body per tuple.
// Throws if a template parameter has no range.
std::vector<std::pair<std::string, Formula>> ground_template(
    const PredicateTemplate& tpl, const std::vector<IndexRange>& ranges,
    const std::function<bool(const std::vector<int>&)>& filter = nullptr);

}  // namespace lmt
