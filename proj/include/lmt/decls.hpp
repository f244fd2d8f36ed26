#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmt/rational.hpp"

namespace lmt {

using VarId = int;

// Symbol table for one problem: Boolean and rational variables, id = index.
class Declarations {
public:
    VarId add_bool(const std::string& name) { return add(name, bool_names_, true); }
    VarId add_rat(const std::string& name) { return add(name, rat_names_, false); }

    int num_bools() const { return static_cast<int>(bool_names_.size()); }
    int num_rats() const { return static_cast<int>(rat_names_.size()); }

    const std::string& bool_name(VarId v) const { return bool_names_.at(v); }
    const std::string& rat_name(VarId v) const { return rat_names_.at(v); }

    // -1 when not declared.
    VarId find_bool(const std::string& name) const { return find(name, true); }
    VarId find_rat(const std::string& name) const { return find(name, false); }

    VarId bool_id(const std::string& name) const;
    VarId rat_id(const std::string& name) const;

private:
    VarId add(const std::string& name, std::vector<std::string>& names, bool is_bool);
    VarId find(const std::string& name, bool is_bool) const;

    std::vector<std::string> bool_names_, rat_names_;
    std::map<std::string, std::pair<bool, VarId>> by_name_;
};

// Total assignment over a Declarations instance.
struct Assignment {
    std::vector<bool> bools;
    std::vector<Rational> rats;

    static Assignment zeros(const Declarations& d) {
        Assignment a;
        a.bools.assign(d.num_bools(), false);
        a.rats.assign(d.num_rats(), Rational(0));
        return a;
    }
};

}  // namespace lmt
