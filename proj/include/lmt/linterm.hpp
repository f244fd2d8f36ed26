#pragma once

#include <map>
#include <string>

#include "lmt/rational.hpp"

namespace lmt {

using VarId = int;

// Linear expression over rational variables: sum of coeff*var plus a constant.
// Zero coefficients are never stored.
class LinTerm {
public:
    LinTerm() = default;
    explicit LinTerm(Rational constant) : constant_(std::move(constant)) {}

    static LinTerm var(VarId v, Rational coeff = Rational(1)) {
        LinTerm t;
        t.add(v, coeff);
        return t;
    }

    void add(VarId v, const Rational& coeff);
    void add_constant(const Rational& c) { constant_ += c; }

    LinTerm& operator+=(const LinTerm& o);
    LinTerm& operator-=(const LinTerm& o);
    LinTerm& operator*=(const Rational& c);
    friend LinTerm operator+(LinTerm a, const LinTerm& b) { return a += b; }
    friend LinTerm operator-(LinTerm a, const LinTerm& b) { return a -= b; }
    friend LinTerm operator*(LinTerm a, const Rational& c) { return a *= c; }
    LinTerm operator-() const;

    const std::map<VarId, Rational>& coeffs() const { return coeffs_; }
    const Rational& constant() const { return constant_; }
    void set_constant(const Rational& c) { constant_ = c; }
    bool is_constant() const { return coeffs_.empty(); }

    friend bool operator==(const LinTerm& a, const LinTerm& b) {
        return a.constant_ == b.constant_ && a.coeffs_ == b.coeffs_;
    }

    // Canonical text form used as a dedup key, e.g. "3/2*v0 -1*v4".
    std::string key() const;

private:
    std::map<VarId, Rational> coeffs_;
    Rational constant_;
};

}  // namespace lmt
