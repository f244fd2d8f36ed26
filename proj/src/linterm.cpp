#include "lmt/linterm.hpp"

#include <sstream>

namespace lmt {

void LinTerm::add(VarId v, const Rational& coeff) {
    if (coeff.is_zero()) return;
    auto it = coeffs_.find(v);
    if (it == coeffs_.end()) {
        coeffs_.emplace(v, coeff);
        return;
    }
    it->second += coeff;
    if (it->second.is_zero()) coeffs_.erase(it);
}

LinTerm& LinTerm::operator+=(const LinTerm& o) {
    for (const auto& [v, c] : o.coeffs_) add(v, c);
    constant_ += o.constant_;
    return *this;
}

LinTerm& LinTerm::operator-=(const LinTerm& o) {
    for (const auto& [v, c] : o.coeffs_) add(v, -c);
    constant_ -= o.constant_;
    return *this;
}

LinTerm& LinTerm::operator*=(const Rational& c) {
    if (c.is_zero()) {
        coeffs_.clear();
        constant_ = Rational(0);
        return *this;
    }
    for (auto& [v, coeff] : coeffs_) coeff *= c;
    constant_ *= c;
    return *this;
}

LinTerm LinTerm::operator-() const {
    LinTerm t = *this;
    t *= Rational(-1);
    return t;
}

std::string LinTerm::key() const {
    std::ostringstream os;
    for (const auto& [v, c] : coeffs_) os << c.str() << "*v" << v << " ";
    os << "|" << constant_.str();
    return os.str();
}

}  // namespace lmt
