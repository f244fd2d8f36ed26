#include "lmt/rational.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace lmt {

Rational::Rational(long num, long den) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    q_ = mpq_class(num, den);
    q_.canonicalize();
}

Rational Rational::from_double(double d) {
    if (!std::isfinite(d)) throw std::invalid_argument("non-finite double");
    mpq_class q;
    mpq_set_d(q.get_mpq_t(), d);
    return Rational(q);
}

Rational Rational::parse(const std::string& text) {
    std::string s = text;
    if (!s.empty() && (s[0] == '+')) s = s.substr(1);
    if (s.empty()) throw std::invalid_argument("empty rational literal");

    auto slash = s.find('/');
    auto dot = s.find('.');
    if (slash != std::string::npos) {
        if (dot != std::string::npos) throw std::invalid_argument("bad rational literal: " + text);
        mpq_class q;
        if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad rational literal: " + text);
        if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + text);
        q.canonicalize();
        return Rational(q);
    }
    if (dot != std::string::npos) {
        std::string whole = s.substr(0, dot);
        std::string frac = s.substr(dot + 1);
        bool neg = !whole.empty() && whole[0] == '-';
        if (neg) whole = whole.substr(1);
        if (whole.empty()) whole = "0";
        if (frac.empty()) frac = "0";
        for (char c : whole + frac)
            if (!isdigit(static_cast<unsigned char>(c)))
                throw std::invalid_argument("bad rational literal: " + text);
        mpz_class num(whole + frac);
        mpz_class den;
        mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
        mpq_class q(num, den);
        q.canonicalize();
        if (neg) q = -q;
        return Rational(q);
    }
    mpz_class z;
    if (z.set_str(s, 10) != 0) throw std::invalid_argument("bad rational literal: " + text);
    return Rational(mpq_class(z));
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.is_zero()) throw std::domain_error("rational division by zero");
    q_ /= o.q_;
    return *this;
}

Rational Rational::inverse() const {
    if (is_zero()) throw std::domain_error("inverse of zero");
    return Rational(mpq_class(1) / q_);
}

std::string Rational::str() const {
    if (q_.get_den() == 1) return q_.get_num().get_str();
    return q_.get_num().get_str() + "/" + q_.get_den().get_str();
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

}  // namespace lmt
