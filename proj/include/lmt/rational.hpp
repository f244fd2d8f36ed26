#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <iosfwd>
#include <string>

namespace lmt {

// Exact arbitrary-precision rational. Always in lowest terms, denominator > 0.
class Rational {
public:
    Rational() : q_(0) {}
    Rational(long n) : q_(n) {}
    Rational(long num, long den);
    explicit Rational(const mpq_class& q) : q_(q) { q_.canonicalize(); }

    // Exact binary-fraction expansion of a finite double.
    static Rational from_double(double d);
    // Accepts "7", "-3/4", "1.25", "+0.5". Throws std::invalid_argument.
    static Rational parse(const std::string& text);

    Rational operator-() const { return Rational(mpq_class(-q_)); }
    Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
    Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }
    Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
    friend bool operator!=(const Rational& a, const Rational& b) { return a.q_ != b.q_; }
    friend bool operator<(const Rational& a, const Rational& b) { return a.q_ < b.q_; }
    friend bool operator<=(const Rational& a, const Rational& b) { return a.q_ <= b.q_; }
    friend bool operator>(const Rational& a, const Rational& b) { return a.q_ > b.q_; }
    friend bool operator>=(const Rational& a, const Rational& b) { return a.q_ >= b.q_; }

    bool is_zero() const { return sgn(q_) == 0; }
    int sign() const { return sgn(q_); }
    Rational abs() const { return sign() < 0 ? -*this : *this; }
    Rational inverse() const;

    double to_double() const { return q_.get_d(); }
    // "num" when integral, else "num/den".
    std::string str() const;

    friend std::ostream& operator<<(std::ostream& os, const Rational& r);

private:
    mpq_class q_;
};

}  // namespace lmt
