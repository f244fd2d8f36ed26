#include <doctest.h>

#include <random>

#include "lmt/rational.hpp"

using lmt::Rational;

TEST_CASE("parsing is exact") {
    CHECK(Rational::parse("7") == Rational(7));
    CHECK(Rational::parse("-3/4") == Rational(-3, 4));
    CHECK(Rational::parse("1.25") == Rational(5, 4));
    CHECK(Rational::parse("+0.5") == Rational(1, 2));
    CHECK(Rational::parse("-0.1") == Rational(-1, 10));
    CHECK(Rational::parse("2/4") == Rational(1, 2));
    CHECK(Rational::parse("10/5").str() == "2");
    CHECK_THROWS(Rational::parse("1.2.3"));
    CHECK_THROWS(Rational::parse("1/0"));
    CHECK_THROWS(Rational::parse("abc"));
}

TEST_CASE("from_double is exact for binary fractions") {
    CHECK(Rational::from_double(0.5) == Rational(1, 2));
    CHECK(Rational::from_double(-0.375) == Rational(-3, 8));
    CHECK(Rational::from_double(3.0) == Rational(3));
    // round-trips through the exact expansion
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-100.0, 100.0);
    for (int i = 0; i < 200; ++i) {
        double d = dist(rng);
        CHECK(Rational::from_double(d).to_double() == d);
    }
}

TEST_CASE("field properties on random rationals") {
    std::mt19937 rng(13);
    std::uniform_int_distribution<long> num(-1000, 1000);
    std::uniform_int_distribution<long> den(1, 1000);
    for (int i = 0; i < 500; ++i) {
        Rational a(num(rng), den(rng));
        Rational b(num(rng), den(rng));
        CHECK((a + b) - b == a);
        if (!a.is_zero()) {
            CHECK(a * a.inverse() == Rational(1));
            CHECK(a / a == Rational(1));
        }
    }
}

TEST_CASE("ordering and printing") {
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational(-1, 2) < Rational(0));
    CHECK(Rational(5, 10).str() == "1/2");
    CHECK(Rational(-7).str() == "-7");
}
