#pragma once

#include <compare>
#include <cstdlib>
#include <numeric>
#include <string>

#include "error.hpp"

namespace dvlab {

/// Small exact rational, always reduced with positive denominator.
class Rational {
public:
    constexpr Rational() = default;
    Rational(long num, long den = 1)
    {
        if (den == 0)
            fail(ErrorCode::InvalidParams, "zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const long g = std::gcd(std::labs(num), den);
        num_ = g ? num / g : 0;
        den_ = g ? den / g : 1;
    }

    long num() const { return num_; }
    long den() const { return den_; }

    std::string str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

    static Rational parse(const std::string& s)
    {
        const auto slash = s.find('/');
        try {
            if (slash == std::string::npos)
                return Rational(std::stol(s));
            return Rational(std::stol(s.substr(0, slash)), std::stol(s.substr(slash + 1)));
        } catch (const std::exception&) {
            fail(ErrorCode::ParseError, "bad fraction '" + s + "'");
        }
    }

    friend Rational operator+(Rational x, Rational y) { return {x.num_ * y.den_ + y.num_ * x.den_, x.den_ * y.den_}; }
    friend Rational operator-(Rational x, Rational y) { return {x.num_ * y.den_ - y.num_ * x.den_, x.den_ * y.den_}; }
    friend Rational operator*(Rational x, Rational y) { return {x.num_ * y.num_, x.den_ * y.den_}; }
    friend bool operator==(const Rational&, const Rational&) = default;
    friend std::strong_ordering operator<=>(const Rational& x, const Rational& y)
    {
        return x.num_ * y.den_ <=> y.num_ * x.den_;
    }

private:
    long num_ = 0;
    long den_ = 1;
};

} // namespace dvlab
