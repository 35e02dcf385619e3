#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "sobocomp/errors.hpp"

namespace sobocomp {

// Exact rational on int64 with 128-bit intermediates. Overflow is an error,
// never a silent wrap; exponent work stays far below the limits.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(long long n) : num_(n), den_(1) {}
    Rational(long long n, long long d) {
        if (d == 0) fail_pre("rational: zero denominator");
        if (d < 0) { n = -n; d = -d; }
        long long g = std::gcd(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        num_ = n;
        den_ = d;
    }

    long long num() const { return num_; }
    long long den() const { return den_; }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    // Exact conversion from a finite double (every double is dyadic).
    static Rational from_double(double x) {
        if (!std::isfinite(x)) fail_pre("rational: non-finite value");
        if (x == 0.0) return Rational(0);
        int e = 0;
        double m = std::frexp(x, &e);  // x = m * 2^e, |m| in [0.5, 1)
        long long mant = static_cast<long long>(std::ldexp(m, 53));
        e -= 53;
        Rational r(mant);
        while (e > 0) { r = mul_checked(r, Rational(2)); --e; }
        while (e < 0) { r = mul_checked(r, Rational(1, 2)); ++e; }
        return r;
    }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make_checked(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return make_checked(i128(a.num_) * b.den_ - i128(b.num_) * a.den_, i128(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make_checked(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) fail_pre("rational: division by zero");
        return make_checked(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
    }
    Rational operator-() const { return Rational(-num_, den_); }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

private:
    using i128 = __int128;

    static Rational make_checked(i128 n, i128 d) {
        if (d == 0) fail_pre("rational: zero denominator");
        if (d < 0) { n = -n; d = -d; }
        i128 an = n < 0 ? -n : n;
        i128 g = gcd128(an, d);
        if (g > 1) { n /= g; d /= g; }
        constexpr i128 lim = std::numeric_limits<long long>::max();
        if (n > lim || n < -lim || d > lim) fail_invariant("rational: overflow");
        Rational r;
        r.num_ = static_cast<long long>(n);
        r.den_ = static_cast<long long>(d);
        return r;
    }

    static Rational mul_checked(const Rational& a, const Rational& b) { return a * b; }

    static i128 gcd128(i128 a, i128 b) {
        while (b != 0) { i128 t = a % b; a = b; b = t; }
        return a;
    }

    long long num_;
    long long den_;
};

// Integrability exponent: an exact rational or +infinity. 1/inf = 0 is a
// first-class rule so the inf cases run through the same formulas.
class Exponent {
public:
    Exponent() : value_(Rational(1)) {}
    Exponent(long long n) : value_(Rational(n)) {}
    Exponent(const Rational& r) : value_(r) {}

    static Exponent inf() {
        Exponent e;
        e.value_.reset();
        return e;
    }
    static Exponent of(long long n, long long d = 1) { return Exponent(Rational(n, d)); }

    bool is_inf() const { return !value_.has_value(); }
    const Rational& rat() const {
        if (is_inf()) fail_pre("exponent: infinite where a finite value is required");
        return *value_;
    }

    // 1/p with 1/inf = 0; requires p != 0.
    Rational reciprocal() const {
        if (is_inf()) return Rational(0);
        return Rational(1) / *value_;
    }

    double to_double() const {
        return is_inf() ? std::numeric_limits<double>::infinity() : value_->to_double();
    }

    std::string str() const { return is_inf() ? "inf" : value_->str(); }

    friend bool operator==(const Exponent& a, const Exponent& b) {
        if (a.is_inf() || b.is_inf()) return a.is_inf() == b.is_inf();
        return *a.value_ == *b.value_;
    }
    friend bool operator!=(const Exponent& a, const Exponent& b) { return !(a == b); }
    friend bool operator<(const Exponent& a, const Exponent& b) {
        if (a.is_inf()) return false;
        if (b.is_inf()) return true;
        return *a.value_ < *b.value_;
    }
    friend bool operator<=(const Exponent& a, const Exponent& b) { return a == b || a < b; }
    friend bool operator>(const Exponent& a, const Exponent& b) { return b < a; }
    friend bool operator>=(const Exponent& a, const Exponent& b) { return b <= a; }

private:
    std::optional<Rational> value_;  // nullopt encodes +infinity
};

}  // namespace sobocomp
