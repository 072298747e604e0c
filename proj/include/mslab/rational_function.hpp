#pragma once

#include "polynomial.hpp"

#include <string>

namespace mslab {

// Element of Q(y): num/den with gcd 1 and den monic.
class RationalFunction {
public:
    RationalFunction() : num_(), den_(1) {}
    RationalFunction(int c) : num_(c), den_(1) {}
    RationalFunction(const Rational& c) : num_(c), den_(1) {}
    RationalFunction(const Polynomial& p) : num_(p), den_(1) {}
    RationalFunction(Polynomial n, Polynomial d) : num_(std::move(n)), den_(std::move(d)) { normalize(); }

    static RationalFunction y() { return RationalFunction(Polynomial::y()); }

    const Polynomial& num() const { return num_; }
    const Polynomial& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_constant() const { return num_.degree() <= 0 && den_.degree() == 0; }
    Rational constant() const { return num_.coeff(0); }

    Rational operator()(const Rational& x) const {
        Rational d = den_(x);
        if (d.is_zero()) throw std::domain_error("pole at evaluation point");
        return num_(x) / d;
    }

    RationalFunction operator-() const { return RationalFunction(-num_, den_, true); }

    friend RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        if (a.den_ == b.den_) return RationalFunction(a.num_ + b.num_, a.den_);
        if (a.den_.degree() == 0) return RationalFunction(a.num_ * b.den_ + b.num_, b.den_, true);
        if (b.den_.degree() == 0) return RationalFunction(a.num_ + b.num_ * a.den_, a.den_, true);
        Polynomial g = gcd(a.den_, b.den_);
        if (g.degree() == 0) return RationalFunction(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_, true);
        Polynomial ad = a.den_.divmod(g).first, bd = b.den_.divmod(g).first;
        return RationalFunction(a.num_ * bd + b.num_ * ad, ad * b.den_);
    }
    friend RationalFunction operator-(const RationalFunction& a, const RationalFunction& b) { return a + (-b); }
    friend RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) {
        if (a.is_zero() || b.is_zero()) return {};
        if (a.den_.degree() == 0 && b.den_.degree() == 0) return RationalFunction(a.num_ * b.num_, Polynomial(1), true);
        Polynomial g1 = gcd(a.num_, b.den_), g2 = gcd(b.num_, a.den_);
        Polynomial an = a.num_.divmod(g1).first, bd = b.den_.divmod(g1).first;
        Polynomial bn = b.num_.divmod(g2).first, ad = a.den_.divmod(g2).first;
        Polynomial n = an * bn, d = ad * bd;
        Rational l = d.lead();
        return RationalFunction(n.scaled(l.inverse()), d.scaled(l.inverse()), true);
    }
    RationalFunction inverse() const {
        if (is_zero()) throw std::domain_error("inverse of zero rational function");
        return RationalFunction(den_, num_);
    }
    friend RationalFunction operator/(const RationalFunction& a, const RationalFunction& b) { return a * b.inverse(); }
    RationalFunction& operator+=(const RationalFunction& o) { return *this = *this + o; }
    RationalFunction& operator-=(const RationalFunction& o) { return *this = *this - o; }
    RationalFunction& operator*=(const RationalFunction& o) { return *this = *this * o; }
    RationalFunction& operator/=(const RationalFunction& o) { return *this = *this / o; }
    friend bool operator==(const RationalFunction& a, const RationalFunction& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const RationalFunction& a, const RationalFunction& b) { return !(a == b); }

    // f(y) -> f(y^k)
    RationalFunction substitute_power(int k) const {
        return RationalFunction(num_.substitute_power(k), den_.substitute_power(k), true);
    }

    std::string str() const {
        if (den_.degree() == 0) return num_.str();
        return "(" + num_.str() + ")/(" + den_.str() + ")";
    }

private:
    // already reduced
    RationalFunction(Polynomial n, Polynomial d, bool) : num_(std::move(n)), den_(std::move(d)) {
        if (num_.is_zero()) den_ = Polynomial(1);
    }
    void normalize() {
        if (den_.is_zero()) throw std::domain_error("zero denominator");
        if (num_.is_zero()) { den_ = Polynomial(1); return; }
        Polynomial g = gcd(num_, den_);
        if (g.degree() > 0) {
            num_ = num_.divmod(g).first;
            den_ = den_.divmod(g).first;
        }
        Rational l = den_.lead();
        if (l != 1) {
            num_ = num_.scaled(l.inverse());
            den_ = den_.scaled(l.inverse());
        }
    }
    Polynomial num_, den_;
};

inline bool is_zero(const RationalFunction& x) { return x.is_zero(); }
inline bool is_unit(const RationalFunction& x) { return !x.is_zero(); }
inline std::string to_string(const RationalFunction& x) { return x.str(); }

}  // namespace mslab
