#pragma once

#include "rational.hpp"

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace mslab {

// Univariate polynomial over Q, coefficients lowest degree first.
class Polynomial {
public:
    Polynomial() = default;
    Polynomial(const Rational& c) { if (!c.is_zero()) c_.push_back(c); }
    Polynomial(int c) : Polynomial(Rational(c)) {}
    explicit Polynomial(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }

    static Polynomial monomial(const Rational& c, int deg) {
        std::vector<Rational> v(deg + 1);
        v[deg] = c;
        return Polynomial(std::move(v));
    }
    static Polynomial y() { return monomial(1, 1); }

    int degree() const { return c_.empty() ? -1 : static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<Rational>& coeffs() const { return c_; }
    Rational coeff(int i) const { return (i >= 0 && i < static_cast<int>(c_.size())) ? c_[i] : Rational(0); }
    Rational lead() const { return c_.empty() ? Rational(0) : c_.back(); }

    Rational operator()(const Rational& x) const {
        Rational r;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
        return r;
    }

    Polynomial& operator+=(const Polynomial& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
        for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
        trim();
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
        for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
        trim();
        return *this;
    }
    Polynomial operator-() const {
        Polynomial r = *this;
        for (auto& x : r.c_) x = -x;
        return r;
    }
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<Rational> r(a.c_.size() + b.c_.size() - 1);
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            if (a.c_[i].is_zero()) continue;
            for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
        }
        return Polynomial(std::move(r));
    }
    Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }
    Polynomial scaled(const Rational& s) const {
        if (s.is_zero()) return {};
        Polynomial r = *this;
        for (auto& x : r.c_) x *= s;
        return r;
    }
    friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.c_ == b.c_; }
    friend bool operator!=(const Polynomial& a, const Polynomial& b) { return !(a == b); }

    // Euclidean division: *this = q*d + r with deg r < deg d.
    std::pair<Polynomial, Polynomial> divmod(const Polynomial& d) const {
        if (d.is_zero()) throw std::domain_error("polynomial division by zero");
        std::vector<Rational> r = c_;
        int dd = d.degree();
        if (degree() < dd) return {Polynomial(), *this};
        std::vector<Rational> q(degree() - dd + 1);
        Rational inv = d.lead().inverse();
        for (int i = degree(); i >= dd; --i) {
            if (r[i].is_zero()) continue;
            Rational f = r[i] * inv;
            q[i - dd] = f;
            for (int j = 0; j <= dd; ++j) r[i - dd + j] -= f * d.c_[j];
        }
        r.resize(dd);
        return {Polynomial(std::move(q)), Polynomial(std::move(r))};
    }

    Polynomial monic() const { return is_zero() ? *this : scaled(lead().inverse()); }

    // p(y) -> p(y^k)
    Polynomial substitute_power(int k) const {
        if (is_zero()) return {};
        std::vector<Rational> r(static_cast<std::size_t>(degree()) * k + 1);
        for (std::size_t i = 0; i < c_.size(); ++i) r[i * k] = c_[i];
        return Polynomial(std::move(r));
    }

    // y^deg * p(1/y)
    Polynomial reversed(int deg) const {
        std::vector<Rational> r(deg + 1);
        for (int i = 0; i <= degree(); ++i) r[deg - i] = c_[i];
        return Polynomial(std::move(r));
    }

    int low_degree() const {
        for (std::size_t i = 0; i < c_.size(); ++i)
            if (!c_[i].is_zero()) return static_cast<int>(i);
        return -1;
    }

    Polynomial derivative() const {
        if (c_.size() <= 1) return {};
        std::vector<Rational> r(c_.size() - 1);
        for (std::size_t i = 1; i < c_.size(); ++i) r[i - 1] = c_[i] * Rational(static_cast<long>(i));
        return Polynomial(std::move(r));
    }

    std::string str(const std::string& var = "y") const {
        if (is_zero()) return "0";
        std::string s;
        for (int i = degree(); i >= 0; --i) {
            const Rational& a = c_[i];
            if (a.is_zero()) continue;
            std::string mag = a.abs().str();
            if (!s.empty()) s += a.sign() < 0 ? " - " : " + ";
            else if (a.sign() < 0) s += "-";
            if (i == 0) s += mag;
            else {
                if (mag != "1") s += mag + "*";
                s += var;
                if (i > 1) s += "^" + std::to_string(i);
            }
        }
        return s;
    }

private:
    void trim() {
        while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
    }
    std::vector<Rational> c_;
};

inline Polynomial gcd(Polynomial a, Polynomial b) {
    while (!b.is_zero()) {
        Polynomial r = a.divmod(b).second;
        a = std::move(b);
        b = std::move(r);
    }
    return a.monic();
}

namespace detail {

inline std::vector<mpz_class> positive_divisors(mpz_class n) {
    if (n < 0) n = -n;
    if (n == 0) return {};
    if (mpz_sizeinbase(n.get_mpz_t(), 2) > 48) throw std::overflow_error("coefficient too large for rational root search");
    std::vector<mpz_class> small, large;
    for (mpz_class d = 1; d * d <= n; ++d) {
        if (n % d == 0) {
            small.push_back(d);
            if (d * d != n) large.push_back(n / d);
        }
    }
    small.insert(small.end(), large.rbegin(), large.rend());
    return small;
}

}  // namespace detail

// Distinct rational roots, ascending.
inline std::vector<Rational> rational_roots(const Polynomial& p) {
    std::vector<Rational> roots;
    if (p.degree() <= 0) return roots;
    int low = p.low_degree();
    if (low > 0) roots.push_back(Rational(0));
    // integer primitive polynomial without the zero roots
    mpz_class l = 1;
    for (const auto& c : p.coeffs()) l = lcm(l, c.den());
    std::vector<mpz_class> z;
    for (std::size_t i = low; i < p.coeffs().size(); ++i) z.push_back((p.coeffs()[i] * Rational(l)).num());
    if (z.size() > 1) {
        auto ps = detail::positive_divisors(z.front());
        auto qs = detail::positive_divisors(z.back());
        Polynomial q;
        {
            std::vector<Rational> c;
            for (auto& x : z) c.push_back(Rational(x));
            q = Polynomial(std::move(c));
        }
        for (const auto& a : ps)
            for (const auto& b : qs) {
                if (gcd(a, b) != 1) continue;
                for (int s : {1, -1}) {
                    Rational r(a * s, b);
                    if (q(r).is_zero()) roots.push_back(r);
                }
            }
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return roots;
}

}  // namespace mslab
