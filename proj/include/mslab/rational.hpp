#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

namespace mslab {

class Rational {
public:
    Rational() : v_(0) {}
    Rational(int x) : v_(x) {}
    Rational(long x) : v_(x) {}
    Rational(long long x) : v_(static_cast<long>(x)) {}
    Rational(const mpz_class& n) : v_(n) {}
    Rational(const mpz_class& n, const mpz_class& d) : v_(n, d) {
        if (d == 0) throw std::domain_error("zero denominator");
        v_.canonicalize();
    }
    explicit Rational(const mpq_class& q) : v_(q) { v_.canonicalize(); }

    // Accepts "p", "-p", "p/q".
    static Rational parse(const std::string& s) {
        if (s.empty()) throw std::invalid_argument("empty rational");
        auto slash = s.find('/');
        auto is_int = [](const std::string& t) {
            std::size_t i = (!t.empty() && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
            if (i >= t.size()) return false;
            for (; i < t.size(); ++i)
                if (t[i] < '0' || t[i] > '9') return false;
            return true;
        };
        auto strip = [](std::string t) { return (!t.empty() && t[0] == '+') ? t.substr(1) : t; };
        if (slash == std::string::npos) {
            if (!is_int(s)) throw std::invalid_argument("malformed rational: " + s);
            return Rational(mpz_class(strip(s)));
        }
        std::string a = s.substr(0, slash), b = s.substr(slash + 1);
        if (!is_int(a) || !is_int(b)) throw std::invalid_argument("malformed rational: " + s);
        mpz_class d(strip(b));
        if (d == 0) throw std::invalid_argument("zero denominator: " + s);
        return Rational(mpz_class(strip(a)), d);
    }

    mpz_class num() const { return v_.get_num(); }
    mpz_class den() const { return v_.get_den(); }
    const mpq_class& raw() const { return v_; }

    bool is_zero() const { return sgn(v_) == 0; }
    int sign() const { return sgn(v_); }
    bool is_integer() const { return v_.get_den() == 1; }

    std::string str() const {
        if (v_.get_den() == 1) return v_.get_num().get_str();
        return v_.get_num().get_str() + "/" + v_.get_den().get_str();
    }

    Rational operator-() const { return Rational(mpq_class(-v_)); }
    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o) {
        if (o.is_zero()) throw std::domain_error("division by zero");
        v_ /= o.v_;
        return *this;
    }
    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
    friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
    friend bool operator!=(const Rational& a, const Rational& b) { return a.v_ != b.v_; }
    friend bool operator<(const Rational& a, const Rational& b) { return a.v_ < b.v_; }
    friend bool operator<=(const Rational& a, const Rational& b) { return a.v_ <= b.v_; }
    friend bool operator>(const Rational& a, const Rational& b) { return a.v_ > b.v_; }
    friend bool operator>=(const Rational& a, const Rational& b) { return a.v_ >= b.v_; }
    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

    Rational inverse() const {
        if (is_zero()) throw std::domain_error("inverse of zero");
        return Rational(mpq_class(1 / v_));
    }
    Rational abs() const { return sign() < 0 ? -*this : *this; }

    // Floor as an integer; only valid when it fits in a long.
    long floor_long() const {
        mpz_class q;
        mpz_fdiv_q(q.get_mpz_t(), v_.get_num_mpz_t(), v_.get_den_mpz_t());
        if (!q.fits_slong_p()) throw std::overflow_error("floor out of range");
        return q.get_si();
    }

    long to_long() const {
        if (!is_integer() || !v_.get_num().fits_slong_p()) throw std::domain_error("not a small integer: " + str());
        return v_.get_num().get_si();
    }

    // Exact square root when this is a square in Q.
    bool sqrt_exact(Rational& out) const {
        if (sign() < 0) return false;
        mpz_class n = v_.get_num(), d = v_.get_den();
        if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t())) return false;
        mpz_class rn, rd;
        mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
        mpz_sqrt(rd.get_mpz_t(), d.get_mpz_t());
        out = Rational(rn, rd);
        return true;
    }

private:
    mpq_class v_;
};

inline bool is_zero(const Rational& x) { return x.is_zero(); }
inline bool is_unit(const Rational& x) { return !x.is_zero(); }
inline std::string to_string(const Rational& x) { return x.str(); }

// Dispatch through ADL; usable inside classes that have an is_zero() member.
template <class T>
bool scalar_is_zero(const T& x) { return is_zero(x); }

}  // namespace mslab
