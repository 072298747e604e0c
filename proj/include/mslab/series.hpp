#pragma once

#include "matrix.hpp"

#include <climits>
#include <map>
#include <string>
#include <vector>

namespace mslab {

// Power series in one variable s modulo s^{order+1}. Constants carry an
// unbounded order so they mix with any truncation.
class PowerSeries {
public:
    static constexpr int kExact = INT_MAX;

    PowerSeries() = default;
    PowerSeries(int x) : PowerSeries(Rational(x)) {}
    PowerSeries(const Rational& x) {
        if (!x.is_zero()) c_ = {x};
    }
    PowerSeries(std::vector<Rational> c, int order) : c_(std::move(c)), order_(order) { normalize(); }

    static PowerSeries variable(int order) {
        PowerSeries s({Rational(0), Rational(1)}, order);
        return s;
    }

    int order() const { return order_; }
    Rational coeff(int k) const { return k < static_cast<int>(c_.size()) ? c_[k] : Rational(); }
    int terms() const { return static_cast<int>(c_.size()); }
    bool is_zero() const { return c_.empty(); }
    // lowest power with a nonzero coefficient, or -1 for zero
    int valuation() const {
        for (std::size_t k = 0; k < c_.size(); ++k)
            if (!c_[k].is_zero()) return static_cast<int>(k);
        return -1;
    }

    PowerSeries operator-() const {
        PowerSeries r = *this;
        for (auto& x : r.c_) x = -x;
        return r;
    }
    friend PowerSeries operator+(const PowerSeries& a, const PowerSeries& b) {
        PowerSeries r;
        r.order_ = std::min(a.order_, b.order_);
        r.c_.resize(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t k = 0; k < r.c_.size(); ++k) r.c_[k] = a.coeff(static_cast<int>(k)) + b.coeff(static_cast<int>(k));
        r.normalize();
        return r;
    }
    friend PowerSeries operator-(const PowerSeries& a, const PowerSeries& b) { return a + (-b); }
    friend PowerSeries operator*(const PowerSeries& a, const PowerSeries& b) {
        PowerSeries r;
        r.order_ = std::min(a.order_, b.order_);
        if (a.c_.empty() || b.c_.empty()) return r;
        std::size_t n = a.c_.size() + b.c_.size() - 1;
        if (r.order_ != kExact) n = std::min<std::size_t>(n, static_cast<std::size_t>(r.order_) + 1);
        r.c_.assign(n, Rational());
        for (std::size_t i = 0; i < a.c_.size() && i < n; ++i) {
            if (a.c_[i].is_zero()) continue;
            for (std::size_t j = 0; j < b.c_.size() && i + j < n; ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
        }
        r.normalize();
        return r;
    }
    PowerSeries inverse() const {
        if (!is_unit()) throw std::domain_error("PowerSeries: inverse of a non-unit");
        if (c_.size() == 1) return PowerSeries(c_[0].inverse());
        if (order_ == kExact) throw std::domain_error("PowerSeries: inverse of an exact polynomial needs a truncation order");
        std::vector<Rational> r(order_ + 1);
        Rational inv0 = c_[0].inverse();
        for (int k = 0; k <= order_; ++k) {
            Rational s = k == 0 ? Rational(1) : Rational(0);
            for (int j = 1; j <= k && j < static_cast<int>(c_.size()); ++j) s -= c_[j] * r[k - j];
            r[k] = s * inv0;
        }
        return PowerSeries(r, order_);
    }
    friend PowerSeries operator/(const PowerSeries& a, const PowerSeries& b) { return a * b.inverse(); }
    PowerSeries& operator+=(const PowerSeries& o) { return *this = *this + o; }
    PowerSeries& operator-=(const PowerSeries& o) { return *this = *this - o; }
    PowerSeries& operator*=(const PowerSeries& o) { return *this = *this * o; }
    PowerSeries& operator/=(const PowerSeries& o) { return *this = *this / o; }
    // equality up to the common truncation
    friend bool operator==(const PowerSeries& a, const PowerSeries& b) {
        int o = std::min(a.order_, b.order_);
        std::size_t n = std::max(a.c_.size(), b.c_.size());
        for (std::size_t k = 0; k < n; ++k) {
            if (o != kExact && static_cast<int>(k) > o) break;
            if (a.coeff(static_cast<int>(k)) != b.coeff(static_cast<int>(k))) return false;
        }
        return true;
    }
    friend bool operator!=(const PowerSeries& a, const PowerSeries& b) { return !(a == b); }
    bool is_unit() const { return !c_.empty() && !c_[0].is_zero(); }

    std::string str(const std::string& var = "s") const {
        std::string out;
        for (std::size_t k = 0; k < c_.size(); ++k) {
            if (c_[k].is_zero()) continue;
            if (!out.empty()) out += " + ";
            out += c_[k].str();
            if (k > 0) out += "*" + var + (k > 1 ? "^" + std::to_string(k) : "");
        }
        if (out.empty()) out = "0";
        if (order_ != kExact) out += " + O(" + var + "^" + std::to_string(order_ + 1) + ")";
        return out;
    }

private:
    void normalize() {
        if (order_ != kExact && static_cast<int>(c_.size()) > order_ + 1) c_.resize(order_ + 1);
        while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
    }
    std::vector<Rational> c_;
    int order_ = kExact;
};

inline bool is_zero(const PowerSeries& x) { return x.is_zero(); }
inline bool is_unit(const PowerSeries& x) { return x.is_unit(); }

inline Matrix<Rational> series_coefficient(const Matrix<PowerSeries>& m, int k) {
    Matrix<Rational> r(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) r(i, j) = m(i, j).coeff(k);
    return r;
}

inline Matrix<PowerSeries> with_order(const Matrix<PowerSeries>& m, int order) {
    Matrix<PowerSeries> r(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) {
            std::vector<Rational> c;
            for (int k = 0; k < m(i, j).terms(); ++k) c.push_back(m(i, j).coeff(k));
            r(i, j) = PowerSeries(c, order);
        }
    return r;
}

// Sparse Laurent polynomial in several variables with coefficients in C.
// Exponents may be negative, so exponent checks can report violations.
template <class C>
struct MultiPoly {
    int nvars = 0;
    std::map<std::vector<int>, C> terms;

    void add(const std::vector<int>& e, const C& c) {
        auto it = terms.find(e);
        if (it == terms.end()) {
            if (!is_zero_coeff(c)) terms.emplace(e, c);
            return;
        }
        it->second += c;
        if (is_zero_coeff(it->second)) terms.erase(it);
    }
    bool denominator_free() const {
        for (auto& [e, c] : terms)
            for (int x : e)
                if (x < 0) return false;
        return true;
    }
    // monomials with a negative exponent
    std::vector<std::vector<int>> offending() const {
        std::vector<std::vector<int>> out;
        for (auto& [e, c] : terms)
            for (int x : e)
                if (x < 0) { out.push_back(e); break; }
        return out;
    }
    // substitute values; monomials with a nonzero exponent on a zero variable vanish
    C evaluate(const std::vector<Rational>& vals, const C& zero) const {
        C out = zero;
        for (auto& [e, c] : terms) {
            Rational m = 1;
            bool vanish = false;
            for (int i = 0; i < nvars; ++i) {
                if (e[i] == 0) continue;
                if (vals[i].is_zero()) {
                    if (e[i] < 0) throw std::domain_error("MultiPoly: negative power of a zero value");
                    vanish = true;
                    break;
                }
                Rational p = 1;
                for (int k = 0; k < std::abs(e[i]); ++k) p *= vals[i];
                m *= e[i] > 0 ? p : p.inverse();
            }
            if (!vanish) out += m * c;
        }
        return out;
    }

private:
    static bool is_zero_coeff(const C& c) {
        if constexpr (std::is_same_v<C, Rational>) return c.is_zero();
        else return c.is_zero();
    }
};

}  // namespace mslab
