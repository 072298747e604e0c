#pragma once

#include "matrix.hpp"
#include "rational_function.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace mslab {

// Truncated Laurent series in y at y = infinity:
//   sum_{m = lead_order}^{-truncation_order} coeffs[lead_order - m] y^m,
// exact up to O(y^{-truncation_order-1}).
template <class C>
struct LaurentSeries {
    int lead_order = 0;
    int truncation_order = 0;
    std::vector<C> coeffs;
    C zero{};

    // coefficient of y^m
    C coefficient(int m) const {
        int i = lead_order - m;
        if (m < -truncation_order) throw std::out_of_range("coefficient beyond truncation order");
        if (i < 0 || i >= static_cast<int>(coeffs.size())) return zero;
        return coeffs[i];
    }
    int lowest_power() const { return -truncation_order; }
};

using Series = LaurentSeries<Rational>;
using MatrixSeries = LaurentSeries<Matrix<Rational>>;

namespace detail {

// c_0 + c_1 t + ... of a(t)/b(t) with b(0) != 0, up to t^n
inline std::vector<Rational> power_series_quotient(const Polynomial& a, const Polynomial& b, int n) {
    std::vector<Rational> c(n + 1);
    Rational b0inv = b.coeff(0).inverse();
    for (int i = 0; i <= n; ++i) {
        Rational s = a.coeff(i);
        for (int j = 1; j <= std::min(i, b.degree()); ++j) s -= b.coeff(j) * c[i - j];
        c[i] = s * b0inv;
    }
    return c;
}

}  // namespace detail

inline Series laurent_expand(const RationalFunction& f, int order) {
    if (order < 0) throw std::invalid_argument("laurent_expand: negative order");
    Series s;
    s.truncation_order = order;
    if (f.is_zero()) {
        s.lead_order = -order;
        s.coeffs = {Rational(0)};
        return s;
    }
    int p = f.num().degree(), q = f.den().degree();
    int lead = p - q;
    if (lead < -order) {
        s.lead_order = -order;
        s.coeffs = {Rational(0)};
        return s;
    }
    // f = y^{p-q} Pr(t)/Qr(t) with t = 1/y
    Polynomial Pr = f.num().reversed(p), Qr = f.den().reversed(q);
    s.lead_order = lead;
    s.coeffs = detail::power_series_quotient(Pr, Qr, lead + order);
    return s;
}

inline MatrixSeries laurent_expand(const Matrix<RationalFunction>& m, int order) {
    MatrixSeries s;
    s.truncation_order = order;
    s.zero = Matrix<Rational>(m.rows(), m.cols());
    int lead = -order;
    std::vector<Series> es;
    for (auto& x : m.data()) {
        es.push_back(laurent_expand(x, order));
        if (!x.is_zero()) lead = std::max(lead, es.back().lead_order);
    }
    s.lead_order = lead;
    for (int pw = lead; pw >= -order; --pw) {
        Matrix<Rational> c(m.rows(), m.cols());
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j) c(i, j) = es[i * m.cols() + j].coefficient(pw);
        s.coeffs.push_back(std::move(c));
    }
    return s;
}

inline Series operator+(const Series& a, const Series& b) {
    Series s;
    s.truncation_order = std::min(a.truncation_order, b.truncation_order);
    s.lead_order = std::max(a.lead_order, b.lead_order);
    for (int m = s.lead_order; m >= -s.truncation_order; --m) s.coeffs.push_back(a.coefficient(m) + b.coefficient(m));
    return s;
}

inline Series operator*(const Series& a, const Series& b) {
    Series s;
    s.truncation_order = std::min(a.truncation_order - b.lead_order, b.truncation_order - a.lead_order);
    s.lead_order = a.lead_order + b.lead_order;
    for (int m = s.lead_order; m >= -s.truncation_order; --m) {
        Rational c;
        for (int i = a.lead_order; i >= -a.truncation_order; --i) {
            int j = m - i;
            if (j > b.lead_order || j < -b.truncation_order) continue;
            c += a.coefficient(i) * b.coefficient(j);
        }
        s.coeffs.push_back(c);
    }
    return s;
}

// Equal as truncated series up to the smaller truncation order.
inline bool series_equal(const Series& a, const Series& b) {
    int t = std::min(a.truncation_order, b.truncation_order);
    int top = std::max(a.lead_order, b.lead_order);
    for (int m = top; m >= -t; --m) {
        Rational x = m <= a.lead_order ? a.coefficient(m) : Rational(0);
        Rational y = m <= b.lead_order ? b.coefficient(m) : Rational(0);
        if (x != y) return false;
    }
    return true;
}

inline bool is_zero_value(const Rational& x) { return x.is_zero(); }
inline bool is_zero_value(const Matrix<Rational>& x) { return x.is_zero(); }

// Highest power with a nonzero coefficient; returns lowest_power()-1 if none.
template <class C>
int effective_lead(const LaurentSeries<C>& s) {
    for (int m = s.lead_order; m >= -s.truncation_order; --m)
        if (!is_zero_value(s.coefficient(m))) return m;
    return -s.truncation_order - 1;
}

inline std::string series_str(const Series& s, const std::string& var = "y") {
    std::string out;
    for (int m = s.lead_order; m >= -s.truncation_order; --m) {
        Rational c = s.coefficient(m);
        if (c.is_zero()) continue;
        std::string mag = c.abs().str();
        if (!out.empty()) out += c.sign() < 0 ? " - " : " + ";
        else if (c.sign() < 0) out += "-";
        if (m == 0) out += mag;
        else {
            if (mag != "1") out += mag + "*";
            out += var;
            if (m != 1) out += "^" + std::to_string(m);
        }
    }
    if (out.empty()) out = "0";
    return out + " + O(" + var + "^" + std::to_string(-s.truncation_order - 1) + ")";
}

// Expansion of f(s) at s = 0: coefficient of s^k for low <= k <= order.
struct SeriesAtZero {
    int low_order = 0;
    int truncation_order = 0;
    std::vector<Rational> coeffs;
    Rational coefficient(int k) const {
        if (k > truncation_order) throw std::out_of_range("coefficient beyond truncation order");
        int i = k - low_order;
        if (i < 0 || i >= static_cast<int>(coeffs.size())) return Rational(0);
        return coeffs[i];
    }
};

inline SeriesAtZero laurent_expand_at_zero(const RationalFunction& f, int order) {
    SeriesAtZero z;
    z.truncation_order = order;
    if (f.is_zero()) { z.low_order = order; z.coeffs = {Rational(0)}; return z; }
    int lp = f.num().low_degree(), lq = f.den().low_degree();
    z.low_order = lp - lq;
    if (z.low_order > order) { z.low_order = order; z.coeffs = {Rational(0)}; return z; }
    std::vector<Rational> a(f.num().coeffs().begin() + lp, f.num().coeffs().end());
    std::vector<Rational> b(f.den().coeffs().begin() + lq, f.den().coeffs().end());
    z.coeffs = detail::power_series_quotient(Polynomial(a), Polynomial(b), order - z.low_order);
    return z;
}

}  // namespace mslab
