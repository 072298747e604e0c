#pragma once

#include "matrix.hpp"
#include "polynomial.hpp"

namespace mslab {

// det(t - A) by Faddeev-LeVerrier.
inline Polynomial characteristic_polynomial(const Matrix<Rational>& A) {
    int n = A.rows();
    std::vector<Rational> c(n + 1);
    c[n] = 1;
    Matrix<Rational> M(n, n);
    Matrix<Rational> I = Matrix<Rational>::identity(n);
    for (int k = 1; k <= n; ++k) {
        M = A * M + c[n - k + 1] * I;
        c[n - k] = -(A * M).trace() / Rational(k);
    }
    return Polynomial(c);
}

inline std::vector<int> integer_spectrum(const Matrix<Rational>& Y) {
    std::vector<int> out;
    for (auto& r : rational_roots(characteristic_polynomial(Y))) {
        if (!r.is_integer()) throw std::domain_error("non-integer eigenvalue " + r.str());
        out.push_back(static_cast<int>(r.to_long()));
    }
    return out;
}

}  // namespace mslab
