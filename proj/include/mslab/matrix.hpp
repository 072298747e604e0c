#pragma once

#include "rational.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mslab {

// Dense row-major matrix over a scalar type F. F must provide +,-,*,/,
// construction from int and Rational, and free functions is_zero / is_unit.
template <class F>
class Matrix {
public:
    using scalar_type = F;

    Matrix() = default;
    Matrix(int rows, int cols) : r_(rows), c_(cols), a_(static_cast<std::size_t>(rows) * cols, F(0)) {}
    Matrix(int rows, int cols, std::vector<F> data) : r_(rows), c_(cols), a_(std::move(data)) {
        if (a_.size() != static_cast<std::size_t>(rows) * cols) throw std::invalid_argument("matrix data size");
    }
    Matrix(std::initializer_list<std::initializer_list<F>> rows) {
        r_ = static_cast<int>(rows.size());
        c_ = r_ ? static_cast<int>(rows.begin()->size()) : 0;
        for (auto& row : rows) {
            if (static_cast<int>(row.size()) != c_) throw std::invalid_argument("ragged matrix");
            for (auto& x : row) a_.push_back(x);
        }
    }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = F(1);
        return m;
    }
    static Matrix diagonal(const std::vector<F>& d) {
        Matrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }
    // E_{ij} in 1-based math notation is unit(n, i-1, j-1).
    static Matrix unit(int n, int i, int j) {
        Matrix m(n, n);
        m(i, j) = F(1);
        return m;
    }
    static Matrix column(const std::vector<F>& v) {
        return Matrix(static_cast<int>(v.size()), 1, v);
    }

    int rows() const { return r_; }
    int cols() const { return c_; }
    bool square() const { return r_ == c_; }
    F& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * c_ + j]; }
    const F& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * c_ + j]; }
    const std::vector<F>& data() const { return a_; }

    bool is_zero() const {
        for (auto& x : a_)
            if (!scalar_is_zero(x)) return false;
        return true;
    }

    std::vector<F> col(int j) const {
        std::vector<F> v(r_);
        for (int i = 0; i < r_; ++i) v[i] = (*this)(i, j);
        return v;
    }
    std::vector<F> row(int i) const { return std::vector<F>(a_.begin() + i * c_, a_.begin() + (i + 1) * c_); }

    Matrix transpose() const {
        Matrix t(c_, r_);
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix cols_subset(const std::vector<int>& js) const {
        Matrix m(r_, static_cast<int>(js.size()));
        for (int i = 0; i < r_; ++i)
            for (std::size_t k = 0; k < js.size(); ++k) m(i, k) = (*this)(i, js[k]);
        return m;
    }
    Matrix rows_subset(const std::vector<int>& is) const {
        Matrix m(static_cast<int>(is.size()), c_);
        for (std::size_t k = 0; k < is.size(); ++k)
            for (int j = 0; j < c_; ++j) m(k, j) = (*this)(is[k], j);
        return m;
    }
    Matrix hcat(const Matrix& o) const {
        if (r_ != o.r_ && c_ != 0 && o.c_ != 0) throw std::invalid_argument("hcat row mismatch");
        int r = c_ ? r_ : o.r_;
        Matrix m(r, c_ + o.c_);
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < c_; ++j) m(i, j) = (*this)(i, j);
            for (int j = 0; j < o.c_; ++j) m(i, c_ + j) = o(i, j);
        }
        return m;
    }
    Matrix vcat(const Matrix& o) const {
        if (c_ != o.c_ && r_ != 0 && o.r_ != 0) throw std::invalid_argument("vcat column mismatch");
        int c = r_ ? c_ : o.c_;
        Matrix m(r_ + o.r_, c);
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < c; ++j) m(i, j) = (*this)(i, j);
        for (int i = 0; i < o.r_; ++i)
            for (int j = 0; j < c; ++j) m(r_ + i, j) = o(i, j);
        return m;
    }

    Matrix& operator+=(const Matrix& o) {
        check_same(o);
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        check_same(o);
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
        return *this;
    }
    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    Matrix operator-() const {
        Matrix m = *this;
        for (auto& x : m.a_) x = -x;
        return m;
    }
    friend Matrix operator*(const F& s, Matrix m) {
        for (auto& x : m.a_) x = s * x;
        return m;
    }
    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.c_ != b.r_) throw std::invalid_argument("matrix product shape mismatch");
        Matrix m(a.r_, b.c_);
        for (int i = 0; i < a.r_; ++i)
            for (int k = 0; k < a.c_; ++k) {
                const F& x = a(i, k);
                if (scalar_is_zero(x)) continue;
                for (int j = 0; j < b.c_; ++j) {
                    const F& y = b(k, j);
                    if (!scalar_is_zero(y)) m(i, j) += x * y;
                }
            }
        return m;
    }
    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.r_ == b.r_ && a.c_ == b.c_ && a.a_ == b.a_;
    }
    friend bool operator!=(const Matrix& a, const Matrix& b) { return !(a == b); }

    template <class G, class Fn>
    Matrix<G> map(Fn fn) const {
        std::vector<G> d;
        d.reserve(a_.size());
        for (auto& x : a_) d.push_back(fn(x));
        return Matrix<G>(r_, c_, std::move(d));
    }

    F trace() const {
        F t(0);
        for (int i = 0; i < std::min(r_, c_); ++i) t += (*this)(i, i);
        return t;
    }

    std::string str() const {
        std::string s = "[";
        for (int i = 0; i < r_; ++i) {
            s += i ? ", [" : "[";
            for (int j = 0; j < c_; ++j) s += (j ? ", " : "") + to_string((*this)(i, j));
            s += "]";
        }
        return s + "]";
    }

private:
    void check_same(const Matrix& o) const {
        if (r_ != o.r_ || c_ != o.c_) throw std::invalid_argument("matrix shape mismatch");
    }
    int r_ = 0, c_ = 0;
    std::vector<F> a_;
};

template <class F>
Matrix<F> commutator(const Matrix<F>& a, const Matrix<F>& b) {
    return a * b - b * a;
}

template <class F>
Matrix<F> power(const Matrix<F>& a, int k) {
    Matrix<F> r = Matrix<F>::identity(a.rows());
    for (int i = 0; i < k; ++i) r = r * a;
    return r;
}

template <class G>
Matrix<G> embed(const Matrix<Rational>& m) {
    return m.template map<G>([](const Rational& x) { return G(x); });
}

template <class F>
struct RowEchelon {
    Matrix<F> reduced;
    std::vector<int> pivots;  // pivot column of each nonzero row
};

// Reduced row echelon form. Pivots must be units of F; for a field that is
// every nonzero entry. Raises std::domain_error when a column has nonzero
// entries but none of them is a unit.
template <class F>
RowEchelon<F> rref(Matrix<F> m) {
    RowEchelon<F> out;
    int r = 0;
    for (int c = 0; c < m.cols() && r < m.rows(); ++c) {
        int p = -1;
        bool nonzero = false;
        for (int i = r; i < m.rows(); ++i) {
            if (is_zero(m(i, c))) continue;
            nonzero = true;
            if (is_unit(m(i, c))) { p = i; break; }
        }
        if (p < 0) {
            if (nonzero) throw std::domain_error("no unit pivot available");
            continue;
        }
        if (p != r)
            for (int j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(r, j));
        F inv = F(1) / m(r, c);
        for (int j = c; j < m.cols(); ++j)
            if (!is_zero(m(r, j))) m(r, j) = m(r, j) * inv;
        for (int i = 0; i < m.rows(); ++i) {
            if (i == r || is_zero(m(i, c))) continue;
            F f = m(i, c);
            for (int j = c; j < m.cols(); ++j)
                if (!is_zero(m(r, j))) m(i, j) -= f * m(r, j);
        }
        out.pivots.push_back(c);
        ++r;
    }
    out.reduced = m.rows_subset([&] {
        std::vector<int> is;
        for (int i = 0; i < r; ++i) is.push_back(i);
        return is;
    }());
    if (r == 0) out.reduced = Matrix<F>(0, m.cols());
    return out;
}

template <class F>
int rank(const Matrix<F>& m) {
    return static_cast<int>(rref(m).pivots.size());
}

// Columns form a basis of {x : m x = 0}.
template <class F>
Matrix<F> kernel(const Matrix<F>& m) {
    auto e = rref(m);
    std::vector<bool> piv(m.cols(), false);
    for (int p : e.pivots) piv[p] = true;
    std::vector<int> free;
    for (int j = 0; j < m.cols(); ++j)
        if (!piv[j]) free.push_back(j);
    Matrix<F> k(m.cols(), static_cast<int>(free.size()));
    for (std::size_t t = 0; t < free.size(); ++t) {
        int f = free[t];
        k(f, t) = F(1);
        for (std::size_t i = 0; i < e.pivots.size(); ++i) k(e.pivots[i], t) = -e.reduced(i, f);
    }
    return k;
}

enum class SolveKind { Unique, Parametrized, Empty };

template <class F>
struct SolveResult {
    SolveKind kind = SolveKind::Empty;
    Matrix<F> particular;  // one solution (cols = cols of b) when consistent
    Matrix<F> kernel;      // basis of the homogeneous solutions
    bool consistent() const { return kind != SolveKind::Empty; }
};

// Solve A X = B.
template <class F>
SolveResult<F> solve_linear(const Matrix<F>& A, const Matrix<F>& B) {
    if (A.rows() != B.rows()) throw std::invalid_argument("solve_linear: shape mismatch");
    int n = A.cols();
    auto e = rref(A.hcat(B));
    SolveResult<F> res;
    for (int p : e.pivots)
        if (p >= n) { res.kind = SolveKind::Empty; return res; }
    res.particular = Matrix<F>(n, B.cols());
    for (std::size_t i = 0; i < e.pivots.size(); ++i)
        for (int j = 0; j < B.cols(); ++j) res.particular(e.pivots[i], j) = e.reduced(i, n + j);
    Matrix<F> Ared(static_cast<int>(e.pivots.size()), n);
    for (int i = 0; i < Ared.rows(); ++i)
        for (int j = 0; j < n; ++j) Ared(i, j) = e.reduced(i, j);
    res.kernel = kernel(Ared.rows() ? Ared : Matrix<F>(0, n));
    res.kind = res.kernel.cols() == 0 ? SolveKind::Unique : SolveKind::Parametrized;
    return res;
}

template <class F>
Matrix<F> inverse(const Matrix<F>& a) {
    if (!a.square()) throw std::invalid_argument("inverse of non-square matrix");
    auto s = solve_linear(a, Matrix<F>::identity(a.rows()));
    if (s.kind != SolveKind::Unique) throw std::domain_error("matrix not invertible");
    return s.particular;
}

// Inverse of a unipotent matrix 1 + n, using only ring operations.
template <class F>
Matrix<F> unipotent_inverse(const Matrix<F>& u) {
    int d = u.rows();
    Matrix<F> n = Matrix<F>::identity(d) - u;  // u = 1 - n
    Matrix<F> r = Matrix<F>::identity(d), p = Matrix<F>::identity(d);
    for (int k = 1; k <= d; ++k) {
        p = p * n;
        if (p.is_zero()) break;
        r += p;
    }
    return r;
}

template <class F>
bool is_nilpotent(const Matrix<F>& a) {
    return power(a, a.rows()).is_zero();
}

}  // namespace mslab
