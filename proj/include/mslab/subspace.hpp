#pragma once

#include "matrix.hpp"

#include <vector>

namespace mslab {

// Subspace of F^n, stored as the reduced row echelon form of a spanning set
// of row vectors. The representation is canonical, so == is subspace equality.
template <class F>
class Subspace {
public:
    Subspace() = default;
    explicit Subspace(int n) : n_(n), rows_(0, n) {}

    // columns of m span the subspace
    static Subspace span_columns(const Matrix<F>& m) { return span_rows(m.transpose()); }
    static Subspace span_rows(const Matrix<F>& m) {
        Subspace s(m.cols());
        if (m.rows() == 0) return s;
        auto e = rref(m);
        s.rows_ = e.reduced;
        s.pivots_ = e.pivots;
        return s;
    }
    static Subspace zero(int n) { return Subspace(n); }
    static Subspace full(int n) { return span_rows(Matrix<F>::identity(n)); }
    static Subspace span_vectors(int n, const std::vector<std::vector<F>>& vs) {
        Matrix<F> m(static_cast<int>(vs.size()), n);
        for (std::size_t i = 0; i < vs.size(); ++i)
            for (int j = 0; j < n; ++j) m(i, j) = vs[i][j];
        return span_rows(m);
    }

    int ambient() const { return n_; }
    int dim() const { return rows_.rows(); }
    bool is_zero() const { return dim() == 0; }
    bool is_full() const { return dim() == n_; }
    const Matrix<F>& rows() const { return rows_; }
    // n x dim, columns form a basis
    Matrix<F> basis() const { return rows_.transpose(); }

    bool contains(const std::vector<F>& v) const {
        std::vector<F> r = v;
        for (int i = 0; i < dim(); ++i) {
            int p = pivots_[i];
            if (scalar_is_zero(r[p])) continue;
            F f = r[p];
            for (int j = 0; j < n_; ++j)
                if (!scalar_is_zero(rows_(i, j))) r[j] -= f * rows_(i, j);
        }
        for (auto& x : r)
            if (!scalar_is_zero(x)) return false;
        return true;
    }
    bool contains_columns(const Matrix<F>& m) const {
        for (int j = 0; j < m.cols(); ++j)
            if (!contains(m.col(j))) return false;
        return true;
    }
    bool contains(const Subspace& o) const {
        for (int i = 0; i < o.dim(); ++i)
            if (!contains(o.rows_.row(i))) return false;
        return true;
    }

    friend bool operator==(const Subspace& a, const Subspace& b) { return a.n_ == b.n_ && a.rows_ == b.rows_; }
    friend bool operator!=(const Subspace& a, const Subspace& b) { return !(a == b); }

    friend Subspace operator+(const Subspace& a, const Subspace& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        return span_rows(a.rows_.vcat(b.rows_));
    }

    // Rows of the result cut out the subspace: A x = 0 iff x in *this.
    Matrix<F> equations() const {
        if (dim() == 0) return Matrix<F>::identity(n_);
        return kernel(rows_).transpose();
    }

    Subspace intersect(const Subspace& o) const {
        if (is_zero() || o.is_zero()) return Subspace(n_);
        if (is_full()) return o;
        if (o.is_full()) return *this;
        Matrix<F> eq = o.equations();
        // x = B c with eq B c = 0
        Matrix<F> B = basis();
        Matrix<F> k = kernel(eq * B);
        return span_columns(B * k);
    }

    // image under a linear map
    Subspace image(const Matrix<F>& m) const {
        if (is_zero()) return Subspace(m.rows());
        return span_columns(m * basis());
    }

    // {x : m x in *this}
    Subspace preimage(const Matrix<F>& m) const {
        if (is_full()) return full(m.cols());
        return span_columns(kernel(equations() * m));
    }

    // Vectors of *this completing a basis of sub (assumed contained),
    // picked greedily from the echelon rows. Columns of the result.
    Matrix<F> complement_of(const Subspace& sub) const {
        std::vector<int> pick;
        Subspace acc = sub;
        for (int i = 0; i < dim() && acc.dim() < dim(); ++i) {
            auto r = rows_.row(i);
            if (acc.contains(r)) continue;
            acc = acc + span_vectors(n_, {r});
            pick.push_back(i);
        }
        return rows_.rows_subset(pick).transpose();
    }

private:
    int n_ = 0;
    Matrix<F> rows_;
    std::vector<int> pivots_;
};

template <class F>
Subspace<F> kernel_space(const Matrix<F>& m) {
    return Subspace<F>::span_columns(kernel(m));
}

template <class F>
Subspace<F> image_space(const Matrix<F>& m) {
    return Subspace<F>::span_columns(m);
}

}  // namespace mslab
