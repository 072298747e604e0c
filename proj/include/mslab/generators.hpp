#pragma once

#include "deligne.hpp"

#include <random>

namespace mslab::gen {

// Irreducible representation Sym^{m_1} V_1 (x) ... (x) Sym^{m_n} V_n of
// SL(2)^n, twisted by the G_m-weight `twist`.
struct Irrep {
    int twist = 0;
    std::vector<int> m;
};

struct Sl2nRep {
    int dim = 0;
    int n = 0;
    std::vector<std::vector<int>> h;  // h[k][i]: weight of H_k on basis vector i
    std::vector<int> twist;           // G_m-weight of basis vector i
    std::vector<Matrix<Rational>> E;  // lowering operators
    // Y^j = twist + H_1 + ... + H_j, diagonal
    Matrix<Rational> Y(int j) const {
        std::vector<Rational> d;
        for (int i = 0; i < dim; ++i) {
            int v = twist[i];
            for (int k = 0; k < j; ++k) v += h[k][i];
            d.push_back(v);
        }
        return Matrix<Rational>::diagonal(d);
    }
    int y(int j, int i) const {
        int v = twist[i];
        for (int k = 0; k < j; ++k) v += h[k][i];
        return v;
    }
};

inline Sl2nRep representation(const std::vector<Irrep>& irreps) {
    Sl2nRep R;
    R.n = irreps.empty() ? 0 : static_cast<int>(irreps[0].m.size());
    std::vector<std::vector<int>> idx;  // multi-index per basis vector
    std::vector<int> owner;
    for (std::size_t r = 0; r < irreps.size(); ++r) {
        if (static_cast<int>(irreps[r].m.size()) != R.n) throw std::invalid_argument("irreps of different SL(2)^n");
        std::vector<int> cur(R.n, 0);
        while (true) {
            idx.push_back(cur);
            owner.push_back(static_cast<int>(r));
            int k = R.n - 1;
            while (k >= 0 && cur[k] == irreps[r].m[k]) { cur[k] = 0; --k; }
            if (k < 0) break;
            ++cur[k];
        }
    }
    R.dim = static_cast<int>(idx.size());
    R.h.assign(R.n, std::vector<int>(R.dim));
    for (int i = 0; i < R.dim; ++i) {
        R.twist.push_back(irreps[owner[i]].twist);
        for (int k = 0; k < R.n; ++k) R.h[k][i] = -irreps[owner[i]].m[k] + 2 * idx[i][k];
    }
    for (int k = 0; k < R.n; ++k) {
        Matrix<Rational> E(R.dim, R.dim);
        for (int i = 0; i < R.dim; ++i) {
            if (idx[i][k] == 0) continue;
            auto t = idx[i];
            --t[k];
            for (int j = 0; j < R.dim; ++j)
                if (owner[j] == owner[i] && idx[j] == t) E(j, i) = 1;
        }
        R.E.push_back(E);
    }
    return R;
}

inline DeligneSystemData system_from(const Sl2nRep& R, const std::vector<Matrix<Rational>>& N) {
    DeligneSystemData D;
    D.dim = R.dim;
    for (int j = 0; j <= R.n; ++j) D.W.push_back(make_splitting(R.Y(j), integer_spectrum(R.Y(j))).filtration());
    D.N = N;
    D.Y = R.Y(R.n);
    return D;
}

inline DeligneSystemData split_system(const Sl2nRep& R) { return system_from(R, R.E); }

// Random small integer combination of the columns of K.
template <class Rng>
Matrix<Rational> random_combination(const Matrix<Rational>& K, Rng& rng, int range = 2) {
    std::uniform_int_distribution<int> d(-range, range);
    Matrix<Rational> v(K.rows(), 1);
    for (int j = 0; j < K.cols(); ++j) {
        Rational c = d(rng);
        if (c.is_zero()) continue;
        for (int i = 0; i < K.rows(); ++i) v(i, 0) += c * K(i, j);
    }
    return v;
}

// N_j = E_j + P_j where P_j is a random element of the linear space cut out
// by the conditions a Deligne system imposes given N_1..N_{j-1}: Y^{j-1}-weights
// <= -2, Y^k-weight -2 for k >= j, Y^k-weight <= 0 for k < j-1, primitivity
// for Ad(E_j), commuting with N_i (i < j) and with E_k, F_k (k > j).
template <class Rng>
DeligneSystemData perturbed_system(const Sl2nRep& R, Rng& rng, int range = 2) {
    int d = R.dim, n = R.n;
    std::vector<Matrix<Rational>> F;
    for (int k = 0; k < n; ++k) F.push_back(complete_triple(R.Y(k + 1) - R.Y(k), R.E[k]));
    std::vector<Matrix<Rational>> N;
    for (int j = 1; j <= n; ++j) {
        std::vector<std::pair<int, int>> sup;
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) {
                int a = R.y(j - 1, r) - R.y(j - 1, c);
                if (a > -2) continue;
                bool ok = true;
                for (int k = j; k <= n; ++k) ok = ok && R.y(k, r) - R.y(k, c) == -2;
                for (int k = 0; k < j - 1; ++k) ok = ok && R.y(k, r) - R.y(k, c) <= 0;
                if (ok) sup.push_back({r, c});
            }
        Matrix<Rational> P(d, d);
        if (!sup.empty()) {
            // linear conditions on the coefficients of P
            std::vector<std::vector<Rational>> rows;
            auto basis_elem = [&](std::size_t t) { return Matrix<Rational>::unit(d, sup[t].first, sup[t].second); };
            auto add_map = [&](auto fn) {
                std::vector<Matrix<Rational>> imgs;
                for (std::size_t t = 0; t < sup.size(); ++t) imgs.push_back(fn(basis_elem(t), t));
                for (int e = 0; e < d * d; ++e) {
                    std::vector<Rational> row(sup.size());
                    bool nz = false;
                    for (std::size_t t = 0; t < sup.size(); ++t) {
                        row[t] = imgs[t].data()[e];
                        nz = nz || !row[t].is_zero();
                    }
                    if (nz) rows.push_back(row);
                }
            };
            // primitivity: Ad(E_j)^{a'-1} of the Y^{j-1}-weight -a' part
            add_map([&](Matrix<Rational> X, std::size_t t) {
                int a = -(R.y(j - 1, sup[t].first) - R.y(j - 1, sup[t].second));
                for (int i = 0; i < a - 1; ++i) X = commutator(R.E[j - 1], X);
                return X;
            });
            for (int i = 0; i < j - 1; ++i) add_map([&](const Matrix<Rational>& X, std::size_t) { return commutator(N[i], X); });
            for (int k = j; k < n; ++k) {
                add_map([&](const Matrix<Rational>& X, std::size_t) { return commutator(R.E[k], X); });
                add_map([&](const Matrix<Rational>& X, std::size_t) { return commutator(F[k], X); });
            }
            Matrix<Rational> K;
            if (rows.empty()) K = Matrix<Rational>::identity(static_cast<int>(sup.size()));
            else {
                Matrix<Rational> A(static_cast<int>(rows.size()), static_cast<int>(sup.size()));
                for (std::size_t r = 0; r < rows.size(); ++r)
                    for (std::size_t t = 0; t < sup.size(); ++t) A(r, t) = rows[r][t];
                K = kernel(A);
            }
            Matrix<Rational> c = random_combination(K, rng, range);
            for (std::size_t t = 0; t < sup.size(); ++t) P(sup[t].first, sup[t].second) = c(t, 0);
        }
        N.push_back(R.E[j - 1] + P);
    }
    return system_from(R, N);
}

// Random g in 1 + W_{-1}End(V).
template <class Rng>
Matrix<Rational> random_unipotent(const Filtration<Rational>& W, Rng& rng, int range = 2) {
    GradedBasis<Rational> B(W);
    std::uniform_int_distribution<int> d(-range, range);
    int n = W.ambient();
    Matrix<Rational> h(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (B.weight[i] < B.weight[j]) h(i, j) = d(rng);
    return Matrix<Rational>::identity(n) + B.A * h * B.Ainv;
}

// Random g preserving W with random invertible graded part.
template <class Rng>
Matrix<Rational> random_filtered_automorphism(const Filtration<Rational>& W, Rng& rng, int range = 2) {
    GradedBasis<Rational> B(W);
    std::uniform_int_distribution<int> d(-range, range);
    int n = W.ambient();
    while (true) {
        Matrix<Rational> h(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (B.weight[i] <= B.weight[j]) h(i, j) = d(rng);
        if (rank(h) == n) return B.A * h * B.Ainv;
    }
}

inline Filtration<Rational> transform(const Matrix<Rational>& g, const Filtration<Rational>& W) {
    std::map<int, Subspace<Rational>> st;
    for (int k = W.lowest(); k <= W.highest(); ++k) st[k] = W.at(k).image(g);
    return Filtration<Rational>::from_steps(W.ambient(), st);
}

inline DeligneSystemData conjugate(const DeligneSystemData& D, const Matrix<Rational>& g) {
    Matrix<Rational> gi = inverse(g);
    DeligneSystemData C = D;
    for (auto& w : C.W) w = transform(g, w);
    for (auto& x : C.N) x = g * x * gi;
    C.Y = g * D.Y * gi;
    return C;
}

// The four-dimensional one-variable system: W_{-2} = <e1>, W_{-1} = <e1,e2,e3>,
// N e3 = c e2 + b e1, N e4 = a e2 + d e1, Y = diag(-2,-2,0,0).
inline DeligneSystemData ht2_system(const Rational& a, const Rational& b, const Rational& c, const Rational& d) {
    DeligneSystemData D;
    D.dim = 4;
    auto e = [](std::vector<std::vector<Rational>> v) { return Subspace<Rational>::span_vectors(4, v); };
    D.W.push_back(Filtration<Rational>::from_steps(
        4, {{-2, e({{1, 0, 0, 0}})}, {-1, e({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}})}, {0, Subspace<Rational>::full(4)}}));
    D.W.push_back(Filtration<Rational>::from_steps(4, {{-2, e({{1, 0, 0, 0}, {0, 1, 0, 0}})}, {0, Subspace<Rational>::full(4)}}));
    Matrix<Rational> N(4, 4);
    N(1, 2) = c;
    N(0, 2) = b;
    N(1, 3) = a;
    N(0, 3) = d;
    D.N.push_back(N);
    D.Y = Matrix<Rational>::diagonal({-2, -2, 0, 0});
    return D;
}

// Random list of irreps with total dimension <= max_dim.
template <class Rng>
std::vector<Irrep> random_irreps(int n, int max_dim, Rng& rng, int max_m = 2, int max_twist = 3) {
    std::uniform_int_distribution<int> dm(0, max_m), dt(-max_twist, 0), cnt(1, 4);
    std::vector<Irrep> out;
    int dim = 0, want = cnt(rng);
    for (int tries = 0; tries < 50 && static_cast<int>(out.size()) < want; ++tries) {
        Irrep r;
        r.twist = dt(rng);
        int dd = 1;
        for (int k = 0; k < n; ++k) {
            r.m.push_back(dm(rng));
            dd *= r.m.back() + 1;
        }
        if (dim + dd > max_dim) continue;
        dim += dd;
        out.push_back(r);
    }
    if (out.empty()) out.push_back({0, std::vector<int>(n, 1)});
    return out;
}

}  // namespace mslab::gen
