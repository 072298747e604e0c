#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary.

#include <mslab/ratio.hpp>
#include <mslab/charpoly.hpp>
#include <mslab/deligne.hpp>
#include <mslab/heights.hpp>

#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace oracle {

using namespace mslab;
using Q = Rational;
using M = Matrix<Q>;
using S = Subspace<Q>;
using Filt = Filtration<Q>;

// direct sum of Jordan blocks (lowering e_{i+1} -> e_i), conjugated by g
inline M jordan(const std::vector<int>& blocks) {
    int n = 0;
    for (int b : blocks) n += b;
    M J(n, n);
    int o = 0;
    for (int b : blocks) {
        for (int i = 0; i + 1 < b; ++i) J(o + i, o + i + 1) = 1;
        o += b;
    }
    return J;
}

template <class Rng>
M random_invertible(int n, Rng& rng) {
    std::uniform_int_distribution<int> d(-2, 2);
    while (true) {
        M g(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g(i, j) = d(rng);
        if (rank(g) == n) return g;
    }
}

// Expected graded dims of M(N) centered at 0 from the Jordan type: a block of
// size s is Sym^{s-1}, with weights -(s-1), -(s-3), ..., s-1.
inline std::map<int, int> partition_weights(const std::vector<int>& blocks) {
    std::map<int, int> out;
    for (int s : blocks)
        for (int w = -(s - 1); w <= s - 1; w += 2) ++out[w];
    return out;
}

// Brute force: candidate subspaces from closing {W_k, Ker N^i, Im N^i} under
// +, cap, N(.), N^{-1}(.); then search all chains satisfying the axioms.
inline std::vector<Filt> brute_force_relative(const M& N, const Filt& W) {
    int n = N.rows();
    std::vector<S> pool;
    auto add = [&](const S& s) {
        for (auto& p : pool)
            if (p == s) return false;
        pool.push_back(s);
        return true;
    };
    add(S::zero(n));
    add(S::full(n));
    for (int k = W.lowest(); k <= W.highest(); ++k) add(W.at(k));
    M P = M::identity(n);
    for (int i = 1; i <= n; ++i) {
        P = P * N;
        add(kernel_space(P));
        add(image_space(P));
    }
    for (int round = 0; round < 3 && pool.size() < 300; ++round) {
        auto cur = pool;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            add(cur[i].image(N));
            add(cur[i].preimage(N));
            for (std::size_t j = i + 1; j < cur.size(); ++j) {
                add(cur[i] + cur[j]);
                add(cur[i].intersect(cur[j]));
            }
        }
    }
    GradedBasis<Q> B(W);
    int klo = W.lowest() - n, khi = W.highest() + n;
    // per k: candidates inducing the centered monodromy filtration on every gr_w
    std::map<int, std::vector<S>> cand;
    for (int k = klo; k <= khi; ++k) {
        for (auto& s : pool) {
            bool ok = true;
            for (int w : W.weights()) {
                auto idx = B.indices(w);
                M Pw = B.Ainv.rows_subset(idx);
                auto L = monodromy_filtration(graded_block(B, N, w), w);
                S inter = s.intersect(W.at(w));
                S ind = inter.is_zero() ? S::zero(static_cast<int>(idx.size())) : S::span_columns(Pw * inter.basis());
                if (ind != L.at(k)) { ok = false; break; }
            }
            if (ok) cand[k].push_back(s);
        }
        if (cand[k].empty()) return {};
    }
    std::vector<Filt> found;
    std::vector<S> chain;
    std::function<void(int)> rec = [&](int k) {
        if (k > khi) {
            std::map<int, S> st;
            for (int i = 0; i < static_cast<int>(chain.size()); ++i) st[klo + i] = chain[i];
            if (!chain.front().is_zero() || !chain.back().is_full()) return;
            found.push_back(Filt::from_steps(n, st));
            return;
        }
        for (auto& s : cand[k]) {
            if (!chain.empty() && !s.contains(chain.back())) continue;
            if (chain.size() >= 2 && !chain[chain.size() - 2].contains(s.image(N))) continue;
            if (chain.size() < 2 && !S::zero(n).contains(s.image(N)) && k - 2 < klo) continue;
            chain.push_back(s);
            rec(k + 1);
            chain.pop_back();
        }
    };
    rec(klo);
    return found;
}

// Oracle: the truncated product with q = T^{L vq}, u = T^{L vu} as an exact
// Laurent polynomial in T with integer coefficients; valuation = lowest
// exponent / L.
inline Q theta_valuation_by_product(const Q& vq, const Q& vu) {
    long L = 1;
    for (const Q* x : {&vq, &vu}) {
        long den = x->den().get_si();
        L = std::lcm(L, den);
    }
    long eq = (vq * Q(L)).to_long(), eu = (vu * Q(L)).to_long();
    std::map<long, long> p{{0, 1}};  // exponent -> coefficient
    auto mul = [&](long e) {  // times (1 - T^e)
        std::map<long, long> r;
        for (auto& [k, c] : p) {
            r[k] += c;
            r[k + e] -= c;
        }
        p.clear();
        for (auto& [k, c] : r)
            if (c) p[k] = c;
    };
    long bound = std::abs(eu) / eq + 3;
    for (long n = 0; n <= bound; ++n) mul(n * eq + eu);
    for (long n = 1; n <= bound; ++n) mul(n * eq - eu);
    return Q(p.begin()->first) / Q(L);
}

// expansion of (y d + d') - (y a + a')(y b + b')/(y c + c') at infinity: coefficient of y^{-m}
inline Q closed_form(Q a, Q b, Q c, Q d, Q ap, Q bp, Q cp, Q dp, int m) {
    // 1/(yc + c') = sum_k (-c')^k c^{-k-1} y^{-k-1}
    auto inv = [&](int k) {  // coefficient of y^{-k} in 1/(yc+c'), k >= 1
        Q r = Q(1) / c;
        for (int i = 1; i < k; ++i) r *= -cp / c;
        return r;
    };
    // numerator ab y^2 + (ab' + a'b) y + a'b'
    std::map<int, Q> num{{-2, a * b}, {-1, a * bp + ap * b}, {0, ap * bp}};
    Q s;
    for (auto& [p, v] : num) {
        int k = m - p;  // term y^{-p} times y^{-k}
        if (k >= 1) s += v * inv(k);
    }
    Q lin = m == -1 ? d : (m == 0 ? dp : Q(0));
    return lin - s;
}

inline Vec e(int n, int i) {
    Vec x(n);
    x[i] = 1;
    return x;
}

inline Q rnd_pos(std::mt19937& rng) { return Q(1 + static_cast<int>(rng() % 7)) / Q(1 + static_cast<int>(rng() % 4)); }

inline Cone random_sharp_cone(std::mt19937& rng) {
    if (rng() % 3 == 0) return Cone::orthant(2 + static_cast<int>(rng() % 2));
    int d = 3;
    std::vector<Vec> g;
    int m = 3 + static_cast<int>(rng() % 3);
    for (int i = 0; i < m; ++i) {
        Vec x(d);
        x[0] = 1 + static_cast<int>(rng() % 3);
        for (int k = 1; k < d; ++k) x[k] = static_cast<int>(rng() % 5) - 2;
        g.push_back(x);
    }
    return Cone(d, g);
}

// random strictly increasing chain {} < .. < whole in the face lattice
inline std::vector<Face> random_flag(const Cone& s, std::mt19937& rng) {
    auto faces = face_lattice(s);
    std::vector<Face> flag{Face{}};
    while (flag.back() != s.whole()) {
        std::vector<Face> up;
        for (auto& f : faces)
            if (f != flag.back() && face_le(flag.back(), f)) up.push_back(f);
        if (rng() % 3 == 0) {
            flag.push_back(s.whole());
            break;
        }
        flag.push_back(up[rng() % up.size()]);
    }
    return flag;
}

// positive combination of the face generators, plus junk from the previous face's span
inline Vec interior_rep(const Cone& s, const Face& lower, const Face& upper, std::mt19937& rng) {
    Vec x(s.ambient());
    for (auto& g : s.face_gens(upper)) x = detail::axpy(rnd_pos(rng), g, x);
    for (auto& g : s.face_gens(lower)) x = detail::axpy(Q(static_cast<int>(rng() % 7) - 3), g, x);
    return x;
}

inline RatioPoint random_point(const Cone& s, std::mt19937& rng) {
    RatioPoint p;
    p.sigma = s;
    p.flag = random_flag(s, rng);
    for (std::size_t j = 1; j < p.flag.size(); ++j) p.reps.push_back(interior_rep(s, p.flag[j - 1], p.flag[j], rng));
    p.validate();
    return p;
}

inline Vec random_dual(const Cone& s, std::mt19937& rng, bool allow_zero = true) {
    Cone d = dual_cone(s);
    while (true) {
        Vec f(s.ambient());
        for (auto& g : d.generators())
            if (rng() % 2) f = detail::axpy(Q(static_cast<int>(rng() % 4)), g, f);
        // annihilator directions only shift f by a functional vanishing on sigma
        bool kills = true;
        for (auto& g : s.generators()) kills = kills && dot(f, g).is_zero();
        if (allow_zero || !kills) return f;
    }
}

inline bool kills_sigma(const Cone& s, const Vec& f) {
    for (auto& g : s.generators())
        if (!dot(f, g).is_zero()) return false;
    return true;
}

inline FaceBase random_base(const Cone& s, std::mt19937& rng) {
    while (true) {
        FaceBase b;
        b.sigma = s;
        b.flag = random_flag(s, rng);
        int prev = 0;
        for (std::size_t j = 1; j < b.flag.size(); ++j) {
            int r = s.face_dim(b.flag[j]) - prev;
            prev += r;
            b.elems.emplace_back();
            for (int k = 0; k < r; ++k) b.elems.back().push_back(interior_rep(s, b.flag[j - 1], b.flag[j], rng));
        }
        try {
            b.validate();
            return b;
        } catch (const std::invalid_argument&) {
        }
    }
}

// random point of U(psi): random phi and positive y
inline RatioPoint random_u_point(const FaceBase& psi, std::mt19937& rng) {
    int n = psi.length();
    std::vector<int> phi{0};
    for (int j = 1; j < n; ++j)
        if (rng() % 2) phi.push_back(j);
    phi.push_back(n);
    RatioPoint p;
    p.sigma = psi.sigma;
    p.flag.push_back(Face{});
    for (std::size_t i = 1; i < phi.size(); ++i) {
        Vec x = interior_rep(psi.sigma, Face{}, psi.flag[phi[i - 1]], rng);
        for (int j = phi[i - 1] + 1; j <= phi[i]; ++j)
            for (auto& nk : psi.elems[j - 1]) x = detail::axpy(rnd_pos(rng), nk, x);
        p.flag.push_back(psi.flag[phi[i]]);
        p.reps.push_back(x);
    }
    p.validate();
    return p;
}

inline Vec pull_back(const Vec& f, const Matrix<Q>& h) {
    Vec out(h.cols());
    for (int j = 0; j < h.cols(); ++j)
        for (int i = 0; i < h.rows(); ++i) out[j] += f[i] * h(i, j);
    return out;
}


// joint eigenspaces of (A, B) over all pairs of rational eigenvalues
inline std::vector<S> joint_eigenspaces(const M& A, const M& B) {
    std::vector<S> out;
    int n = A.rows();
    M I = M::identity(n);
    for (auto& l : rational_roots(characteristic_polynomial(A)))
        for (auto& m : rational_roots(characteristic_polynomial(B))) {
            M K = kernel((A - l * I).vcat(B - m * I));
            if (K.cols()) out.push_back(S::span_columns(K));
        }
    return out;
}

inline bool in_some(const std::vector<S>& spaces, const std::vector<Q>& v) {
    for (auto& s : spaces)
        if (s.contains(v)) return true;
    return false;
}

// local height from product-expanded theta valuations
inline Q local_height_by_product(const TateHeightInput& in) {
    Q a, b, d;
    for (std::size_t j = 0; j < in.m.size(); ++j) a += Q(in.m[j]) * in.valpha[j];
    for (std::size_t h = 0; h < in.n.size(); ++h) b += Q(in.n[h]) * in.vbeta[h];
    for (std::size_t j = 0; j < in.m.size(); ++j)
        for (std::size_t h = 0; h < in.n.size(); ++h)
            if (in.m[j] && in.n[h]) d += Q(in.m[j] * in.n[h]) * theta_valuation_by_product(in.vq, in.valpha[j] - in.vbeta[h]);
    return d - a * b / in.vq;
}

// ad(Y) weights occurring in X, from an explicit eigenbasis of the
// diagonalizable integer-spectrum Y
inline std::set<int> ad_weights(const M& X, const M& Y) {
    int n = Y.rows();
    M P(n, 0);
    std::vector<int> lam;
    for (auto& r : rational_roots(characteristic_polynomial(Y))) {
        M K = kernel(Y - r * M::identity(n));
        P = P.cols() ? P.hcat(K) : K;
        for (int k = 0; k < K.cols(); ++k) lam.push_back(static_cast<int>(r.to_long()));
    }
    if (P.cols() != n) throw std::invalid_argument("ad_weights: Y is not diagonalizable over Q");
    M Xp = inverse(P) * X * P;
    std::set<int> out;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!Xp(i, j).is_zero()) out.insert(lam[i] - lam[j]);
    return out;
}

// X W_k <= W_{k+s} for every k
inline bool shifts_filtration(const M& X, const Filt& W, int s) {
    for (int k = W.lowest() - 1; k <= W.highest(); ++k)
        if (!W.at(k + s).contains(W.at(k).image(X))) return false;
    return true;
}

// graded-coordinate entries (i, j) nonzero only when w_i - w_j <= s
inline bool graded_drop(const M& X, const std::vector<int>& w, int s) {
    for (int i = 0; i < X.rows(); ++i)
        for (int j = 0; j < X.cols(); ++j)
            if (!X(i, j).is_zero() && w[i] - w[j] > s) return false;
    return true;
}

}  // namespace oracle
