#pragma once

#include "filtration.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mslab {

struct PreconditionError : std::invalid_argument {
    enum class Kind {
        NotNilpotent,
        DoesNotPreserveW,
        NoRelativeFiltration,
        NotASplitting,
        WeightCondition,
        Unsolvable,
    };
    Kind kind;
    PreconditionError(Kind k, const std::string& what) : std::invalid_argument(what), kind(k) {}
};

inline const char* to_string(PreconditionError::Kind k) {
    switch (k) {
        case PreconditionError::Kind::NotNilpotent: return "not_nilpotent";
        case PreconditionError::Kind::DoesNotPreserveW: return "does_not_preserve_W";
        case PreconditionError::Kind::NoRelativeFiltration: return "no_relative_monodromy_filtration";
        case PreconditionError::Kind::NotASplitting: return "not_a_splitting";
        case PreconditionError::Kind::WeightCondition: return "weight_condition";
        case PreconditionError::Kind::Unsolvable: return "characterization_unsolvable";
    }
    return "unknown";
}

template <class F>
struct JordanChain {
    std::vector<F> generator;  // v with N^length v = 0, N^{length-1} v != 0
    int length = 0;
};

// Jordan chains {N^a v} forming a basis, longest first. At each length s the
// generators complete K_{s-1} + N K_{s+1} to K_s, K_i = Ker N^i.
template <class F>
std::vector<JordanChain<F>> jordan_chains(const Matrix<F>& N) {
    int n = N.rows();
    if (!is_nilpotent(N)) throw PreconditionError(PreconditionError::Kind::NotNilpotent, "operator is not nilpotent");
    std::vector<Subspace<F>> K{Subspace<F>::zero(n)};
    Matrix<F> P = Matrix<F>::identity(n);
    while (!K.back().is_full()) {
        P = P * N;
        K.push_back(kernel_space(P));
    }
    int top = static_cast<int>(K.size()) - 1;
    std::vector<JordanChain<F>> out;
    for (int s = top; s >= 1; --s) {
        Subspace<F> U = K[s - 1] + (s + 1 <= top ? K[s + 1].image(N) : K[top].image(N));
        Matrix<F> c = K[s].complement_of(U.intersect(K[s]));
        for (int j = 0; j < c.cols(); ++j) out.push_back({c.col(j), s});
    }
    // sanity: the chains form a basis
    Matrix<F> B(n, 0);
    for (auto& ch : out) {
        Matrix<F> v = Matrix<F>::column(ch.generator);
        for (int a = 0; a < ch.length; ++a) {
            B = B.hcat(v);
            v = N * v;
        }
    }
    if (B.cols() != n || rank(B) != n) throw std::logic_error("jordan_chains: chains do not form a basis");
    return out;
}

template <class F>
bool verify_monodromy_axioms(const Matrix<F>& N, const Filtration<F>& M, int center) {
    int lo = std::min(M.lowest(), 2 * center - M.highest()) - 2;
    int hi = std::max(M.highest(), 2 * center - M.lowest()) + 2;
    for (int k = lo; k <= hi; ++k)
        if (!M.at(k - 2).contains(M.at(k).image(N))) return false;
    for (int k = 1; center + k <= hi; ++k) {
        int up = center + k, dn = center - k;
        if (M.graded_dim(up) != M.graded_dim(dn)) return false;
        if (M.graded_dim(up) == 0) continue;
        auto g = graded_piece(M, up);
        Subspace<F> img = Subspace<F>::span_columns(power(N, k) * g.lifts) + M.at(dn - 1);
        if (img.dim() != M.at(dn - 1).dim() + g.dim) return false;
    }
    return true;
}

// M_{c+k} = sum_{j >= max(0,k)} Ker N^{j+1} cap Im N^{j-k}
template <class F>
Filtration<F> monodromy_filtration(const Matrix<F>& N, int center) {
    int n = N.rows();
    if (!is_nilpotent(N)) throw PreconditionError(PreconditionError::Kind::NotNilpotent, "operator is not nilpotent");
    int l = 0;
    std::vector<Matrix<F>> pw{Matrix<F>::identity(n)};
    while (!pw.back().is_zero()) {
        pw.push_back(pw.back() * N);
        ++l;
    }
    --l;  // N^{l+1} = 0, N^l != 0
    auto P = [&](int i) { return i < static_cast<int>(pw.size()) ? pw[i] : Matrix<F>(n, n); };
    std::vector<Subspace<F>> ker, im;
    for (int i = 0; i <= 2 * l + 2; ++i) {
        ker.push_back(kernel_space(P(i)));
        im.push_back(image_space(P(i)));
    }
    std::map<int, Subspace<F>> steps;
    for (int k = -l; k <= l; ++k) {
        Subspace<F> acc = Subspace<F>::zero(n);
        for (int j = std::max(0, k); j <= 2 * l + 1 && j - k <= 2 * l + 2; ++j) {
            if (j + 1 > 2 * l + 2) break;
            acc = acc + ker[j + 1].intersect(im[j - k]);
        }
        steps[center + k] = acc;
    }
    auto M = Filtration<F>::from_steps(n, steps);
    if (!verify_monodromy_axioms(N, M, center)) throw std::logic_error("monodromy_filtration: axioms fail");
    return M;
}

template <class F>
Matrix<F> graded_coordinates_rows(const GradedBasis<F>& B, int w) {
    return B.Ainv.rows_subset(B.indices(w));
}

// Induced map on gr_w^W in the canonical graded basis.
template <class F>
Matrix<F> graded_block(const GradedBasis<F>& B, const Matrix<F>& N, int w) {
    auto idx = B.indices(w);
    return B.Ainv.rows_subset(idx) * N * B.A.cols_subset(idx);
}

template <class F>
bool verify_relative_axioms(const Matrix<F>& N, const Filtration<F>& W, const Filtration<F>& M) {
    for (int k = M.lowest() - 1; k <= M.highest() + 2; ++k)
        if (!M.at(k - 2).contains(M.at(k).image(N))) return false;
    GradedBasis<F> B(W);
    for (int w : W.weights()) {
        auto idx = B.indices(w);
        int g = static_cast<int>(idx.size());
        Matrix<F> Pw = B.Ainv.rows_subset(idx);
        Matrix<F> Nw = graded_block(B, N, w);
        auto L = monodromy_filtration(Nw, w);
        for (int k = std::min(L.lowest(), M.lowest()) - 1; k <= std::max(L.highest(), M.highest()) + 1; ++k) {
            auto S = M.at(k).intersect(W.at(w));
            Subspace<F> induced = S.is_zero() ? Subspace<F>::zero(g) : Subspace<F>::span_columns(Pw * S.basis());
            if (induced != L.at(k)) return false;
        }
    }
    return true;
}

// Relative monodromy filtration M(N, W), or nullopt when it does not exist.
// Built one W-weight at a time: on V' = W_{w-1} with M' known, each Jordan
// generator g of gr_w (chain length s) is lifted to v with
// N^s v in M'_{w-s-1}; then M_k = M'_k + span{N^a v : w+s-1-2a <= k}.
template <class F>
std::optional<Filtration<F>> relative_monodromy_filtration(const Matrix<F>& N, const Filtration<F>& W) {
    int n = N.rows();
    if (!is_nilpotent(N)) throw PreconditionError(PreconditionError::Kind::NotNilpotent, "operator is not nilpotent");
    if (!preserves(N, W)) throw PreconditionError(PreconditionError::Kind::DoesNotPreserveW, "N does not preserve W");
    GradedBasis<F> B(W);
    std::map<int, Subspace<F>> M;  // finite part; above the top key M equals the current V'
    Subspace<F> Vp = Subspace<F>::zero(n);
    auto Mprev = [&](int k) -> Subspace<F> {
        if (M.empty()) return Vp;
        if (k < M.begin()->first) return Subspace<F>::zero(n);
        if (k > M.rbegin()->first) return Vp;
        return M.at(k);
    };
    for (int w : W.weights()) {
        auto idx = B.indices(w);
        Matrix<F> L = B.A.cols_subset(idx);
        Matrix<F> Nw = graded_block(B, N, w);
        std::vector<std::pair<Matrix<F>, int>> lifted;  // (v, s)
        int lo = w, hi = w;
        for (auto& ch : jordan_chains(Nw)) {
            int s = ch.length;
            Matrix<F> v = L * Matrix<F>::column(ch.generator);
            Matrix<F> Ns = power(N, s);
            Subspace<F> target = Mprev(w - s - 1);
            if (!Vp.is_zero()) {
                // N^s (v + Bp c) - D e = 0  ->  [N^s Bp | -D] (c,e) = -N^s v
                Matrix<F> Bp = Vp.basis();
                Matrix<F> lhs = Ns * Bp;
                if (!target.is_zero()) lhs = lhs.hcat(-target.basis());
                auto sol = solve_linear(lhs, -(Ns * v));
                if (!sol.consistent()) return std::nullopt;
                Matrix<F> c(Bp.cols(), 1);
                for (int i = 0; i < Bp.cols(); ++i) c(i, 0) = sol.particular(i, 0);
                v = v + Bp * c;
            } else if (!(Ns * v).is_zero()) {
                return std::nullopt;
            }
            lifted.push_back({v, s});
            lo = std::min(lo, w - (s - 1));
            hi = std::max(hi, w + (s - 1));
        }
        std::map<int, Subspace<F>> next;
        int klo = std::min(lo, M.empty() ? lo : M.begin()->first);
        int khi = std::max(hi, M.empty() ? hi : M.rbegin()->first);
        for (int k = klo; k <= khi; ++k) {
            Subspace<F> acc = Mprev(k);
            for (auto& [v, s] : lifted) {
                Matrix<F> x = v;
                for (int a = 0; a < s; ++a) {
                    if (w + s - 1 - 2 * a <= k) acc = acc + Subspace<F>::span_columns(x);
                    x = N * x;
                }
            }
            next[k] = acc;
        }
        M = std::move(next);
        Vp = W.at(w);
    }
    std::map<int, Subspace<F>> steps = M;
    steps[M.rbegin()->first + 1] = Subspace<F>::full(n);
    auto R = Filtration<F>::from_steps(n, steps);
    if (!verify_relative_axioms(N, W, R)) return std::nullopt;
    return R;
}

template <class F>
struct SplDelta {
    Splitting<F> Y0;
    Matrix<F> u;           // Y0 = u Y_ref u^{-1} for the internal reference splitting
    GradedMap<F> delta;    // in W_{-2} gr^W End(V), canonical graded coordinates
    GradedMap<F> grN;
};

struct SplitOptions {
    bool verify_preconditions = true;
    // when set, the relative monodromy filtration is not recomputed; Y is
    // checked against this filtration instead
    std::optional<Filtration<Rational>> known_relative;
};

namespace detail {

// Basis diagonalizing both Y and a reference splitting of W that commutes
// with Y. Columns of P; wt = W-weights, yt = Y-weights.
struct JointBasis {
    Matrix<Rational> P, Pinv;
    std::vector<int> wt, yt;
};

inline JointBasis joint_basis(const Filtration<Rational>& W, const Splitting<Rational>& Y) {
    JointBasis jb;
    int n = W.ambient();
    jb.P = Matrix<Rational>(n, 0);
    for (int a : Y.spectrum) {
        Subspace<Rational> E = Y.eigenspace(a);
        Subspace<Rational> prev = Subspace<Rational>::zero(n);
        for (int w = W.lowest(); w <= W.highest(); ++w) {
            Subspace<Rational> S = W.at(w).intersect(E);
            Matrix<Rational> c = S.complement_of(prev);
            jb.P = jb.P.hcat(c);
            for (int j = 0; j < c.cols(); ++j) {
                jb.wt.push_back(w);
                jb.yt.push_back(a);
            }
            prev = S;
        }
    }
    if (jb.P.cols() != n) throw PreconditionError(PreconditionError::Kind::NotASplitting, "Y is not compatible with W");
    jb.Pinv = inverse(jb.P);
    return jb;
}

template <class F>
Matrix<F> mask_weight(const Matrix<F>& X, const std::vector<int>& wt, int d) {
    Matrix<F> r(X.rows(), X.cols());
    for (int i = 0; i < X.rows(); ++i)
        for (int j = 0; j < X.cols(); ++j)
            if (wt[i] - wt[j] == d) r(i, j) = X(i, j);
    return r;
}

template <class F>
Matrix<F> ad_power(const Matrix<F>& N0, Matrix<F> X, int k) {
    for (int i = 0; i < k; ++i) X = commutator(N0, X);
    return X;
}

}  // namespace detail

// spl_W(N) and delta_W(N). W and Y have rational data; N may live over any
// scalar ring. Y0 = u Y_* u^{-1}, u in 1 + W_{-1}End, is solved weight by
// weight: at weight -d the defect a satisfies Ad(N0)^{d-1}(a + [N0, v]) = 0
// for a unique v of Y-weight 0.
template <class F>
SplDelta<F> deligne_splitting(const Filtration<Rational>& W, const Matrix<F>& N, const Splitting<Rational>& Y,
                              const SplitOptions& opt = {}) {
    using K = PreconditionError::Kind;
    int n = W.ambient();
    if (N.rows() != n || Y.dim() != n) throw std::invalid_argument("deligne_splitting: dimension mismatch");
    Filtration<F> WF;
    {
        std::map<int, Subspace<F>> st;
        for (int k = W.lowest(); k <= W.highest(); ++k) st[k] = Subspace<F>::span_columns(embed<F>(W.at(k).basis()));
        WF = Filtration<F>::from_steps(n, st);
    }
    if (opt.verify_preconditions) {
        if (!is_nilpotent(N)) throw PreconditionError(K::NotNilpotent, "N is not nilpotent");
        if (!preserves(N, WF)) throw PreconditionError(K::DoesNotPreserveW, "N does not preserve W");
        if (!preserves(Y.Y, W)) throw PreconditionError(K::NotASplitting, "Y is not compatible with W");
        Matrix<F> YF = embed<F>(Y.Y);
        if (opt.known_relative) {
            if (!splits(Y.Y, *opt.known_relative)) throw PreconditionError(K::NotASplitting, "Y does not split W'");
        } else {
            auto Wp = relative_monodromy_filtration(N, WF);
            if (!Wp) throw PreconditionError(K::NoRelativeFiltration, "relative monodromy filtration does not exist");
            auto YS = make_splitting(YF, Y.spectrum);
            if (YS.filtration() != *Wp) throw PreconditionError(K::NotASplitting, "Y does not split M(N, W)");
        }
        if (commutator(YF, N) != F(-2) * N) throw PreconditionError(K::WeightCondition, "N does not have Y-weight -2");
    }
    auto jb = detail::joint_basis(W, Y);
    Matrix<F> PF = embed<F>(jb.P), PinvF = embed<F>(jb.Pinv);
    Matrix<F> Nt = PinvF * N * PF;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (jb.wt[i] > jb.wt[j] && !scalar_is_zero(Nt(i, j)))
                throw PreconditionError(K::DoesNotPreserveW, "N raises W-weight");
    Matrix<F> N0 = detail::mask_weight(Nt, jb.wt, 0);
    Matrix<F> u = Matrix<F>::identity(n);
    int dmax = W.highest() - W.lowest();
    for (int d = 1; d <= dmax; ++d) {
        Matrix<F> X = unipotent_inverse(u) * Nt * u;
        Matrix<F> a = detail::mask_weight(X, jb.wt, -d);
        std::vector<std::pair<int, int>> unk;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (jb.wt[i] - jb.wt[j] == -d && jb.yt[i] == jb.yt[j]) unk.push_back({i, j});
        Matrix<F> rhs = -detail::ad_power(N0, a, d - 1);
        if (unk.empty()) {
            if (!rhs.is_zero()) throw PreconditionError(K::Unsolvable, "characterization has no solution");
            continue;
        }
        std::vector<std::pair<int, int>> eqs;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (jb.wt[i] - jb.wt[j] == -d) eqs.push_back({i, j});
        Matrix<F> A(static_cast<int>(eqs.size()), static_cast<int>(unk.size()));
        for (std::size_t t = 0; t < unk.size(); ++t) {
            Matrix<F> E(n, n);
            E(unk[t].first, unk[t].second) = F(1);
            Matrix<F> img = detail::ad_power(N0, E, d);
            for (std::size_t e = 0; e < eqs.size(); ++e) A(e, t) = img(eqs[e].first, eqs[e].second);
        }
        Matrix<F> b(static_cast<int>(eqs.size()), 1);
        for (std::size_t e = 0; e < eqs.size(); ++e) b(e, 0) = rhs(eqs[e].first, eqs[e].second);
        auto sol = solve_linear(A, b);
        if (!sol.consistent()) throw PreconditionError(K::Unsolvable, "characterization has no solution at weight -" + std::to_string(d));
        if (sol.kind != SolveKind::Unique) throw std::logic_error("deligne_splitting: step solution not unique");
        Matrix<F> v(n, n);
        for (std::size_t t = 0; t < unk.size(); ++t) v(unk[t].first, unk[t].second) = sol.particular(t, 0);
        u = u * (Matrix<F>::identity(n) + v);
    }
    Matrix<F> X = unipotent_inverse(u) * Nt * u;
    // post-verification of the characterization
    if (detail::mask_weight(X, jb.wt, 0) != N0) throw std::logic_error("deligne_splitting: weight-0 part changed");
    if (!detail::mask_weight(X, jb.wt, -1).is_zero()) throw std::logic_error("deligne_splitting: N^{[-1]} != 0");
    for (int d = 2; d <= dmax; ++d)
        if (!detail::ad_power(N0, detail::mask_weight(X, jb.wt, -d), d - 1).is_zero())
            throw std::logic_error("deligne_splitting: primitivity fails at weight -" + std::to_string(d));

    SplDelta<F> out;
    std::vector<F> dw;
    for (int w : jb.wt) dw.push_back(F(Rational(w)));
    Matrix<F> Y0 = PF * u * Matrix<F>::diagonal(dw) * unipotent_inverse(u) * PinvF;
    out.Y0 = make_splitting(Y0, W.weights());
    out.u = PF * u * PinvF;
    // graded change of basis: class of P_j in canonical graded coordinates
    GradedBasis<Rational> GB(W);
    Matrix<Rational> G = GB.Ainv * jb.P;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (GB.weight[i] != jb.wt[j]) G(i, j) = 0;
    Matrix<Rational> Ginv = inverse(G);
    Matrix<F> dP = X - detail::mask_weight(X, jb.wt, 0);
    out.delta = {embed<F>(G) * dP * embed<F>(Ginv), GB.weight};
    out.grN = {embed<F>(G) * N0 * embed<F>(Ginv), GB.weight};
    return out;
}

template <class F>
SplDelta<F> deligne_splitting(const Filtration<Rational>& W, const Matrix<F>& N, const Matrix<Rational>& Y,
                              const SplitOptions& opt = {}) {
    return deligne_splitting(W, N, make_splitting(Y, integer_spectrum(Y)), opt);
}

// N = S (gr N + delta) S^{-1}, S the section of gr^W V -> V given by Y0.
template <class F>
Matrix<F> recover_N(const Filtration<Rational>& W, const GradedMap<F>& grN, const Splitting<F>& Y0,
                    const GradedMap<F>& delta) {
    GradedBasis<Rational> GB(W);
    int n = W.ambient();
    Matrix<F> A = embed<F>(GB.A);
    Matrix<F> S(n, n);
    for (int j = 0; j < n; ++j) {
        Matrix<F> c = Y0.projection(GB.weight[j]) * A.cols_subset({j});
        for (int i = 0; i < n; ++i) S(i, j) = c(i, 0);
    }
    // A^{-1} S is unipotent in graded coordinates
    Matrix<F> U = embed<F>(GB.Ainv) * S;
    Matrix<F> Sinv = unipotent_inverse(U) * embed<F>(GB.Ainv);
    return S * (grN.m + delta.m) * Sinv;
}

// ---------------------------------------------------------------------------
// Deligne systems

struct DeligneSystemData {
    int dim = 0;
    std::vector<Filtration<Rational>> W;  // W^0 .. W^n
    std::vector<Matrix<Rational>> N;      // N_1 .. N_n stored at 0 .. n-1
    Matrix<Rational> Y;                   // splitting of W^n
    int length() const { return static_cast<int>(N.size()); }
};

struct CheckLine {
    std::string name;
    bool pass = false;
    std::string witness;
};

inline std::vector<CheckLine> validate_deligne_data(const DeligneSystemData& D) {
    std::vector<CheckLine> out;
    int n = D.length();
    auto add = [&](std::string nm, bool ok, std::string w = "") { out.push_back({std::move(nm), ok, ok ? "" : std::move(w)}); };
    add("shape", static_cast<int>(D.W.size()) == n + 1, "expected n+1 filtrations");
    if (static_cast<int>(D.W.size()) != n + 1) return out;
    for (int j = 0; j < n; ++j) {
        add("N" + std::to_string(j + 1) + " nilpotent", is_nilpotent(D.N[j]));
        for (int i = 0; i <= n; ++i)
            add("N" + std::to_string(j + 1) + " preserves W^" + std::to_string(i), preserves(D.N[j], D.W[i]));
        for (int k = j + 1; k <= n; ++k)
            add("N" + std::to_string(j + 1) + " in W^" + std::to_string(k) + "_{-2}End", in_endo_filtration(D.N[j], D.W[k], -2));
    }
    for (int j = 1; j <= n; ++j) {
        bool ok = false;
        std::string why = "relative monodromy filtration does not exist";
        try {
            if (is_nilpotent(D.N[j - 1]) && preserves(D.N[j - 1], D.W[j - 1])) {
                auto M = relative_monodromy_filtration(D.N[j - 1], D.W[j - 1]);
                ok = M && *M == D.W[j];
                if (M && !ok) why = "M(N_j, W^{j-1}) differs from W^j";
            }
        } catch (const std::exception& e) { why = e.what(); }
        add("W^" + std::to_string(j) + " = M(N" + std::to_string(j) + ", W^" + std::to_string(j - 1) + ")", ok, why);
    }
    add("Y splits W^n", splits(D.Y, D.W[n]));
    for (int i = 0; i <= n; ++i) add("Y compatible with W^" + std::to_string(i), preserves(D.Y, D.W[i]));
    for (int j = 0; j < n; ++j)
        add("N" + std::to_string(j + 1) + " has Y-weight -2", commutator(D.Y, D.N[j]) == Rational(-2) * D.N[j]);
    return out;
}

inline bool all_pass(const std::vector<CheckLine>& c) {
    for (auto& l : c)
        if (!l.pass) return false;
    return true;
}

// ys[j] = Y^j for j = 0..n
inline std::vector<Splitting<Rational>> descend_splittings(const DeligneSystemData& D) {
    int n = D.length();
    std::vector<Splitting<Rational>> ys(n + 1);
    ys[n] = splitting_of(D.Y, D.W[n]);
    for (int j = n; j >= 1; --j) {
        SplitOptions opt;
        opt.known_relative = D.W[j];
        auto sd = deligne_splitting(D.W[j - 1], D.N[j - 1], ys[j], opt);
        ys[j - 1] = splitting_of(sd.Y0.Y, D.W[j - 1]);
    }
    return ys;
}

struct Sl2nStructure {
    std::vector<Splitting<Rational>> tau;  // Y^0 .. Y^n
    std::vector<Matrix<Rational>> H;       // H_j = Y^j - Y^{j-1}, j = 1..n at 0..n-1
    std::vector<Matrix<Rational>> Nhat;    // lowering
    std::vector<Matrix<Rational>> Nplus;   // raising
};

namespace detail {

// Dense solve over all n^2 entries; used when H has no rational eigenbasis.
inline Matrix<Rational> complete_triple_dense(const Matrix<Rational>& H, const Matrix<Rational>& E) {
    int n = H.rows();
    Matrix<Rational> A(2 * n * n, n * n), b(2 * n * n, 1);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            Matrix<Rational> U = Matrix<Rational>::unit(n, p, q);
            Matrix<Rational> r1 = commutator(H, U) - Rational(2) * U;
            Matrix<Rational> r2 = commutator(E, U);
            for (int i = 0; i < n * n; ++i) {
                A(i, p * n + q) = r1.data()[i];
                A(n * n + i, p * n + q) = r2.data()[i];
            }
        }
    for (int i = 0; i < n * n; ++i) b(n * n + i, 0) = -H.data()[i];
    auto s = solve_linear(A, b);
    if (!s.consistent()) throw PreconditionError(PreconditionError::Kind::Unsolvable, "sl(2) triple completion is inconsistent");
    if (s.kind != SolveKind::Unique) throw std::logic_error("sl(2) triple completion is not unique");
    Matrix<Rational> X(n, n);
    for (int i = 0; i < n * n; ++i) X(i / n, i % n) = s.particular(i, 0);
    return X;
}

}  // namespace detail

// The unique X with [H, X] = 2X and [E, X] = -H. In an H-eigenbasis X is
// supported on entries (i, j) with h_i - h_j = 2.
inline Matrix<Rational> complete_triple(const Matrix<Rational>& H, const Matrix<Rational>& E) {
    int n = H.rows();
    auto spec = integer_spectrum(H);
    Matrix<Rational> P(n, 0);
    std::vector<int> h;
    for (int a : spec) {
        Matrix<Rational> B = kernel(H - Rational(a) * Matrix<Rational>::identity(n));
        P = P.hcat(B);
        h.insert(h.end(), B.cols(), a);
    }
    if (P.cols() != n) return detail::complete_triple_dense(H, E);
    Matrix<Rational> Pinv = inverse(P);
    Matrix<Rational> Et = Pinv * E * P;
    std::vector<std::pair<int, int>> unk;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (h[i] - h[j] == 2) unk.push_back({i, j});
    // [Et, X] = -diag(h), entrywise
    Matrix<Rational> A(n * n, static_cast<int>(unk.size())), b(n * n, 1);
    for (std::size_t t = 0; t < unk.size(); ++t) {
        auto [p, q] = unk[t];
        for (int i = 0; i < n; ++i) {
            A(i * n + q, t) += Et(i, p);
            A(p * n + i, t) -= Et(q, i);
        }
    }
    for (int i = 0; i < n; ++i) b(i * n + i, 0) = -Rational(h[i]);
    auto s = solve_linear(A, b);
    if (!s.consistent()) throw PreconditionError(PreconditionError::Kind::Unsolvable, "sl(2) triple completion is inconsistent");
    if (s.kind != SolveKind::Unique) throw std::logic_error("sl(2) triple completion is not unique");
    Matrix<Rational> X(n, n);
    for (std::size_t t = 0; t < unk.size(); ++t) X(unk[t].first, unk[t].second) = s.particular(static_cast<int>(t), 0);
    return P * X * Pinv;
}

inline std::vector<CheckLine> sl2n_relations(const Sl2nStructure& S) {
    std::vector<CheckLine> out;
    int n = static_cast<int>(S.H.size());
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            std::string jk = std::to_string(j + 1) + "," + std::to_string(k + 1);
            bool same = j == k;
            auto& Hj = S.H[j];
            out.push_back({"[H,H] " + jk, commutator(Hj, S.H[k]).is_zero(), ""});
            out.push_back({"[H,E] " + jk, commutator(Hj, S.Nhat[k]) == Rational(same ? -2 : 0) * S.Nhat[k], ""});
            out.push_back({"[H,F] " + jk, commutator(Hj, S.Nplus[k]) == Rational(same ? 2 : 0) * S.Nplus[k], ""});
            out.push_back({"[E,F] " + jk, commutator(S.Nhat[j], S.Nplus[k]) == (same ? -Hj : Matrix<Rational>(Hj.rows(), Hj.cols())), ""});
            out.push_back({"[E,E] " + jk, commutator(S.Nhat[j], S.Nhat[k]).is_zero(), ""});
            out.push_back({"[F,F] " + jk, commutator(S.Nplus[j], S.Nplus[k]).is_zero(), ""});
            if (k > j) out.push_back({"E" + std::to_string(k + 1) + " has Y^" + std::to_string(j) + "-weight 0",
                                      commutator(S.tau[j].Y, S.Nhat[k]).is_zero(), ""});
        }
    return out;
}

inline Sl2nStructure sl2_structure(const DeligneSystemData& D, const std::vector<Splitting<Rational>>& ys) {
    Sl2nStructure S;
    S.tau = ys;
    int n = D.length();
    for (int j = 1; j <= n; ++j) {
        Matrix<Rational> Hj = ys[j].Y - ys[j - 1].Y;
        Matrix<Rational> E = weight_component(D.N[j - 1], ys[j - 1], 0);
        S.H.push_back(Hj);
        S.Nhat.push_back(E);
        S.Nplus.push_back(complete_triple(Hj, E));
    }
    auto rel = sl2n_relations(S);
    for (auto& r : rel)
        if (!r.pass) throw std::logic_error("sl(2)^n relation fails: " + r.name);
    return S;
}

inline Sl2nStructure sl2_structure(const DeligneSystemData& D) { return sl2_structure(D, descend_splittings(D)); }

}  // namespace mslab
