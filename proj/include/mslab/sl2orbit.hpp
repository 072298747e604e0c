#pragma once

#include "cones.hpp"
#include "deligne.hpp"
#include "laurent.hpp"
#include "ratio.hpp"
#include "series.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mslab {

using RF = RationalFunction;
using Coefficients = std::map<int, Matrix<Rational>>;

// ---------------------------------------------------------------------------
// helpers

inline std::vector<int> ad_support(const Matrix<Rational>& X, const Splitting<Rational>& S) {
    std::vector<int> out;
    for (auto& [a, c] : weight_decomposition(X, S)) out.push_back(a);
    return out;
}

inline Splitting<Rational> semisimple_splitting(const Matrix<Rational>& Y) { return make_splitting(Y, integer_spectrum(Y)); }

// gr(Y) in graded coordinates of W, as a splitting of gr^W V
inline Splitting<Rational> graded_splitting(const GradedBasis<Rational>& GB, const Matrix<Rational>& Y) {
    return semisimple_splitting(graded_endomorphism(GB, Y).m);
}

// u with Y' = u Y u^{-1}, from projections only (no filtration test)
template <class F, class G>
Matrix<F> conjugator(const Splitting<F>& Yp, const Splitting<G>& Y) {
    Matrix<F> u(Yp.dim(), Yp.dim());
    for (int w : Y.spectrum) u += Yp.projection(w) * embed<F>(Y.projection(w));
    return u;
}

// coefficients of y^{-m}, keyed by m; lead = highest power of y present
inline Coefficients y_coefficients(const Matrix<RF>& x, int order, int* lead = nullptr) {
    auto s = laurent_expand(x, order);
    int l = effective_lead(s);
    if (lead) *lead = l;
    Coefficients out;
    for (int p = l; p >= -order; --p) out[-p] = s.coefficient(p);
    return out;
}

inline Coefficients s_coefficients(const Matrix<PowerSeries>& x, int upto) {
    Coefficients out;
    for (int k = 0; k <= upto; ++k) out[k] = series_coefficient(x, k);
    return out;
}

// t^{-1} X(y) t for t = S(y^{-1/2}): X_m^{(a)} y^{-m} becomes a coefficient of s^{2m-a}.
// Coefficients are complete for s-powers <= *complete.
inline Coefficients twist_coefficients(const Coefficients& ycoef, const Splitting<Rational>& S, int order, int* complete) {
    int amax = S.spectrum.back() - S.spectrum.front();
    if (complete) *complete = 2 * order - amax;
    Coefficients out;
    for (auto& [m, X] : ycoef)
        for (auto& [a, c] : weight_decomposition(X, S)) {
            int k = 2 * m - a;
            auto it = out.find(k);
            if (it == out.end()) out.emplace(k, c);
            else it->second += c;
        }
    for (auto it = out.begin(); it != out.end();) it = it->second.is_zero() ? out.erase(it) : std::next(it);
    return out;
}

inline Matrix<Rational> coefficient_or_zero(const Coefficients& c, int k, int n) {
    auto it = c.find(k);
    return it == c.end() ? Matrix<Rational>(n, n) : it->second;
}

inline std::string weights_str(const std::vector<int>& ws) {
    std::string s = "{";
    for (std::size_t i = 0; i < ws.size(); ++i) s += (i ? "," : "") + std::to_string(ws[i]);
    return s + "}";
}

// x = sum c_i g_i over the generators, then the linear extension of the action
inline Matrix<Rational> action_element(const ConeAction& A, const Vec& x) {
    const Cone& s = A.sigma;
    Matrix<Rational> G(s.ambient(), s.num_generators());
    for (int i = 0; i < s.num_generators(); ++i)
        for (int j = 0; j < s.ambient(); ++j) G(j, i) = s.generators()[i][j];
    auto sol = solve_linear(G, Matrix<Rational>::column(x));
    if (!sol.consistent()) throw std::invalid_argument("action_element: vector outside the span of the cone");
    std::vector<Rational> c(s.num_generators());
    for (int i = 0; i < s.num_generators(); ++i) c[i] = sol.particular(i, 0);
    return A.element(c);
}

// A splitting of W commuting with N, if one exists: Y_ref + (W_{-1}End part) by a linear solve.
inline std::optional<Matrix<Rational>> compatible_splitting(const Filtration<Rational>& W, const Matrix<Rational>& N) {
    GradedBasis<Rational> GB(W);
    int n = W.ambient();
    std::vector<Rational> dw;
    for (int w : GB.weight) dw.push_back(w);
    Matrix<Rational> Yref = GB.A * Matrix<Rational>::diagonal(dw) * GB.Ainv;
    std::vector<Matrix<Rational>> basis;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (GB.weight[i] < GB.weight[j]) basis.push_back(GB.A * Matrix<Rational>::unit(n, i, j) * GB.Ainv);
    Matrix<Rational> rhs0 = commutator(Yref, N);
    if (basis.empty()) return rhs0.is_zero() ? std::optional(Yref) : std::nullopt;
    Matrix<Rational> A(n * n, static_cast<int>(basis.size())), b(n * n, 1);
    for (std::size_t t = 0; t < basis.size(); ++t) {
        Matrix<Rational> c = commutator(basis[t], N);
        for (int e = 0; e < n * n; ++e) A(e, static_cast<int>(t)) = c.data()[e];
    }
    for (int e = 0; e < n * n; ++e) b(e, 0) = -rhs0.data()[e];
    auto sol = solve_linear(A, b);
    if (!sol.consistent()) return std::nullopt;
    Matrix<Rational> Y = Yref;
    for (std::size_t t = 0; t < basis.size(); ++t) Y += sol.particular(static_cast<int>(t), 0) * basis[t];
    return Y;
}

// ---------------------------------------------------------------------------
// expansion reports

struct ExpansionReport {
    std::string statement;
    int order = 0;
    std::vector<int> graded_weights;  // W-weights of the graded coordinates
    Coefficients u;                   // coefficient of y^{-m}
    Coefficients delta;               // delta_m, graded coordinates
    Coefficients u_twisted;           // coefficient of s^m, s = y^{-1/2}
    Coefficients delta_twisted;
    int twisted_complete_u = 0;       // twisted coefficients exact up to this s-power
    int twisted_complete_delta = 0;
    Matrix<Rational> twist_grading;     // Y^1 on V
    Matrix<Rational> twist_grading_gr;  // gr Y^1, graded coordinates
    Matrix<Rational> delta_limit;       // delta_W(N_1)
    std::vector<CheckLine> checks;

    bool pass() const { return all_pass(checks); }
    const CheckLine* failing() const {
        for (auto& c : checks)
            if (!c.pass) return &c;
        return nullptr;
    }
};

namespace detail {

struct Checker {
    std::vector<CheckLine>* out;
    void operator()(const std::string& name, bool ok, const std::string& witness = "") const {
        out->push_back({name, ok, ok ? "" : witness});
    }
};

// first key violating pred, as a witness
inline std::string first_bad(const Coefficients& c, const std::function<bool(int, const Matrix<Rational>&)>& pred) {
    for (auto& [k, X] : c)
        if (!pred(k, X)) return "m = " + std::to_string(k);
    return "";
}

inline bool all_ok(const Coefficients& c, const std::function<bool(int, const Matrix<Rational>&)>& pred) {
    return first_bad(c, pred).empty();
}

inline bool in_graded_weight(const Matrix<Rational>& X, const std::vector<int>& wt, int k) {
    return GradedMap<Rational>{X, wt}.in_weight(k);
}

inline int max_ad_weight(const Matrix<Rational>& X, const Splitting<Rational>& S) {
    auto a = ad_support(X, S);
    return a.empty() ? INT_MIN : a.back();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// one-variable systems yN_1 + N_2

struct OneVarSystem {
    MonodromySystem M;
    DeligneSystemData D;               // W^0 = W, W^1, W^2; N_1, N_2; Y
    std::vector<Splitting<Rational>> ys;  // Y^0, Y^1, Y^2
    const Filtration<Rational>& W() const { return D.W[0]; }
    const Matrix<Rational>& N1() const { return D.N[0]; }
    const Matrix<Rational>& N2() const { return D.N[1]; }
};

inline std::string failing_names(const std::vector<CheckLine>& rep) {
    std::string s;
    for (auto& c : rep)
        if (!c.pass) s += (s.empty() ? "" : "; ") + c.name + (c.witness.empty() ? "" : " (" + c.witness + ")");
    return s;
}

inline OneVarSystem one_var_system(const Filtration<Rational>& W, const Matrix<Rational>& N1, const Matrix<Rational>& N2,
                                   const Matrix<Rational>& Y) {
    OneVarSystem S;
    S.M = validate_monodromy_system(orthant_action(W, {N1, N2}, Y));
    if (!S.M.valid) throw std::invalid_argument("system invalid: " + failing_names(S.M.report));
    S.D = deligne_system_from(S.M, {{1, 0}, {0, 1}});
    S.ys = descend_splittings(S.D);
    return S;
}

inline OneVarSystem one_var_system(const DeligneSystemData& D) {
    if (D.length() != 2) throw std::invalid_argument("one_var_system: two operators expected");
    return one_var_system(D.W[0], D.N[0], D.N[1], D.Y);
}

namespace detail {

struct OverY {
    Splitting<RF> Y0;
    Matrix<RF> u;          // relative to the given reference splitting
    GradedMap<RF> delta;
};

// spl_W and delta_W of y A + B over Q(y)
inline OverY over_y(const Filtration<Rational>& W, const Matrix<Rational>& A, const Matrix<Rational>& B,
                    const Splitting<Rational>& Y, const Filtration<Rational>& WY, const Splitting<Rational>& ref) {
    Matrix<RF> N = RF::y() * embed<RF>(A) + embed<RF>(B);
    SplitOptions opt;
    opt.known_relative = WY;
    auto sd = deligne_splitting(W, N, Y, opt);
    return {sd.Y0, conjugator(sd.Y0, ref), sd.delta};
}

// spl_W and delta_W of an operator over Q[[s]]; preconditions hold at s = 0 by construction
struct OverS {
    Matrix<PowerSeries> u;
    Matrix<PowerSeries> delta;
};

inline OverS over_s(const Filtration<Rational>& W, const Matrix<PowerSeries>& N, const Splitting<Rational>& Y,
                    const Splitting<Rational>& ref, int K) {
    SplitOptions opt;
    opt.verify_preconditions = false;
    auto sd = deligne_splitting(W, with_order(N, K), Y, opt);
    return {conjugator(sd.Y0, ref), sd.delta.m};
}

// sum_a s^{-a} X^{(a)}; negative exponents are reported through *bad
inline Matrix<PowerSeries> twisted_operator(const Matrix<Rational>& X, const Splitting<Rational>& S, int K, std::string* bad) {
    int n = X.rows();
    Matrix<PowerSeries> out(n, n);
    for (auto& [a, c] : weight_decomposition(X, S)) {
        if (a > 0) {
            if (bad) *bad += (bad->empty() ? "" : ", ") + std::string("component of weight ") + std::to_string(a);
            continue;
        }
        std::vector<Rational> mono(-a + 1);
        mono[-a] = 1;
        PowerSeries sp(mono, K);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (!c(i, j).is_zero()) out(i, j) += sp * PowerSeries(c(i, j));
    }
    return out;
}

inline std::string compare_coefficients(const Coefficients& a, const Coefficients& b, int lo, int hi, int n) {
    for (int k = lo; k <= hi; ++k)
        if (coefficient_or_zero(a, k, n) != coefficient_or_zero(b, k, n)) return "s^" + std::to_string(k);
    return "";
}

}  // namespace detail

// u(y) and delta(y) of yN_1 + N_2 with memberships, twisted forms, and the
// direct computation of the twisted forms in s = y^{-1/2} as a cross-check.
inline ExpansionReport one_var_expansion(const OneVarSystem& S, int order = 8) {
    const auto& W = S.W();
    const auto& ys = S.ys;
    int n = W.ambient();
    GradedBasis<Rational> GB(W);
    ExpansionReport R;
    R.statement = "one-variable expansion of spl_W and delta_W";
    R.order = order;
    R.graded_weights = GB.weight;
    detail::Checker add{&R.checks};

    auto fam = detail::over_y(W, S.N1(), S.N2(), ys[2], S.D.W[2], ys[0]);
    int lead_u = 0, lead_d = 0;
    R.u = y_coefficients(fam.u, order, &lead_u);
    R.delta = y_coefficients(fam.delta.m, order, &lead_d);

    SplitOptions o1;
    o1.known_relative = S.D.W[1];
    R.delta_limit = deligne_splitting(W, S.N1(), ys[1], o1).delta.m;

    const Filtration<Rational>& W1 = S.D.W[1];
    Matrix<Rational> I = Matrix<Rational>::identity(n);
    add("u has no positive powers of y", lead_u <= 0, "y^" + std::to_string(lead_u));
    add("u_0 = 1", coefficient_or_zero(R.u, 0, n) == I);
    add("u_m in W_{-1}End for m >= 1",
        detail::all_ok(R.u, [&](int m, const Matrix<Rational>& X) { return m == 0 || in_endo_filtration(X, W, -1); }),
        detail::first_bad(R.u, [&](int m, const Matrix<Rational>& X) { return m == 0 || in_endo_filtration(X, W, -1); }));
    auto u_w1 = [&](int m, const Matrix<Rational>& X) { return m == 0 || in_endo_filtration(X, W1, m - 1); };
    add("u_m in W^1_{m-1}End", detail::all_ok(R.u, u_w1), detail::first_bad(R.u, u_w1));
    auto u_y = [&](int, const Matrix<Rational>& X) { return commutator(ys[2].Y, X).is_zero(); };
    add("u_m of Y-weight 0", detail::all_ok(R.u, u_y), detail::first_bad(R.u, u_y));

    auto grY = graded_splitting(GB, ys[2].Y);
    auto grY1 = graded_splitting(GB, ys[1].Y);
    add("delta has no powers above y^1", lead_d <= 1, "y^" + std::to_string(lead_d));
    add("delta_{-1} = delta_W(N_1)", coefficient_or_zero(R.delta, -1, n) == R.delta_limit);
    auto d_w = [&](int, const Matrix<Rational>& X) { return detail::in_graded_weight(X, GB.weight, -2); };
    add("delta_m in W_{-2}gr End", detail::all_ok(R.delta, d_w), detail::first_bad(R.delta, d_w));
    auto d_w1 = [&](int m, const Matrix<Rational>& X) { return detail::max_ad_weight(X, grY1) <= m - 1; };
    add("delta_m in W^1_{m-1}gr End", detail::all_ok(R.delta, d_w1), detail::first_bad(R.delta, d_w1));
    auto d_y = [&](int, const Matrix<Rational>& X) { return commutator(grY.Y, X) == Rational(-2) * X; };
    add("delta_m of Y-weight -2", detail::all_ok(R.delta, d_y), detail::first_bad(R.delta, d_y));

    // twisted forms from the y-series
    R.twist_grading = ys[1].Y;
    R.twist_grading_gr = grY1.Y;
    R.u_twisted = twist_coefficients(R.u, ys[1], order, &R.twisted_complete_u);
    R.delta_twisted = twist_coefficients(R.delta, grY1, order, &R.twisted_complete_delta);
    int lo_u = R.u_twisted.empty() ? 0 : R.u_twisted.begin()->first;
    int lo_d = R.delta_twisted.empty() ? 0 : R.delta_twisted.begin()->first;
    add("twisted u has no negative powers of s", lo_u >= 0, "s^" + std::to_string(lo_u));
    add("twisted delta has no negative powers of s", lo_d >= 0, "s^" + std::to_string(lo_d));

    // direct: N_y = N_1 + sum_r s^r M^{(-r)}
    int K = std::max(R.twisted_complete_u, R.twisted_complete_delta) + 1;
    K = std::max(K, 1);
    std::string bad;
    Matrix<PowerSeries> Ny = embed<PowerSeries>(S.N1()) + detail::twisted_operator(S.N2(), ys[1], K, &bad);
    add("N_2 has Y^1-weights <= 0", bad.empty(), bad);
    if (bad.empty()) {
        auto direct = detail::over_s(W, Ny, ys[2], ys[0], K);
        auto du = s_coefficients(direct.u, K), dd = s_coefficients(direct.delta, K);
        std::string wu = detail::compare_coefficients(R.u_twisted, du, std::min(lo_u, 0), R.twisted_complete_u, n);
        std::string wd = detail::compare_coefficients(R.delta_twisted, dd, std::min(lo_d, 0), R.twisted_complete_delta, n);
        add("twisted u agrees with spl_W(N_y)", wu.empty(), wu);
        add("twisted delta agrees with delta_W(N_y)", wd.empty(), wd);
    }
    return R;
}

inline ExpansionReport one_var_expansion(const Filtration<Rational>& W, const Matrix<Rational>& N1, const Matrix<Rational>& N2,
                                         const Matrix<Rational>& Y, int order = 8) {
    return one_var_expansion(one_var_system(W, N1, N2, Y), order);
}

// Y^1-weight bounds on the twisted coefficients, up to their completeness bound
inline std::vector<CheckLine> verify_twisted_weight_bounds(const ExpansionReport& R) {
    std::vector<CheckLine> out;
    detail::Checker add{&out};
    int n = R.twist_grading.rows();
    auto S = semisimple_splitting(R.twist_grading);
    auto Sg = semisimple_splitting(R.twist_grading_gr);
    std::string wu, wd;
    bool one = coefficient_or_zero(R.u_twisted, 0, n) == Matrix<Rational>::identity(n);
    for (auto& [m, X] : R.u_twisted) {
        if (m > R.twisted_complete_u) break;
        if (m < 0) { wu = "negative power s^" + std::to_string(m); break; }
        if (m == 0) continue;
        for (int a : ad_support(X, S))
            if (std::abs(a) >= m) {
                wu = "m = " + std::to_string(m) + ", weight " + std::to_string(a);
                break;
            }
        if (!wu.empty()) break;
    }
    for (auto& [m, X] : R.delta_twisted) {
        if (m > R.twisted_complete_delta) break;
        if (m < 0) { wd = "negative power s^" + std::to_string(m); break; }
        for (int a : ad_support(X, Sg))
            if (a + 2 < -m || a + 2 > m) {
                wd = "m = " + std::to_string(m) + ", weight " + std::to_string(a);
                break;
            }
        if (!wd.empty()) break;
    }
    add("twisted u_0 = 1", one);
    add("twisted u_m has Y^1-weights |s| < m", wu.empty(), wu);
    add("twisted delta_0 = delta_W(N_1)", coefficient_or_zero(R.delta_twisted, 0, n) == R.delta_limit);
    add("twisted delta_m has Y^1-weights with -m <= s+2 <= m", wd.empty(), wd);
    return out;
}

// Expansion when (W, N_1) splits: delta is Taylor in y^{-1}, and the starred
// twist by Y^1 - Y^0 gives only non-negative powers of s = y^{-1/2}.
inline ExpansionReport mild_one_var(const OneVarSystem& S, int order = 8) {
    const auto& W = S.W();
    if (!compatible_splitting(W, S.N1())) throw std::invalid_argument("(W, N_1) does not split");
    const auto& ys = S.ys;
    int n = W.ambient();
    GradedBasis<Rational> GB(W);
    ExpansionReport R;
    R.statement = "expansion with (W, N_1) split";
    R.order = order;
    R.graded_weights = GB.weight;
    detail::Checker add{&R.checks};

    auto fam = detail::over_y(W, S.N1(), S.N2(), ys[2], S.D.W[2], ys[0]);
    int lead_u = 0, lead_d = 0;
    R.u = y_coefficients(fam.u, order, &lead_u);
    R.delta = y_coefficients(fam.delta.m, order, &lead_d);
    SplitOptions o1;
    o1.known_relative = S.D.W[1];
    R.delta_limit = deligne_splitting(W, S.N1(), ys[1], o1).delta.m;
    add("delta_W(N_1) = 0", R.delta_limit.is_zero());
    add("delta is Taylor in y^{-1}", lead_d <= 0, "y^" + std::to_string(lead_d));

    Matrix<Rational> H1 = ys[1].Y - ys[0].Y;
    auto Hs = semisimple_splitting(H1);
    auto grH = semisimple_splitting(graded_endomorphism(GB, H1).m);
    R.twist_grading = H1;
    R.twist_grading_gr = grH.Y;
    R.delta_twisted = twist_coefficients(R.delta, grH, order, &R.twisted_complete_delta);
    R.u_twisted = twist_coefficients(R.u, Hs, order, &R.twisted_complete_u);
    int lo = R.delta_twisted.empty() ? 0 : R.delta_twisted.begin()->first;
    add("starred delta has no negative powers of s", lo >= 0, "s^" + std::to_string(lo));
    add("N_1 has (Y^1 - Y^0)-weight -2", commutator(H1, S.N1()) == Rational(-2) * S.N1());

    int K = std::max(R.twisted_complete_delta + 1, 1);
    std::string bad;
    Matrix<PowerSeries> Ny = embed<PowerSeries>(S.N1()) + detail::twisted_operator(S.N2(), Hs, K, &bad);
    add("N_2 has (Y^1 - Y^0)-weights <= 0", bad.empty(), bad);
    if (bad.empty()) {
        auto direct = detail::over_s(W, Ny, ys[2], ys[0], K);
        auto dd = s_coefficients(direct.delta, K);
        std::string wd = detail::compare_coefficients(R.delta_twisted, dd, std::min(lo, 0), R.twisted_complete_delta, n);
        add("starred delta agrees with delta_W(N_y)", wd.empty(), wd);
    }
    return R;
}

// ---------------------------------------------------------------------------
// sl(2)-triples and the isotypic filtration

struct Sl2Triple {
    Matrix<Rational> H, E, F;  // [H,E] = -2E, [H,F] = 2F, [E,F] = -H
};

inline std::vector<CheckLine> triple_relations(const Sl2Triple& T) {
    std::vector<CheckLine> out;
    out.push_back({"[H,E] = -2E", commutator(T.H, T.E) == Rational(-2) * T.E, ""});
    out.push_back({"[H,F] = 2F", commutator(T.H, T.F) == Rational(2) * T.F, ""});
    out.push_back({"[E,F] = -H", commutator(T.E, T.F) == -T.H, ""});
    return out;
}

// action on End(V) flattened row-major: ad X = X (x) 1 - 1 (x) X^T
inline Matrix<Rational> adjoint_operator(const Matrix<Rational>& X) {
    int n = X.rows();
    Matrix<Rational> A(n * n, n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                if (!X(i, k).is_zero()) A(i * n + j, k * n + j) += X(i, k);
                if (!X(k, j).is_zero()) A(i * n + j, i * n + k) -= X(k, j);
            }
    return A;
}

inline Sl2Triple adjoint_triple(const Sl2Triple& T) { return {adjoint_operator(T.H), adjoint_operator(T.E), adjoint_operator(T.F)}; }

inline Matrix<Rational> casimir(const Sl2Triple& T) { return T.H * T.H + Rational(2) * (T.F * T.E + T.E * T.F); }

// sum of the Sym^b-isotypic parts for b <= k (Casimir eigenvalue b(b+2))
inline Subspace<Rational> isotypic_filtration(const Sl2Triple& T, int k) {
    if (!all_pass(triple_relations(T))) throw std::invalid_argument("isotypic_filtration: sl(2) relations fail");
    int d = T.H.rows();
    Subspace<Rational> out = Subspace<Rational>::zero(d);
    Matrix<Rational> C = casimir(T), I = Matrix<Rational>::identity(d);
    for (int b = 0; b <= std::min(k, d - 1); ++b) out = out + Subspace<Rational>::span_columns(kernel(C - Rational(b * (b + 2)) * I));
    return out;
}

inline Subspace<Rational> isotypic_filtration_end(const Sl2Triple& T, int k) { return isotypic_filtration(adjoint_triple(T), k); }

inline std::vector<Rational> flatten(const Matrix<Rational>& X) { return X.data(); }

inline Matrix<Rational> unflatten(const std::vector<Rational>& v, int n) {
    Matrix<Rational> X(n, n);
    for (int i = 0; i < n * n; ++i) X(i / n, i % n) = v[i];
    return X;
}

// Commutation and isotypic relations among N_1, the Y^1-components M^{(-r)}
// of N_2, and the triple (Y^2 - Y^1, N^_2, N^_2^+).
inline std::vector<CheckLine> two_variable_identities(const OneVarSystem& S) {
    std::vector<CheckLine> out;
    detail::Checker add{&out};
    auto sl = sl2_structure(S.D, S.ys);
    const Matrix<Rational>& E2 = sl.Nhat[1];
    const Matrix<Rational>& F2 = sl.Nplus[1];
    Sl2Triple T{sl.H[1], E2, F2};
    std::string w1;
    for (auto& [a, c] : weight_decomposition(S.N1(), S.ys[0]))
        if (!commutator(c, E2).is_zero() || !commutator(c, F2).is_zero()) w1 = "Y^0-weight " + std::to_string(a);
    add("Y^0-components of N_1 commute with N^_2 and N^_2^+", w1.empty(), w1);
    auto comps = weight_decomposition(S.N2(), S.ys[1]);
    std::string pos, wr, wfil;
    bool m1 = true;
    auto fil_end = [&](int k) { return isotypic_filtration_end(T, k); };
    for (auto& [a, c] : comps) {
        if (a > 0) pos = "weight " + std::to_string(a);
        int r = -a;
        if (r == 1) m1 = false;
        if (r >= 1 && !commutator(c, F2).is_zero()) wr = "r = " + std::to_string(r);
        if (r >= 2 && !fil_end(r - 2).contains(flatten(c))) wfil = "r = " + std::to_string(r);
    }
    add("N_2 has Y^1-weights <= 0", pos.empty(), pos);
    add("M^{(-1)} = 0", m1);
    add("M^{(-r)} commutes with N^_2^+ for r >= 1", wr.empty(), wr);
    add("N_1 in fil_0 End", fil_end(0).contains(flatten(S.N1())));
    add("M^{(-r)} in fil_{r-2} End for r >= 2", wfil.empty(), wfil);
    return out;
}

// ---------------------------------------------------------------------------
// torus twists

struct TwistContext {
    MonodromySystem M;
    FaceBase psi;
    std::vector<std::vector<Rational>> c;           // encasement coordinates, c[j][0] = 1
    std::vector<std::vector<Matrix<Rational>>> Nk;  // N_{j,k}
    DeligneSystemData D;                            // N_j = sum_k c_{j,k} N_{j,k}
    std::vector<Splitting<Rational>> ys;            // Y^0 .. Y^n for the point
    std::vector<Splitting<Rational>> tau;           // tau_1 .. tau_{n-1}

    int n() const { return psi.length(); }
    // (j,k), 1-based, k >= 2
    std::vector<std::pair<int, int>> ratio_vars() const {
        std::vector<std::pair<int, int>> v;
        for (int j = 0; j < n(); ++j)
            for (std::size_t k = 1; k < Nk[j].size(); ++k) v.push_back({j + 1, static_cast<int>(k) + 1});
        return v;
    }
    int nvars() const { return n() - 1 + static_cast<int>(ratio_vars().size()); }
};

inline TwistContext twist_context(const MonodromySystem& M, const FaceBase& psi, const RatioPoint& p) {
    if (!M.valid) throw std::invalid_argument("twist_context: system invalid: " + failing_names(M.report));
    psi.validate();
    auto c = encased_in(p, psi);
    if (!c) throw std::invalid_argument("twist_context: point is not encased in the base");
    TwistContext ctx;
    ctx.M = M;
    ctx.psi = psi;
    ctx.c = *c;
    int n = psi.length();
    ctx.D.dim = M.action.dim();
    ctx.D.W.push_back(M.action.W);
    for (int j = 0; j < n; ++j) {
        ctx.Nk.emplace_back();
        Matrix<Rational> Nj(ctx.D.dim, ctx.D.dim);
        for (std::size_t k = 0; k < psi.elems[j].size(); ++k) {
            ctx.Nk[j].push_back(action_element(M.action, psi.elems[j][k]));
            Nj += ctx.c[j][k] * ctx.Nk[j].back();
        }
        ctx.D.N.push_back(Nj);
        ctx.D.W.push_back(face_weight_filtration(M, psi.flag[j + 1]));
    }
    ctx.D.Y = M.action.Y;
    ctx.ys = descend_splittings(ctx.D);
    for (int j = 1; j < n; ++j) ctx.tau.push_back(ctx.ys[j]);
    return ctx;
}

// replace the gradings tau_1 .. tau_{n-1}
inline TwistContext with_gradings(TwistContext ctx, const std::vector<Matrix<Rational>>& taus) {
    if (static_cast<int>(taus.size()) != ctx.n() - 1) throw std::invalid_argument("with_gradings: n-1 gradings expected");
    ctx.tau.clear();
    for (auto& t : taus) ctx.tau.push_back(semisimple_splitting(t));
    return ctx;
}

// each tau_j splits W(sigma_j); generators of sigma_j have tau_k-weight -2 for j <= k
inline std::vector<CheckLine> twist_conditions(const TwistContext& ctx) {
    std::vector<CheckLine> out;
    detail::Checker add{&out};
    int n = ctx.n();
    for (int j = 1; j < n; ++j) {
        const auto& t = ctx.tau[j - 1];
        add("tau_" + std::to_string(j) + " splits W(sigma_" + std::to_string(j) + ")",
            splits(t.Y, face_weight_filtration(ctx.M, ctx.psi.flag[j])));
    }
    for (int j = 1; j < n; ++j)
        for (int k = j; k < n; ++k) {
            std::string w;
            for (int g : ctx.psi.flag[j]) {
                const auto& N = ctx.M.action.images[g];
                if (commutator(ctx.tau[k - 1].Y, N) != Rational(-2) * N) w = "generator " + std::to_string(g);
            }
            add("sigma_" + std::to_string(j) + " has tau_" + std::to_string(k) + "-weight -2", w.empty(), w);
        }
    return out;
}

struct TwistResult {
    MultiPoly<Matrix<Rational>> Ny;  // variables s_1..s_{n-1}, then the ratios z_{j,k}
    bool denominator_free = false;
    std::vector<std::string> offending;
};

namespace detail {

// components of X with joint weights under the gradings
inline std::vector<std::pair<std::vector<int>, Matrix<Rational>>> joint_decomposition(const Matrix<Rational>& X,
                                                                                     const std::vector<Splitting<Rational>>& gs) {
    std::vector<std::pair<std::vector<int>, Matrix<Rational>>> cur{{{}, X}};
    for (auto& g : gs) {
        std::vector<std::pair<std::vector<int>, Matrix<Rational>>> next;
        for (auto& [w, c] : cur)
            for (auto& [a, part] : weight_decomposition(c, g)) {
                auto w2 = w;
                w2.push_back(a);
                next.push_back({w2, part});
            }
        cur = std::move(next);
    }
    return cur;
}

}  // namespace detail

// t(y)^{-1} (sum y_{j,k} N_{j,k}) t(y) with y_{n,1} = 1, s_j = (y_{j+1,1}/y_{j,1})^{1/2}, z_{j,k} = y_{j,k}/y_{j,1}
inline TwistResult torus_twist(const TwistContext& ctx) {
    int n = ctx.n();
    auto zs = ctx.ratio_vars();
    TwistResult R;
    R.Ny.nvars = ctx.nvars();
    int zi = 0;
    for (int j = 1; j <= n; ++j)
        for (std::size_t k = 0; k < ctx.Nk[j - 1].size(); ++k) {
            for (auto& [a, part] : detail::joint_decomposition(ctx.Nk[j - 1][k], ctx.tau)) {
                std::vector<int> e(R.Ny.nvars, 0);
                for (int i = 1; i < n; ++i) e[i - 1] = i >= j ? -2 - a[i - 1] : -a[i - 1];
                if (k > 0) e[n - 1 + zi] = 1;
                for (int i = 1; i < n; ++i)
                    if (e[i - 1] < 0)
                        R.offending.push_back("N_{" + std::to_string(j) + "," + std::to_string(k + 1) + "} component of tau-weights " +
                                              weights_str(a) + " gives s_" + std::to_string(i) + "^" + std::to_string(e[i - 1]));
                R.Ny.add(e, part);
            }
            if (k > 0) ++zi;
        }
    R.denominator_free = R.Ny.denominator_free();
    return R;
}

// values at s = 0 and z = c
inline std::vector<Rational> encasement_values(const TwistContext& ctx) {
    std::vector<Rational> v(ctx.n() - 1, Rational(0));
    for (auto& [j, k] : ctx.ratio_vars()) v.push_back(ctx.c[j - 1][k - 1]);
    return v;
}

// N_1 + sum_{j>=2} N^_j from the sl(2)^n structure of the point
inline Matrix<Rational> twist_limit(const TwistContext& ctx) {
    auto sl = sl2_structure(ctx.D, ctx.ys);
    Matrix<Rational> L = ctx.D.N[0];
    for (int j = 1; j < ctx.n(); ++j) L += sl.Nhat[j];
    return L;
}

// ---------------------------------------------------------------------------
// two flag steps: expansion along sampled ratio values

namespace detail {

inline std::vector<std::vector<std::vector<Rational>>> ratio_samples(const TwistContext& ctx) {
    std::vector<std::vector<std::vector<Rational>>> out{ctx.c};
    if (ctx.ratio_vars().empty()) return out;
    const Rational shifts[] = {Rational(1, 3), Rational(5, 2)};
    for (auto& sh : shifts) {
        auto a = ctx.c;
        int t = 0;
        for (auto& lvl : a)
            for (std::size_t k = 1; k < lvl.size(); ++k) lvl[k] += sh * Rational(++t);
        out.push_back(a);
    }
    return out;
}

inline std::string alpha_str(const std::vector<std::vector<Rational>>& a) {
    std::string s = "(";
    bool first = true;
    for (auto& lvl : a)
        for (std::size_t k = 1; k < lvl.size(); ++k) {
            s += (first ? "" : ",") + lvl[k].str();
            first = false;
        }
    return s + ")";
}

}  // namespace detail

struct MultiVarReport {
    std::vector<std::vector<std::vector<Rational>>> samples;  // ratio values used
    std::vector<ExpansionReport> expansions;                  // one per sample
    bool starred_applicable = false;
    std::vector<CheckLine> checks;
    bool pass() const {
        if (!all_pass(checks)) return false;
        for (auto& e : expansions)
            if (!e.pass()) return false;
        return true;
    }
};

// For n = 2: each sample alpha (alpha_{j,1} = 1) gives the one-variable family
// y N_1(alpha) + N_2(alpha), expanded relative to Y^0 of the encasement point.
inline MultiVarReport multi_var_expansion(const TwistContext& ctx, int order = 6) {
    if (ctx.n() != 2) throw std::invalid_argument("multi_var_expansion: two flag steps expected");
    const auto& A = ctx.M.action;
    const Filtration<Rational>& W = A.W;
    Filtration<Rational> W1 = face_weight_filtration(ctx.M, ctx.psi.flag[1]);
    Filtration<Rational> Ws = face_weight_filtration(ctx.M, ctx.psi.flag[2]);
    int n = W.ambient();
    GradedBasis<Rational> GB(W);
    auto Ysig = splitting_of(A.Y, Ws);
    const auto& Y0p = ctx.ys[0];
    const auto& Y1p = ctx.ys[1];
    auto grY = graded_splitting(GB, A.Y);
    auto grY1 = graded_splitting(GB, Y1p.Y);
    Matrix<Rational> I = Matrix<Rational>::identity(n);

    MultiVarReport MR;
    MR.samples = detail::ratio_samples(ctx);
    detail::Checker top{&MR.checks};
    {
        bool sp = true;
        for (int g : ctx.psi.flag[1]) sp = sp && compatible_splitting(W, A.images[g]).has_value();
        for (auto& a : MR.samples) {
            Matrix<Rational> N1(n, n);
            for (std::size_t k = 0; k < a[0].size(); ++k) N1 += a[0][k] * ctx.Nk[0][k];
            sp = sp && compatible_splitting(W, N1).has_value();
        }
        MR.starred_applicable = sp;
    }
    auto tw = torus_twist(ctx);
    top("twisted family is denominator-free", tw.denominator_free, tw.offending.empty() ? "" : tw.offending.front());
    top("twisted family at the encasement point = N_1 + N^_2",
        tw.Ny.evaluate(encasement_values(ctx), Matrix<Rational>(n, n)) == twist_limit(ctx));

    for (std::size_t si = 0; si < MR.samples.size(); ++si) {
        const auto& a = MR.samples[si];
        bool at_c = si == 0;
        Matrix<Rational> N1(n, n), N2(n, n);
        for (std::size_t k = 0; k < a[0].size(); ++k) N1 += a[0][k] * ctx.Nk[0][k];
        for (std::size_t k = 0; k < a[1].size(); ++k) N2 += a[1][k] * ctx.Nk[1][k];
        ExpansionReport R;
        R.statement = "two-step expansion at ratios " + detail::alpha_str(a);
        R.order = order;
        R.graded_weights = GB.weight;
        detail::Checker add{&R.checks};

        auto fam = detail::over_y(W, N1, N2, Ysig, Ws, Y0p);
        int lead_u = 0, lead_d = 0;
        R.u = y_coefficients(fam.u, order, &lead_u);
        R.delta = y_coefficients(fam.delta.m, order, &lead_d);
        SplitOptions o1;
        o1.known_relative = W1;
        auto Y1a = splitting_of(deligne_splitting(W1, N2, Ysig, [&] {
                                    SplitOptions o;
                                    o.known_relative = Ws;
                                    return o;
                                }()).Y0.Y, W1);
        R.delta_limit = deligne_splitting(W, N1, Y1a, o1).delta.m;

        add("u is Taylor in y^{-1}", lead_u <= 0, "y^" + std::to_string(lead_u));
        Matrix<Rational> u0 = coefficient_or_zero(R.u, 0, n);
        if (at_c) add("u_0 = 1 at the encasement point", u0 == I);
        add("u_0 - 1 in W_{-1}End", in_endo_filtration(u0 - I, W, -1));
        auto uw = [&](int m, const Matrix<Rational>& X) { return m == 0 || in_endo_filtration(X, W, -1); };
        add("u_m in W_{-1}End for m >= 1", detail::all_ok(R.u, uw), detail::first_bad(R.u, uw));
        auto uy = [&](int, const Matrix<Rational>& X) { return commutator(A.Y, X).is_zero(); };
        add("u_m of Y-weight 0", detail::all_ok(R.u, uy), detail::first_bad(R.u, uy));
        auto u1 = [&](int m, const Matrix<Rational>& X) { return in_endo_filtration(X, W1, std::max(m - 1, 0)); };
        add("u_m in W^1_{max(m-1,0)}End", detail::all_ok(R.u, u1), detail::first_bad(R.u, u1));

        // a_m = delta_{m-1}, the coefficients of y^{-1} delta
        add("y^{-1} delta is Taylor in y^{-1}", lead_d <= 1, "y^" + std::to_string(lead_d));
        add("constant term of y^{-1} delta = delta_W(N_1)", coefficient_or_zero(R.delta, -1, n) == R.delta_limit);
        if (at_c) {
            SplitOptions oc;
            oc.known_relative = W1;
            add("at the encasement point the constant term is delta_W(N_1) of the point",
                coefficient_or_zero(R.delta, -1, n) == deligne_splitting(W, ctx.D.N[0], Y1p, oc).delta.m);
        }
        auto dw = [&](int, const Matrix<Rational>& X) { return detail::in_graded_weight(X, GB.weight, -2); };
        add("a_m in W_{-2}gr End", detail::all_ok(R.delta, dw), detail::first_bad(R.delta, dw));
        auto dy = [&](int, const Matrix<Rational>& X) { return commutator(grY.Y, X) == Rational(-2) * X; };
        add("a_m of Y-weight -2", detail::all_ok(R.delta, dy), detail::first_bad(R.delta, dy));
        auto d1 = [&](int m, const Matrix<Rational>& X) { return detail::max_ad_weight(X, grY1) <= m - 1; };
        add("a_m in W^1_{m-2}gr End", detail::all_ok(R.delta, d1), detail::first_bad(R.delta, d1));

        // twisted by tau_1 = Y^1 of the point
        R.twist_grading = Y1p.Y;
        R.twist_grading_gr = grY1.Y;
        R.u_twisted = twist_coefficients(R.u, Y1p, order, &R.twisted_complete_u);
        R.delta_twisted = twist_coefficients(R.delta, grY1, order, &R.twisted_complete_delta);
        int lo_u = R.u_twisted.empty() ? 0 : R.u_twisted.begin()->first;
        int lo_d = R.delta_twisted.empty() ? 0 : R.delta_twisted.begin()->first;
        add("twisted u is Taylor in s", lo_u >= 0, "s^" + std::to_string(lo_u));
        add("twisted delta is Taylor in s", lo_d >= 0, "s^" + std::to_string(lo_d));
        if (at_c) add("twisted u at s = 0 is 1", coefficient_or_zero(R.u_twisted, 0, n) == I);

        if (MR.starred_applicable) {
            add("starred: delta is Taylor in y^{-1}", lead_d <= 0, "y^" + std::to_string(lead_d));
            auto grH = semisimple_splitting(graded_endomorphism(GB, Y1p.Y - Y0p.Y).m);
            int comp = 0;
            auto ds = twist_coefficients(R.delta, grH, order, &comp);
            int lo = ds.empty() ? 0 : ds.begin()->first;
            add("starred delta is Taylor in s", lo >= 0, "s^" + std::to_string(lo));
        }

        // gauge: u(y, alpha) = u'(y) g_1 with u' relative to Y^0 of the sample
        auto one = one_var_system(W, N1, N2, A.Y);
        Matrix<RF> up = conjugator(fam.Y0, one.ys[0]);
        Matrix<Rational> g1 = conjugator(one.ys[0], Y0p);
        add("u(y, alpha) = u'(y) g_1", fam.u == up * embed<RF>(g1));
        MR.expansions.push_back(std::move(R));
    }
    return MR;
}

}  // namespace mslab
