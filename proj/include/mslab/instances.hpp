#pragma once

#include "eigen.hpp"
#include "generators.hpp"
#include "heights.hpp"
#include "sl2orbit.hpp"

#include <random>

// Generated instances shared by the tests, the acceptance binary and the CLI selftest.
namespace mslab::inst {

struct OneVarInstance {
    std::string label;
    OneVarSystem system;
};

inline Rational pick(std::mt19937& rng, int lo, int hi) { return Rational(lo + static_cast<int>(rng() % (hi - lo + 1))); }

inline std::optional<OneVarSystem> try_system(const Filtration<Rational>& W, const Matrix<Rational>& N1, const Matrix<Rational>& N2,
                                              const Matrix<Rational>& Y) {
    try {
        return one_var_system(W, N1, N2, Y);
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

inline std::optional<OneVarSystem> try_system(const DeligneSystemData& D) { return try_system(D.W[0], D.N[0], D.N[1], D.Y); }

inline Matrix<Rational> block_sum(const Matrix<Rational>& a, const Matrix<Rational>& b) {
    Matrix<Rational> m(a.rows() + b.rows(), a.cols() + b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
    for (int i = 0; i < b.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j) m(a.rows() + i, a.cols() + j) = b(i, j);
    return m;
}

inline Filtration<Rational> filtration_sum(const Filtration<Rational>& a, const Filtration<Rational>& b) {
    int lo = std::min(a.lowest(), b.lowest()), hi = std::max(a.highest(), b.highest());
    std::map<int, Subspace<Rational>> st;
    for (int k = lo; k <= hi; ++k) {
        Matrix<Rational> A = a.at(k).basis(), B = b.at(k).basis();
        st[k] = Subspace<Rational>::span_columns(block_sum(A.cols() ? A : Matrix<Rational>(a.ambient(), 0),
                                                           B.cols() ? B : Matrix<Rational>(b.ambient(), 0)));
    }
    return Filtration<Rational>::from_steps(a.ambient() + b.ambient(), st);
}

inline DeligneSystemData system_sum(const DeligneSystemData& a, const DeligneSystemData& b) {
    DeligneSystemData D;
    D.dim = a.dim + b.dim;
    for (std::size_t j = 0; j < a.W.size(); ++j) D.W.push_back(filtration_sum(a.W[j], b.W[j]));
    for (std::size_t j = 0; j < a.N.size(); ++j) D.N.push_back(block_sum(a.N[j], b.N[j]));
    D.Y = block_sum(a.Y, b.Y);
    return D;
}

inline std::optional<OneVarSystem> heights_instance(std::mt19937& rng) {
    auto H = gen::ht2_system(pick(rng, -3, 3), pick(rng, -3, 3), pick(rng, 1, 4), pick(rng, -3, 3));
    Matrix<Rational> N2 = ht_operator(pick(rng, -3, 3), pick(rng, -3, 3), pick(rng, 1, 4), pick(rng, -3, 3));
    return try_system(H.W[0], H.N[0], N2, H.Y);
}

inline gen::Sl2nRep random_rep2(std::mt19937& rng, int max_dim) {
    while (true) {
        auto R = gen::representation(gen::random_irreps(2, max_dim, rng));
        if (!R.E[0].is_zero() || !R.E[1].is_zero()) return R;
    }
}

inline DeligneSystemData heights_pair(std::mt19937& rng) {
    auto H = gen::ht2_system(pick(rng, -3, 3), pick(rng, -3, 3), pick(rng, 1, 4), pick(rng, -3, 3));
    H.N.push_back(ht_operator(pick(rng, -3, 3), pick(rng, -3, 3), pick(rng, 1, 4), pick(rng, -3, 3)));
    H.W.push_back(H.W[1]);
    return H;
}

// split, perturbed, heights, and conjugated sums heights + perturbed, all validated
inline std::vector<OneVarInstance> one_var_instances(int count, unsigned seed, int max_dim = 8) {
    std::mt19937 rng(seed);
    std::vector<OneVarInstance> out;
    for (int tries = 0; static_cast<int>(out.size()) < count && tries < 40 * count; ++tries) {
        int kind = static_cast<int>(out.size()) % 4;
        std::optional<OneVarSystem> S;
        std::string label;
        if (kind == 0) {
            S = try_system(gen::split_system(random_rep2(rng, max_dim)));
            label = "split";
        } else if (kind == 1) {
            S = try_system(gen::perturbed_system(random_rep2(rng, max_dim), rng));
            label = "perturbed";
        } else if (kind == 2) {
            auto P = gen::perturbed_system(random_rep2(rng, max_dim - 4), rng);
            auto D = system_sum(heights_pair(rng), P);
            S = try_system(gen::conjugate(D, gen::random_unipotent(D.W[0], rng)));
            label = "conjugated-sum";
        } else {
            S = heights_instance(rng);
            label = "heights";
        }
        if (S) out.push_back({label + "#" + std::to_string(out.size()), std::move(*S)});
    }
    return out;
}

// systems with (W, N_1) split
inline std::vector<OneVarInstance> mild_instances(int count, unsigned seed, int max_dim = 8) {
    std::mt19937 rng(seed);
    std::vector<OneVarInstance> out;
    for (int tries = 0; static_cast<int>(out.size()) < count && tries < 60 * count; ++tries) {
        int kind = static_cast<int>(out.size()) % 3;
        std::optional<OneVarSystem> S;
        std::string label;
        if (kind == 0) {
            auto R = random_rep2(rng, max_dim);
            auto D = gen::perturbed_system(R, rng);
            S = try_system(D.W[0], R.E[0], D.N[1], D.Y);
            label = "split-N1-perturbed-N2";
        } else if (kind == 1) {
            auto R = random_rep2(rng, max_dim);
            auto D = gen::split_system(R);
            D.N[1] = gen::perturbed_system(R, rng).N[1];
            D.N[0] = R.E[0];
            auto g = gen::random_unipotent(D.W[0], rng);
            S = try_system(gen::conjugate(D, g));
            label = "conjugated-split-N1";
        } else {
            // heights with d = ab/c
            Rational a = pick(rng, -3, 3), b = pick(rng, -3, 3), c = pick(rng, 1, 4);
            auto H = gen::ht2_system(a, b, c, a * b / c);
            Matrix<Rational> N2 = ht_operator(pick(rng, -3, 3), pick(rng, -3, 3), pick(rng, 1, 4), pick(rng, -3, 3));
            S = try_system(H.W[0], H.N[0], N2, H.Y);
            label = "heights-split";
        }
        if (S && compatible_splitting(S->W(), S->N1())) out.push_back({label + "#" + std::to_string(out.size()), std::move(*S)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// two flag steps

struct TwoStepInstance {
    std::string label;
    TwistContext ctx;
};

inline Vec unit(int n, int i) {
    Vec x(n);
    x[i] = 1;
    return x;
}

inline Vec combo(const std::vector<std::pair<Rational, Vec>>& terms) {
    Vec x(terms.front().second.size());
    for (auto& [c, v] : terms)
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += c * v[i];
    return x;
}

// point with rep_j = sum_k c_{j,k} N_{j,k}, c_{j,1} = 1
inline RatioPoint point_in_base(const FaceBase& psi, const std::vector<std::vector<Rational>>& c) {
    RatioPoint p;
    p.sigma = psi.sigma;
    p.flag = psi.flag;
    for (std::size_t j = 0; j < psi.elems.size(); ++j) {
        std::vector<std::pair<Rational, Vec>> t;
        for (std::size_t k = 0; k < psi.elems[j].size(); ++k) t.push_back({c[j][k], psi.elems[j][k]});
        p.reps.push_back(combo(t));
    }
    p.validate();
    return p;
}

inline std::optional<TwistContext> try_context(const ConeAction& A, const FaceBase& psi, const std::vector<std::vector<Rational>>& c) {
    auto M = validate_monodromy_system(A);
    if (!M.valid) return std::nullopt;
    try {
        return twist_context(M, psi, point_in_base(psi, c));
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

inline Rational pos(std::mt19937& rng) { return Rational(1 + static_cast<int>(rng() % 4)) / Rational(1 + static_cast<int>(rng() % 3)); }

// orthant on three generators, sigma_1 = <e1, e2>, base (e1+e2, e1+2e2), (e3)
inline FaceBase base_two_one() {
    FaceBase psi;
    psi.sigma = Cone::orthant(3);
    psi.flag = {Face{}, Face{0, 1}, Face{0, 1, 2}};
    psi.elems = {{combo({{1, unit(3, 0)}, {1, unit(3, 1)}}), combo({{1, unit(3, 0)}, {2, unit(3, 1)}})}, {unit(3, 2)}};
    return psi;
}

// orthant on three generators, sigma_1 = <e1>, base (e1), (e2+e3, e2+2e3)
inline FaceBase base_one_two() {
    FaceBase psi;
    psi.sigma = Cone::orthant(3);
    psi.flag = {Face{}, Face{0}, Face{0, 1, 2}};
    psi.elems = {{unit(3, 0)}, {combo({{1, unit(3, 1)}, {1, unit(3, 2)}}), combo({{1, unit(3, 1)}, {2, unit(3, 2)}})}};
    return psi;
}

// orthant on two generators, one element per step
inline FaceBase base_one_one() {
    FaceBase psi;
    psi.sigma = Cone::orthant(2);
    psi.flag = {Face{}, Face{0}, Face{0, 1}};
    psi.elems = {{unit(2, 0)}, {unit(2, 1)}};
    return psi;
}

// heights family with an extra ray in sigma_1
inline std::optional<TwistContext> heights_extra_ray(std::mt19937& rng) {
    auto H = gen::ht2_system(0, 0, 1, 0);
    auto op = [&] { return ht_operator(pick(rng, -3, 3), pick(rng, -3, 3), pick(rng, 1, 4), pick(rng, -3, 3)); };
    ConeAction A = orthant_action(H.W[0], {op(), op(), op()}, H.Y);
    return try_context(A, base_two_one(), {{1, pos(rng)}, {1}});
}

// split sl(2)^2 systems with r(1) = 2 or r(2) = 2
inline std::optional<TwistContext> split_two_step(std::mt19937& rng, bool wide_first, int max_dim = 6) {
    auto R = random_rep2(rng, max_dim);
    auto D = gen::split_system(R);
    Filtration<Rational> W = D.W[0];
    if (wide_first) {
        ConeAction A = orthant_action(W, {R.E[0], Rational(2) * R.E[0], R.E[1]}, D.Y);
        return try_context(A, base_two_one(), {{1, pos(rng)}, {1}});
    }
    ConeAction A = orthant_action(W, {R.E[0], R.E[1], Rational(3) * R.E[1]}, D.Y);
    return try_context(A, base_one_two(), {{1}, {1, pos(rng)}});
}

inline std::optional<TwistContext> perturbed_two_step(std::mt19937& rng, int max_dim = 6) {
    auto R = random_rep2(rng, max_dim);
    auto D = gen::perturbed_system(R, rng);
    ConeAction A = orthant_action(D.W[0], {D.N[0], D.N[0], D.N[1]}, D.Y);
    return try_context(A, base_two_one(), {{1, pos(rng)}, {1}});
}

// heights extra ray plus a split sl(2)^2 block, conjugated
inline std::optional<TwistContext> sum_two_step(std::mt19937& rng, int max_dim = 7) {
    auto H = gen::ht2_system(0, 0, 1, 0);
    auto op = [&] { return ht_operator(pick(rng, -3, 3), pick(rng, -3, 3), pick(rng, 1, 4), pick(rng, -3, 3)); };
    auto R = random_rep2(rng, max_dim - 4);
    auto D = gen::split_system(R);
    Filtration<Rational> W = filtration_sum(H.W[0], D.W[0]);
    std::vector<Matrix<Rational>> imgs{block_sum(op(), R.E[0]), block_sum(op(), Rational(2) * R.E[0]), block_sum(op(), R.E[1])};
    Matrix<Rational> Y = block_sum(H.Y, D.Y);
    auto g = gen::random_unipotent(W, rng);
    auto gi = inverse(g);
    for (auto& x : imgs) x = g * x * gi;
    ConeAction A = orthant_action(gen::transform(g, W), imgs, g * Y * gi);
    return try_context(A, base_two_one(), {{1, pos(rng)}, {1}});
}

inline std::vector<TwoStepInstance> two_step_instances(int count, unsigned seed) {
    std::mt19937 rng(seed);
    std::vector<TwoStepInstance> out;
    for (int tries = 0; static_cast<int>(out.size()) < count && tries < 40 * count; ++tries) {
        int kind = static_cast<int>(out.size()) % 5;
        std::optional<TwistContext> c;
        std::string label;
        if (kind == 0) { c = heights_extra_ray(rng); label = "heights-extra-ray"; }
        else if (kind == 1) { c = split_two_step(rng, true); label = "split-r1=2"; }
        else if (kind == 2) { c = split_two_step(rng, false); label = "split-r2=2"; }
        else if (kind == 3) { c = perturbed_two_step(rng); label = "perturbed"; }
        else { c = sum_two_step(rng); label = "conjugated-sum"; }
        if (c) out.push_back({label + "#" + std::to_string(out.size()), std::move(*c)});
    }
    return out;
}

// three flag steps on the orthant: sl(2)^3 systems, split or perturbed, conjugated
inline std::vector<TwoStepInstance> three_step_instances(int count, unsigned seed, int max_dim = 8) {
    std::mt19937 rng(seed);
    std::vector<TwoStepInstance> out;
    FaceBase psi;
    psi.sigma = Cone::orthant(3);
    psi.flag = {Face{}, Face{0}, Face{0, 1}, Face{0, 1, 2}};
    psi.elems = {{unit(3, 0)}, {unit(3, 1)}, {unit(3, 2)}};
    for (int tries = 0; static_cast<int>(out.size()) < count && tries < 40 * count; ++tries) {
        bool pert = out.size() % 2 == 1;
        gen::Sl2nRep R;
        do R = gen::representation(gen::random_irreps(3, max_dim, rng, 1)); while (R.E[0].is_zero() && R.E[1].is_zero() && R.E[2].is_zero());
        auto D = pert ? gen::perturbed_system(R, rng) : gen::split_system(R);
        D = gen::conjugate(D, gen::random_unipotent(D.W[0], rng));
        auto c = try_context(orthant_action(D.W[0], D.N, D.Y), psi, {{1}, {1}, {1}});
        if (c) out.push_back({std::string(pert ? "perturbed3" : "split3") + "#" + std::to_string(out.size()), std::move(*c)});
    }
    return out;
}

// generic Tate inputs: weights |m|, |n| <= 3 summing to zero, valuations with denominators <= den_max
inline TateHeightInput random_tate_input(std::mt19937& rng, int den_max = 6) {
    auto val = [&] { return pick(rng, -20, 20) / pick(rng, 1, den_max); };
    while (true) {
        TateHeightInput in;
        in.vq = pick(rng, 1, 12) / pick(rng, 1, den_max);
        int J = 2 + static_cast<int>(rng() % 2), H = 2 + static_cast<int>(rng() % 2);
        in.m.resize(J);
        in.n.resize(H);
        int s = 0;
        for (int j = 0; j + 1 < J; ++j) s += in.m[j] = static_cast<int>(pick(rng, -3, 3).to_long());
        in.m[J - 1] = -s;
        s = 0;
        for (int h = 0; h + 1 < H; ++h) s += in.n[h] = static_cast<int>(pick(rng, -3, 3).to_long());
        in.n[H - 1] = -s;
        if (std::abs(in.m[J - 1]) > 3 || std::abs(in.n[H - 1]) > 3) continue;
        for (int j = 0; j < J; ++j) in.valpha.push_back(val());
        for (int h = 0; h < H; ++h) in.vbeta.push_back(val());
        bool generic = true;
        for (auto& a : in.valpha)
            for (auto& b : in.vbeta) generic = generic && !((a - b) / in.vq).is_integer();
        if (generic) return in;
    }
}

// two-point family whose sums are (a, b, c, d) and (a', b', c', d')
inline HeightFamilyParams pair_family(int a, int b, int c, int d, int ap, int bp, int cp, int dp) {
    HeightFamilyParams P;
    P.m = {1, -1};
    P.n = {1, -1};
    P.c = c;
    P.cp = cp;
    P.a = {a, 0};
    P.ap = {ap, 0};
    P.b = {b, 0};
    P.bp = {bp, 0};
    P.d = {{d, 0}, {0, 0}};
    P.dp = {{dp, 0}, {0, 0}};
    return P;
}

// c, c' in [1, 5], the rest in [-5, 5]
inline HeightFamilyParams random_pair_family(std::mt19937& rng) {
    auto i = [&](int lo, int hi) { return static_cast<int>(pick(rng, lo, hi).to_long()); };
    int a = i(-5, 5), b = i(-5, 5), c = i(1, 5), d = i(-5, 5);
    int ap = i(-5, 5), bp = i(-5, 5), cp = i(1, 5), dp = i(-5, 5);
    return pair_family(a, b, c, d, ap, bp, cp, dp);
}

struct EigenInstance {
    std::string label;
    EigenCase which = EigenCase::I;
    QuadraticRelation R;
};

inline Matrix<Rational> random_invertible(std::mt19937& rng, int n, int range = 2) {
    while (true) {
        Matrix<Rational> g(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g(i, j) = pick(rng, -range, range);
        if (rank(g) == n) return g;
    }
}

inline Matrix<Rational> lower_triangular(std::mt19937& rng, int n, int range = 2) {
    Matrix<Rational> m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) m(i, j) = pick(rng, -range, range);
    return m;
}

// X, Y with XY - YX = Y^2: sums of t^2 d/dt + p(t) + lambda and t acting on Q[t]/t^k
inline std::pair<Matrix<Rational>, Matrix<Rational>> derivation_pair(std::mt19937& rng, int max_dim) {
    Matrix<Rational> X(0, 0), Y(0, 0);
    int dim = 0;
    do {
        int k = 1 + static_cast<int>(rng() % 3);
        if (dim + k > max_dim) k = max_dim - dim;
        Matrix<Rational> x(k, k), y(k, k);
        for (int j = 0; j + 1 < k; ++j) {
            x(j + 1, j) = j;
            y(j + 1, j) = 1;
        }
        x += pick(rng, -2, 2) * Matrix<Rational>::identity(k) + pick(rng, -2, 2) * y + pick(rng, -1, 1) * (y * y);
        X = block_sum(X, x);
        Y = block_sum(Y, y);
        dim += k;
    } while (dim < max_dim && rng() % 3 != 0);
    return {X, Y};
}

inline QuadraticRelation case_one_relation(std::mt19937& rng, int max_dim) {
    auto [X, Y] = derivation_pair(rng, max_dim);
    Matrix<Rational> g = random_invertible(rng, X.rows());
    Matrix<Rational> gi = inverse(g);
    X = g * X * gi;
    Y = g * Y * gi;
    Rational al, be, ga, de;
    do {
        al = rng() % 4 == 0 ? Rational(0) : pick(rng, -3, 3);
        be = pick(rng, -3, 3);
        ga = pick(rng, -2, 2);
        de = pick(rng, -2, 2);
    } while ((al * de - be * ga).is_zero());
    // [X; Y] = [[ga, de], [al, be]] [A; B]
    Rational det = ga * be - de * al;
    QuadraticRelation R;
    R.A = (be / det) * X - (de / det) * Y;
    R.B = (ga / det) * Y - (al / det) * X;
    Rational s = rng() % 2 ? Rational(1) : pick(rng, 2, 3);
    R.a = s * al * al;
    R.b = s * (al * be + al * de - be * ga);
    R.c = s * (al * be - al * de + be * ga);
    R.d = s * be * be;
    return R;
}

// A = 0 on K, invertible on U; B preserves both (B12 only when c = 0)
inline QuadraticRelation case_two_relation(std::mt19937& rng, int max_dim) {
    int n = 1 + static_cast<int>(rng() % max_dim);
    int k = 1 + static_cast<int>(rng() % n);
    int u = n - k;
    QuadraticRelation R;
    R.b = pick(rng, 1, 3) * (rng() % 2 ? 1 : -1);
    R.d = 0;
    Matrix<Rational> A2(u, u), B22(u, u);
    int kind = static_cast<int>(rng() % 3);
    if (kind == 0 && u >= 2 && u % 2 == 0) {
        // anticommuting blocks
        R.a = 0;
        R.c = R.b;
        for (int i = 0; i < u; i += 2) {
            Rational s = pick(rng, 1, 3);
            A2(i, i) = s;
            A2(i + 1, i + 1) = -s;
            B22(i, i + 1) = pick(rng, -2, 2);
            B22(i + 1, i) = pick(rng, -2, 2);
        }
    } else if (kind == 1) {
        // c = 0 with B22 = 0 needs a A2^2 = 0, so a = 0
        R.a = 0;
        R.c = 0;
        A2 = u ? random_invertible(rng, u) : A2;
    } else {
        R.a = pick(rng, -2, 2);
        do R.c = pick(rng, -3, 3); while ((R.b + R.c).is_zero());
        Rational l = pick(rng, 1, 3);
        A2 = l * Matrix<Rational>::identity(u);
        B22 = (-R.a * l / (R.b + R.c)) * Matrix<Rational>::identity(u);
    }
    Matrix<Rational> B11 = lower_triangular(rng, k);
    R.A = block_sum(Matrix<Rational>(k, k), A2);
    R.B = block_sum(B11, B22);
    if (R.c.is_zero())
        for (int i = 0; i < k; ++i)
            for (int j = k; j < n; ++j) R.B(i, j) = pick(rng, -2, 2);
    Matrix<Rational> g = random_invertible(rng, n);
    Matrix<Rational> gi = inverse(g);
    R.A = g * R.A * gi;
    R.B = g * R.B * gi;
    return R;
}

inline std::vector<EigenInstance> eigen_instances(EigenCase which, int count, unsigned seed, int max_dim = 6) {
    std::mt19937 rng(seed);
    std::vector<EigenInstance> out;
    for (int i = 0; i < count; ++i) {
        QuadraticRelation R;
        if (which == EigenCase::I) {
            R = case_one_relation(rng, max_dim);
        } else {
            R = case_two_relation(rng, max_dim);
            if (which == EigenCase::III) R = QuadraticRelation{R.d, R.c, R.b, R.a, R.B, R.A};
        }
        if (!R.holds()) throw std::logic_error("generated relation does not hold");
        out.push_back({"case-" + case_name(which) + "#" + std::to_string(i), which, std::move(R)});
    }
    return out;
}

// Heisenberg triples N0 = xE12, N1 = yE23 + t xy E13, N2 = xyE13 with F = diag(qf, f, f), summed and conjugated
inline MonodromyTriple random_triple(std::mt19937& rng, int blocks = 2) {
    MonodromyTriple T;
    T.q = pick(rng, 2, 4);
    Rational t = pick(rng, -2, 2);
    T.N0 = T.N1 = T.N2 = T.F = Matrix<Rational>(0, 0);
    for (int b = 0; b < blocks; ++b) {
        Rational x = pick(rng, -2, 2), y = pick(rng, -2, 2), f = pick(rng, 1, 3);
        Matrix<Rational> n0(3, 3), n1(3, 3), n2(3, 3);
        n0(0, 1) = x;
        n1(1, 2) = y;
        n1(0, 2) = t * x * y;
        n2(0, 2) = x * y;
        T.N0 = block_sum(T.N0, n0);
        T.N1 = block_sum(T.N1, n1);
        T.N2 = block_sum(T.N2, n2);
        T.F = block_sum(T.F, Matrix<Rational>::diagonal({T.q * f, f, f}));
    }
    Matrix<Rational> g = random_invertible(rng, T.F.rows());
    Matrix<Rational> gi = inverse(g);
    for (auto* m : {&T.N0, &T.N1, &T.N2, &T.F}) *m = g * *m * gi;
    return T;
}

}  // namespace mslab::inst
