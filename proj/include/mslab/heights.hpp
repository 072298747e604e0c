#pragma once

#include "cones.hpp"
#include "generators.hpp"
#include "laurent.hpp"

namespace mslab {

struct GenericityViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// v(theta_q(u)) from v(q) > 0 and v(u), when v(u) is not in v(q)Z
inline Rational theta_valuation(const Rational& vq, const Rational& vu) {
    if (vq.sign() <= 0) throw std::invalid_argument("theta_valuation: v(q) must be positive");
    if ((vu / vq).is_integer()) throw GenericityViolation("theta_valuation: v(u) = " + vu.str() + " lies in v(q)Z");
    Rational s;
    for (long n = 0; Rational(n) * vq + vu < 0; ++n) s += Rational(n) * vq + vu;
    for (long n = 1; Rational(n) * vq - vu < 0; ++n) s += Rational(n) * vq - vu;
    return s;
}

struct TateHeightInput {
    Rational vq;
    std::vector<int> m, n;
    std::vector<Rational> valpha, vbeta;
};

inline void check_degree_zero(const std::vector<int>& m, const std::vector<int>& n) {
    long sm = 0, sn = 0;
    for (int x : m) sm += x;
    for (int x : n) sn += x;
    if (sm != 0 || sn != 0) throw std::invalid_argument("divisor weights must sum to zero");
}

struct HeightTerms {
    Rational a, b, c, d;  // sum m v(alpha), sum n v(beta), v(q), sum m n v(theta)
};

inline HeightTerms height_terms(const TateHeightInput& in) {
    check_degree_zero(in.m, in.n);
    if (in.m.size() != in.valpha.size() || in.n.size() != in.vbeta.size())
        throw std::invalid_argument("weights and valuations differ in length");
    if (in.vq.sign() <= 0) throw std::invalid_argument("v(q) must be positive");
    HeightTerms t;
    t.c = in.vq;
    for (std::size_t j = 0; j < in.m.size(); ++j) t.a += Rational(in.m[j]) * in.valpha[j];
    for (std::size_t h = 0; h < in.n.size(); ++h) t.b += Rational(in.n[h]) * in.vbeta[h];
    for (std::size_t j = 0; j < in.m.size(); ++j)
        for (std::size_t h = 0; h < in.n.size(); ++h) {
            if (in.m[j] == 0 || in.n[h] == 0) continue;
            try {
                t.d += Rational(in.m[j] * in.n[h]) * theta_valuation(in.vq, in.valpha[j] - in.vbeta[h]);
            } catch (const GenericityViolation&) {
                throw GenericityViolation("local_height: pair (" + std::to_string(j + 1) + "," + std::to_string(h + 1) +
                                          ") is not generic");
            }
        }
    return t;
}

inline Rational local_height(const TateHeightInput& in) {
    auto t = height_terms(in);
    return t.d - t.a * t.b / t.c;
}

// The one-variable system whose delta_W is the local height.
inline DeligneSystemData height_pairing_system(const TateHeightInput& in) {
    auto t = height_terms(in);
    return gen::ht2_system(t.a, t.b, t.c, t.d);
}

struct HeightFamilyParams {
    int c = 1, cp = 1;
    std::vector<int> a, ap, b, bp;                 // per j (a, a') and per h (b, b')
    std::vector<std::vector<int>> d, dp;           // d(j,h), d'(j,h)
    std::vector<int> m, n;
};

struct FamilySums {
    Rational a, b, c, d, ap, bp, cp, dp;
};

inline FamilySums family_sums(const HeightFamilyParams& P) {
    check_degree_zero(P.m, P.n);
    if (P.c <= 0 || P.cp <= 0) throw std::invalid_argument("c and c' must be positive");
    std::size_t J = P.m.size(), H = P.n.size();
    if (P.a.size() != J || P.ap.size() != J || P.b.size() != H || P.bp.size() != H || P.d.size() != J || P.dp.size() != J)
        throw std::invalid_argument("height family parameters have inconsistent lengths");
    FamilySums s;
    s.c = P.c;
    s.cp = P.cp;
    for (std::size_t j = 0; j < J; ++j) {
        s.a += Rational(P.m[j] * P.a[j]);
        s.ap += Rational(P.m[j] * P.ap[j]);
        if (P.d[j].size() != H || P.dp[j].size() != H) throw std::invalid_argument("d(j,h) has wrong shape");
        for (std::size_t h = 0; h < H; ++h) {
            s.d += Rational(P.m[j] * P.n[h] * P.d[j][h]);
            s.dp += Rational(P.m[j] * P.n[h] * P.dp[j][h]);
        }
    }
    for (std::size_t h = 0; h < H; ++h) {
        s.b += Rational(P.n[h] * P.b[h]);
        s.bp += Rational(P.n[h] * P.bp[h]);
    }
    return s;
}

// Fill d, d' from a, a', b, b', c, c' as the t- and pi-parts of
// v(theta_q(alpha_j/beta_h)); each factor's sign must not depend on the point.
inline void fill_theta_exponents(HeightFamilyParams& P) {
    std::size_t J = P.a.size(), H = P.b.size();
    P.d.assign(J, std::vector<int>(H, 0));
    P.dp.assign(J, std::vector<int>(H, 0));
    for (std::size_t j = 0; j < J; ++j)
        for (std::size_t h = 0; h < H; ++h) {
            long u = P.a[j] - P.b[h], up = P.ap[j] - P.bp[h];
            long dd = 0, ddp = 0;
            auto term = [&](long A, long B) {
                if (A == 0 && B == 0) throw GenericityViolation("theta factor with vanishing valuation");
                if ((A < 0 && B > 0) || (A > 0 && B < 0)) throw GenericityViolation("theta factor changes sign along the family");
                if (A < 0 || B < 0) {
                    dd += A;
                    ddp += B;
                }
            };
            for (long n = 0;; ++n) {
                long A = n * P.c + u, B = n * P.cp + up;
                if (A > 0 && B > 0) break;
                term(A, B);
            }
            for (long n = 1;; ++n) {
                long A = n * P.c - u, B = n * P.cp - up;
                if (A > 0 && B > 0) break;
                term(A, B);
            }
            P.d[j][h] = static_cast<int>(dd);
            P.dp[j][h] = static_cast<int>(ddp);
        }
}

struct HeightSystem {
    Filtration<Rational> W;
    Matrix<Rational> N1, N2, Y;
    FamilySums sums;
    MonodromySystem system;
};

inline Matrix<Rational> ht_operator(const Rational& a, const Rational& b, const Rational& c, const Rational& d) {
    return gen::ht2_system(a, b, c, d).N[0];
}

inline HeightSystem build_height_system(const HeightFamilyParams& P) {
    HeightSystem H;
    H.sums = family_sums(P);
    auto& s = H.sums;
    auto D = gen::ht2_system(s.a, s.b, s.c, s.d);
    H.W = D.W[0];
    H.N1 = D.N[0];
    H.N2 = ht_operator(s.ap, s.bp, s.cp, s.dp);
    H.Y = D.Y;
    H.system = validate_monodromy_system(orthant_action(H.W, {H.N1, H.N2}, H.Y));
    if (!H.system.valid) throw std::invalid_argument("height system does not validate as a monodromy system");
    return H;
}

// the Deligne system (N_1, N_2) of the height family
inline DeligneSystemData height_deligne_system(const HeightSystem& H) {
    return deligne_system_from(H.system, {{1, 0}, {0, 1}});
}

struct HeightExpansion {
    RationalFunction delta;   // delta_W(y N_1 + N_2) on Hom(gr_0, gr_{-2})
    RationalFunction oracle;  // (yd+d') - (ya+a')(yb+b')/(yc+c')
    Series series;
    Rational slope;           // y-coefficient
    Rational expected_slope;  // d - ab/c
    bool oracle_match = false;
    bool shape_ok = false;    // lead power <= 1
};

inline HeightExpansion height_asymptotics(const HeightFamilyParams& P, int order) {
    auto H = build_height_system(P);
    using RF = RationalFunction;
    RF y = RF::y();
    Matrix<RF> N = y * embed<RF>(H.N1) + embed<RF>(H.N2);
    auto r = deligne_splitting(H.W, N, H.Y);
    HeightExpansion e;
    e.delta = r.delta.block(-2, 0)(0, 0);
    auto& s = H.sums;
    auto lin = [&](const Rational& u, const Rational& v) { return y * RF(u) + RF(v); };
    e.oracle = lin(s.d, s.dp) - lin(s.a, s.ap) * lin(s.b, s.bp) / lin(s.c, s.cp);
    e.oracle_match = e.delta == e.oracle;
    e.series = laurent_expand(e.delta, order);
    e.slope = e.series.coefficient(1);
    e.expected_slope = s.d - s.a * s.b / s.c;
    e.shape_ok = effective_lead(e.series) <= 1;
    return e;
}

}  // namespace mslab
