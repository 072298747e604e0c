#pragma once

#include "cones.hpp"

#include <optional>

namespace mslab {

// value in [0, infinity]
struct RVal {
    enum class Kind { Zero, Finite, Infinity };
    Kind kind = Kind::Zero;
    Rational v;  // positive when Finite

    static RVal of(const Rational& x) {
        if (x.sign() < 0) throw std::invalid_argument("RVal: negative value");
        return x.is_zero() ? RVal{} : RVal{Kind::Finite, x};
    }
    static RVal infinity() { return {Kind::Infinity, Rational()}; }
    static RVal quotient(const Rational& a, const Rational& b) {
        if (a.sign() < 0 || b.sign() < 0) throw std::invalid_argument("RVal: negative operand");
        if (b.is_zero()) {
            if (a.is_zero()) throw std::invalid_argument("RVal: 0/0");
            return infinity();
        }
        return of(a / b);
    }
    bool is_zero() const { return kind == Kind::Zero; }
    bool is_infinite() const { return kind == Kind::Infinity; }
    RVal inverse() const {
        if (kind == Kind::Zero) return infinity();
        if (kind == Kind::Infinity) return {};
        return of(v.inverse());
    }
    friend RVal operator+(const RVal& a, const RVal& b) {
        if (a.is_infinite() || b.is_infinite()) return infinity();
        return of(a.v + b.v);
    }
    friend RVal operator*(const RVal& a, const RVal& b) {
        if ((a.is_zero() && b.is_infinite()) || (a.is_infinite() && b.is_zero()))
            throw std::domain_error("RVal: 0 * infinity");
        if (a.is_infinite() || b.is_infinite()) return infinity();
        return of(a.v * b.v);
    }
    RVal scaled(const Rational& c) const {
        if (c.sign() <= 0) throw std::invalid_argument("RVal: scale must be positive");
        return kind == Kind::Finite ? of(v * c) : *this;
    }
    friend bool operator==(const RVal& a, const RVal& b) { return a.kind == b.kind && (a.kind != Kind::Finite || a.v == b.v); }
    friend bool operator!=(const RVal& a, const RVal& b) { return !(a == b); }
    std::string str() const {
        if (kind == Kind::Zero) return "0";
        if (kind == Kind::Infinity) return "inf";
        return v.str();
    }
};

namespace detail {

// rows: basis of functionals vanishing on span(face)
inline Matrix<Rational> quotient_map(const Cone& s, const Face& f) {
    if (f.empty()) return Matrix<Rational>::identity(s.ambient());
    return Subspace<Rational>::span_vectors(s.ambient(), s.face_gens(f)).equations();
}

inline Cone quotient_cone(const Cone& s, const Face& lower, const Face& upper) {
    Matrix<Rational> P = quotient_map(s, lower);
    std::vector<Vec> g;
    for (auto& x : s.face_gens(upper)) g.push_back(mslab::apply(P, x));
    return Cone(P.rows(), g);
}

inline Vec sub(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec axpy(const Rational& c, const Vec& x, Vec y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
    return y;
}

inline bool is_zero_vec(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [](const Rational& x) { return x.is_zero(); });
}

}  // namespace detail

// N mod span(lower) lies in the relative interior of (upper + span(lower)) / span(lower)
inline bool interior_mod(const Cone& s, const Face& lower, const Face& upper, const Vec& N) {
    Cone q = detail::quotient_cone(s, lower, upper);
    Vec x = mslab::apply(detail::quotient_map(s, lower), N);
    if (!q.contains(x)) return false;
    if (q.num_generators() == 0) return detail::is_zero_vec(x);
    return q.smallest_face_containing({x}) == q.whole();
}

inline bool in_dual(const Cone& s, const Vec& f) {
    for (auto& g : s.generators())
        if (dot(f, g).sign() < 0) return false;
    return true;
}

struct RatioPoint {
    Cone sigma;
    std::vector<Face> flag;  // sigma_0 = {} .. sigma_n = sigma
    std::vector<Vec> reps;   // N_1 .. N_n

    int length() const { return static_cast<int>(reps.size()); }

    void validate() const {
        if (flag.empty() || !flag.front().empty()) throw std::invalid_argument("ratio point: flag must start at {0}");
        if (flag.back() != sigma.whole()) throw std::invalid_argument("ratio point: flag must end at sigma");
        if (reps.size() + 1 != flag.size()) throw std::invalid_argument("ratio point: one representative per step");
        auto faces = face_lattice(sigma);
        for (std::size_t j = 0; j < flag.size(); ++j) {
            if (std::find(faces.begin(), faces.end(), flag[j]) == faces.end())
                throw std::invalid_argument("ratio point: flag entry is not a face");
            if (j > 0 && (!face_le(flag[j - 1], flag[j]) || flag[j - 1] == flag[j]))
                throw std::invalid_argument("ratio point: flag is not strictly increasing");
        }
        for (std::size_t j = 1; j < flag.size(); ++j) {
            if (static_cast<int>(reps[j - 1].size()) != sigma.ambient())
                throw std::invalid_argument("ratio point: representative of wrong dimension");
            if (!interior_mod(sigma, flag[j - 1], flag[j], reps[j - 1]))
                throw std::invalid_argument("ratio point: N_" + std::to_string(j) + " is not interior mod the previous face");
        }
    }

    static RatioPoint interior(const Cone& s, const Vec& N) {
        RatioPoint p{s, {Face{}, s.whole()}, {N}};
        p.validate();
        return p;
    }

    // canonical form: each N_j projected mod span(sigma_{j-1}), scaled so
    // the first nonzero coordinate has absolute value 1
    std::vector<Vec> normalized() const {
        std::vector<Vec> out;
        for (std::size_t j = 1; j < flag.size(); ++j) {
            Vec x = mslab::apply(detail::quotient_map(sigma, flag[j - 1]), reps[j - 1]);
            Rational lead;
            for (auto& c : x)
                if (!c.is_zero()) { lead = c.abs(); break; }
            if (!lead.is_zero())
                for (auto& c : x) c = c / lead;
            out.push_back(x);
        }
        return out;
    }

    bool equivalent(const RatioPoint& o) const {
        return sigma.ambient() == o.sigma.ambient() && flag == o.flag && normalized() == o.normalized();
    }
};

inline RVal ratio_eval(const RatioPoint& p, const Vec& f, const Vec& g) {
    if (!in_dual(p.sigma, f) || !in_dual(p.sigma, g)) throw std::invalid_argument("ratio_eval: functional not in the dual cone");
    for (std::size_t j = 1; j < p.flag.size(); ++j) {
        bool kills = true;
        for (int i : p.flag[j]) {
            const Vec& x = p.sigma.generators()[i];
            kills = kills && dot(f, x).is_zero() && dot(g, x).is_zero();
        }
        if (!kills) return RVal::quotient(dot(f, p.reps[j - 1]), dot(g, p.reps[j - 1]));
    }
    throw std::invalid_argument("ratio_eval: both functionals vanish on sigma");
}

// ---------------------------------------------------------------------------
// bases along faces and charts

struct FaceBase {
    Cone sigma;
    std::vector<Face> flag;                 // sigma_0 .. sigma_n
    std::vector<std::vector<Vec>> elems;    // elems[j-1][k-1] = N_{j,k}

    int length() const { return static_cast<int>(elems.size()); }

    void validate() const {
        if (flag.empty() || !flag.front().empty() || flag.back() != sigma.whole() || elems.size() + 1 != flag.size())
            throw std::invalid_argument("face base: malformed flag");
        int prev = 0;
        for (std::size_t j = 1; j < flag.size(); ++j) {
            int dj = sigma.face_dim(flag[j]);
            if (!face_le(flag[j - 1], flag[j]) || dj <= prev) throw std::invalid_argument("face base: flag not increasing");
            if (static_cast<int>(elems[j - 1].size()) != dj - prev)
                throw std::invalid_argument("face base: r(j) elements expected at step " + std::to_string(j));
            Matrix<Rational> P = detail::quotient_map(sigma, flag[j - 1]);
            std::vector<Vec> proj;
            for (auto& x : elems[j - 1]) {
                if (!sigma.in_face(flag[j], x)) throw std::invalid_argument("face base: element outside its face");
                if (!interior_mod(sigma, flag[j - 1], flag[j], x))
                    throw std::invalid_argument("face base: element not interior mod the previous face");
                proj.push_back(mslab::apply(P, x));
            }
            if (Subspace<Rational>::span_vectors(P.rows(), proj).dim() != dj - prev)
                throw std::invalid_argument("face base: elements not independent mod the previous face");
            prev = dj;
        }
        if (prev != sigma.rank()) throw std::invalid_argument("face base: does not span sigma");
    }

    // columns N_{1,1}, .., N_{n,r(n)}
    Matrix<Rational> basis_matrix() const {
        Matrix<Rational> B(sigma.ambient(), 0);
        for (auto& lvl : elems)
            for (auto& x : lvl) B = B.hcat(Matrix<Rational>::column(x));
        return B;
    }

    // coefficients of x in the basis, as [j][k]; nullopt if x is outside span(sigma)
    std::optional<std::vector<std::vector<Rational>>> coefficients(const Vec& x) const {
        Matrix<Rational> B = basis_matrix();
        auto s = solve_linear(B, Matrix<Rational>::column(x));
        if (!s.consistent()) return std::nullopt;
        std::vector<std::vector<Rational>> out;
        int t = 0;
        for (auto& lvl : elems) {
            out.emplace_back();
            for (std::size_t k = 0; k < lvl.size(); ++k) out.back().push_back(s.particular(t++, 0));
        }
        return out;
    }
};

enum class ChartFlavor { Standard, Narrower };

struct ChartCoords {
    ChartFlavor flavor = ChartFlavor::Standard;
    // y_{j+1,1}/y_{j,1}; the coordinate is its square root for the standard flavor
    std::vector<Rational> boundary;
    std::map<std::pair<int, int>, Rational> ratios;  // (j,k), k >= 2, 1-based

    // exact coordinate value when available (square root may be irrational)
    std::optional<Rational> boundary_value(int j) const {
        const Rational& r = boundary.at(j);
        if (flavor == ChartFlavor::Narrower) return r;
        Rational out;
        if (r.sqrt_exact(out)) return out;
        return std::nullopt;
    }
    friend bool operator==(const ChartCoords& a, const ChartCoords& b) {
        return a.flavor == b.flavor && a.boundary == b.boundary && a.ratios == b.ratios;
    }
};

// y-coefficients expressing q in U(Psi): phi (image of the flag map) and y[j][k]
struct UMembership {
    std::vector<int> phi;  // indices 0 = phi(0) < .. < phi(n') = n
    std::vector<std::vector<Rational>> y;
};

inline std::optional<UMembership> u_membership(const FaceBase& psi, const RatioPoint& q) {
    if (q.sigma.ambient() != psi.sigma.ambient()) return std::nullopt;
    UMembership m;
    for (auto& f : q.flag) {
        auto it = std::find(psi.flag.begin(), psi.flag.end(), f);
        if (it == psi.flag.end()) return std::nullopt;
        m.phi.push_back(static_cast<int>(it - psi.flag.begin()));
    }
    for (std::size_t i = 1; i < m.phi.size(); ++i)
        if (m.phi[i] <= m.phi[i - 1]) return std::nullopt;
    int n = psi.length();
    m.y.assign(n, {});
    for (std::size_t i = 1; i < m.phi.size(); ++i) {
        auto c = psi.coefficients(q.reps[i - 1]);
        if (!c) return std::nullopt;
        for (int j = m.phi[i - 1] + 1; j <= m.phi[i]; ++j)
            for (auto& v : (*c)[j - 1])
                if (v.sign() <= 0) return std::nullopt;
        for (int j = m.phi[i] + 1; j <= n; ++j)
            for (auto& v : (*c)[j - 1])
                if (!v.is_zero()) return std::nullopt;
        for (int j = m.phi[i - 1] + 1; j <= m.phi[i]; ++j) m.y[j - 1] = (*c)[j - 1];
    }
    return m;
}

inline ChartCoords chart_coords(const FaceBase& psi, const RatioPoint& q, ChartFlavor flavor = ChartFlavor::Standard) {
    auto m = u_membership(psi, q);
    if (!m) throw std::invalid_argument("chart_coords: point is not in U(Psi)");
    ChartCoords c;
    c.flavor = flavor;
    int n = psi.length();
    std::set<int> img(m->phi.begin(), m->phi.end());
    for (int j = 1; j <= n - 1; ++j)
        c.boundary.push_back(img.count(j) ? Rational(0) : m->y[j][0] / m->y[j - 1][0]);
    for (int j = 1; j <= n; ++j)
        for (std::size_t k = 2; k <= m->y[j - 1].size(); ++k)
            c.ratios[{j, static_cast<int>(k)}] = m->y[j - 1][k - 1] / m->y[j - 1][0];
    return c;
}

// inverse of chart_coords up to equivalence
inline RatioPoint chart_point(const FaceBase& psi, const ChartCoords& c) {
    int n = psi.length();
    if (static_cast<int>(c.boundary.size()) != n - 1) throw std::invalid_argument("chart_point: wrong number of boundary coordinates");
    RatioPoint p;
    p.sigma = psi.sigma;
    p.flag.push_back(Face{});
    Vec cur(psi.sigma.ambient());
    Rational y1 = 1;
    for (int j = 1; j <= n; ++j) {
        for (std::size_t k = 1; k <= psi.elems[j - 1].size(); ++k) {
            Rational yk = k == 1 ? y1 : y1 * c.ratios.at({j, static_cast<int>(k)});
            if (yk.sign() <= 0) throw std::invalid_argument("chart_point: ratio coordinates must be positive");
            cur = detail::axpy(yk, psi.elems[j - 1][k - 1], cur);
        }
        bool cut = j == n || c.boundary[j - 1].is_zero();
        if (cut) {
            p.flag.push_back(psi.flag[j]);
            p.reps.push_back(cur);
            cur.assign(psi.sigma.ambient(), Rational());
            y1 = 1;
        } else {
            if (c.boundary[j - 1].sign() < 0) throw std::invalid_argument("chart_point: negative boundary coordinate");
            y1 = y1 * c.boundary[j - 1];
        }
    }
    p.validate();
    return p;
}

inline std::optional<std::vector<std::vector<Rational>>> encased_in(const RatioPoint& p, const FaceBase& psi) {
    if (p.flag != psi.flag) return std::nullopt;
    auto m = u_membership(psi, p);
    if (!m) return std::nullopt;
    auto c = m->y;
    for (auto& lvl : c) {
        Rational a = lvl[0];
        for (auto& x : lvl) x = x / a;
    }
    return c;
}

// ---------------------------------------------------------------------------
// sigma' = sigma x R_{>=0} and maps along cone homomorphisms

inline Cone sigma_prime(const Cone& s) {
    std::vector<Vec> g;
    for (auto x : s.generators()) {
        x.push_back(0);
        g.push_back(x);
    }
    Vec e(s.ambient() + 1);
    e.back() = 1;
    g.push_back(e);
    return Cone(s.ambient() + 1, g);
}

inline Vec extend(const Vec& x, const Rational& t) {
    Vec y = x;
    y.push_back(t);
    return y;
}

inline RatioPoint embed_sigma_prime(const RatioPoint& p) {
    RatioPoint q;
    q.sigma = sigma_prime(p.sigma);
    q.flag = p.flag;
    q.flag.push_back(q.sigma.whole());
    for (auto& r : p.reps) q.reps.push_back(extend(r, 0));
    Vec e(p.sigma.ambient() + 1);
    e.back() = 1;
    q.reps.push_back(e);
    q.validate();
    return q;
}

inline RatioPoint embed_sigma_prime(const Cone& s, const Vec& N) {
    Cone sp = sigma_prime(s);
    return RatioPoint::interior(sp, extend(N, 1));
}

// face base Psi' of sigma' from Psi
inline FaceBase extend_base(const FaceBase& psi) {
    FaceBase b;
    b.sigma = sigma_prime(psi.sigma);
    b.flag = psi.flag;
    b.flag.push_back(b.sigma.whole());
    for (auto& lvl : psi.elems) {
        b.elems.emplace_back();
        for (auto& x : lvl) b.elems.back().push_back(extend(x, 0));
    }
    Vec e(psi.sigma.ambient() + 1);
    e.back() = 1;
    b.elems.push_back({e});
    return b;
}

// all but the last flag step are faces of sigma (do not contain the extra generator)
inline bool in_sigma_prime_lt1(const RatioPoint& q) {
    int extra = q.sigma.num_generators() - 1;
    for (std::size_t j = 0; j + 1 < q.flag.size(); ++j)
        if (std::find(q.flag[j].begin(), q.flag[j].end(), extra) != q.flag[j].end()) return false;
    return true;
}

enum class HomCase { InteriorImage, CokernelOne, Unsupported };

inline HomCase classify_hom(const Matrix<Rational>& h, const Cone& s, const Cone& t) {
    std::vector<Vec> im;
    for (auto& g : s.generators()) {
        Vec x = mslab::apply(h, g);
        if (!t.contains(x)) throw std::invalid_argument("map_along_hom: h(sigma) not contained in sigma'");
        im.push_back(x);
    }
    if (t.smallest_face_containing(im) == t.whole()) return HomCase::InteriorImage;
    int img = im.empty() ? 0 : Subspace<Rational>::span_vectors(t.ambient(), im).intersect(t.span()).dim();
    if (t.rank() - img <= 1) return HomCase::CokernelOne;
    return HomCase::Unsupported;
}

inline std::optional<RatioPoint> map_along_hom(const Matrix<Rational>& h, const Cone& t, const RatioPoint& p) {
    const Cone& s = p.sigma;
    if (h.cols() != s.ambient() || h.rows() != t.ambient()) throw std::invalid_argument("map_along_hom: shape");
    HomCase hc = classify_hom(h, s, t);
    if (hc == HomCase::Unsupported) return std::nullopt;
    RatioPoint q;
    q.sigma = t;
    q.flag.push_back(Face{});
    for (std::size_t j = 1; j < p.flag.size(); ++j) {
        std::vector<Vec> im;
        for (auto& g : s.face_gens(p.flag[j])) im.push_back(mslab::apply(h, g));
        Face F = t.smallest_face_containing(im);
        if (F == q.flag.back()) continue;
        q.flag.push_back(F);
        q.reps.push_back(mslab::apply(h, p.reps[j - 1]));
    }
    if (q.flag.back() != t.whole()) {
        Vec N(t.ambient());
        for (auto& g : t.generators()) N = detail::axpy(1, g, N);
        q.flag.push_back(t.whole());
        q.reps.push_back(N);
    }
    q.validate();
    return q;
}

// the point of (sigma')_{[:],<1} for (tau, N, a), a a point of tau_{[:]}
// given over the cone face_cone(tau) of sigma
inline RatioPoint toric_to_ratio(const Cone& s, const Face& tau, const Vec& N, const RatioPoint& a) {
    if (!interior_mod(s, tau, s.whole(), N)) throw std::invalid_argument("toric_to_ratio: N is not interior in sigma/tau");
    if (!tau.empty()) a.validate();
    RatioPoint q;
    q.sigma = sigma_prime(s);
    q.flag.push_back(Face{});
    for (std::size_t j = 1; j < a.flag.size(); ++j) {
        Face f;
        for (int i : a.flag[j]) f.push_back(tau[i]);
        q.flag.push_back(f);
        q.reps.push_back(extend(a.reps[j - 1], 0));
    }
    q.flag.push_back(q.sigma.whole());
    q.reps.push_back(extend(N, 1));
    q.validate();
    return q;
}

}  // namespace mslab
