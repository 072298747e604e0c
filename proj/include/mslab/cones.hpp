#pragma once

#include "deligne.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <set>

namespace mslab {

using Vec = std::vector<Rational>;

inline Rational dot(const Vec& a, const Vec& b) {
    Rational s;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// A face is the set of generator indices it contains (sorted).
using Face = std::vector<int>;

class Cone {
public:
    Cone() = default;

    // zero generators are dropped
    Cone(int dim, std::vector<Vec> gens) : dim_(dim) {
        for (auto& g : gens) {
            if (static_cast<int>(g.size()) != dim) throw std::invalid_argument("cone generator of wrong dimension");
            bool z = std::all_of(g.begin(), g.end(), [](const Rational& x) { return x.is_zero(); });
            if (!z) gens_.push_back(g);
        }
        compute_facets();
    }

    static Cone orthant(int n) {
        std::vector<Vec> g;
        for (int i = 0; i < n; ++i) {
            Vec e(n);
            e[i] = 1;
            g.push_back(e);
        }
        return Cone(n, g);
    }

    int ambient() const { return dim_; }
    int rank() const { return span_.dim(); }
    const std::vector<Vec>& generators() const { return gens_; }
    int num_generators() const { return static_cast<int>(gens_.size()); }
    const Subspace<Rational>& span() const { return span_; }
    // inward facet normals, each a functional vanishing on span^perp
    const std::vector<Vec>& facet_normals() const { return facets_; }

    bool is_sharp() const {
        if (rank() == 0) return true;
        if (facets_.empty()) return false;
        Matrix<Rational> F(static_cast<int>(facets_.size()), dim_);
        for (std::size_t i = 0; i < facets_.size(); ++i)
            for (int j = 0; j < dim_; ++j) F(i, j) = facets_[i][j];
        return kernel_space(F).intersect(span_).is_zero();
    }

    bool contains(const Vec& x) const {
        if (!span_.contains(x)) return false;
        for (auto& f : facets_)
            if (dot(f, x).sign() < 0) return false;
        return true;
    }

    bool contains_cone(const Cone& o) const {
        for (auto& g : o.generators())
            if (!contains(g)) return false;
        return true;
    }

    // generator indices i with f(g_i) = 0 for every facet f vanishing on all of S
    Face smallest_face_containing(const std::vector<Vec>& S) const {
        for (auto& s : S)
            if (!contains(s)) throw std::invalid_argument("element outside the cone");
        std::vector<bool> in(gens_.size(), true);
        for (auto& f : facets_) {
            bool vanish = std::all_of(S.begin(), S.end(), [&](const Vec& s) { return dot(f, s).is_zero(); });
            if (!vanish) continue;
            for (std::size_t i = 0; i < gens_.size(); ++i)
                if (!dot(f, gens_[i]).is_zero()) in[i] = false;
        }
        Face out;
        for (std::size_t i = 0; i < gens_.size(); ++i)
            if (in[i]) out.push_back(static_cast<int>(i));
        return out;
    }

    Face whole() const {
        Face f(gens_.size());
        for (std::size_t i = 0; i < gens_.size(); ++i) f[i] = static_cast<int>(i);
        return f;
    }

    int face_dim(const Face& f) const {
        if (f.empty()) return 0;
        return Subspace<Rational>::span_vectors(dim_, face_gens(f)).dim();
    }

    std::vector<Vec> face_gens(const Face& f) const {
        std::vector<Vec> out;
        for (int i : f) out.push_back(gens_[i]);
        return out;
    }

    Cone face_cone(const Face& f) const { return Cone(dim_, face_gens(f)); }

    bool in_face(const Face& f, const Vec& x) const {
        if (!contains(x)) return false;
        Face s = smallest_face_containing({x});
        return std::includes(f.begin(), f.end(), s.begin(), s.end());
    }

    bool in_interior(const Face& f, const Vec& x) const { return contains(x) && smallest_face_containing({x}) == f; }

    bool operator==(const Cone& o) const { return dim_ == o.dim_ && contains_cone(o) && o.contains_cone(*this); }

private:
    void compute_facets() {
        span_ = gens_.empty() ? Subspace<Rational>::zero(dim_) : Subspace<Rational>::span_vectors(dim_, gens_);
        int r = span_.dim();
        if (r == 0) return;
        Matrix<Rational> perp = span_.equations();  // rows spanning span^perp
        int m = static_cast<int>(gens_.size());
        std::set<Vec> seen;
        std::vector<int> pick;
        std::function<void(int)> rec = [&](int start) {
            if (static_cast<int>(pick.size()) == r - 1) {
                Matrix<Rational> A(r - 1 + perp.rows(), dim_);
                for (int i = 0; i < r - 1; ++i)
                    for (int j = 0; j < dim_; ++j) A(i, j) = gens_[pick[i]][j];
                for (int i = 0; i < perp.rows(); ++i)
                    for (int j = 0; j < dim_; ++j) A(r - 1 + i, j) = perp(i, j);
                Matrix<Rational> K = kernel(A);
                if (K.cols() != 1) return;
                Vec f(dim_);
                for (int j = 0; j < dim_; ++j) f[j] = K(j, 0);
                int pos = 0, neg = 0;
                for (auto& g : gens_) {
                    int s = dot(f, g).sign();
                    pos += s > 0;
                    neg += s < 0;
                }
                if (pos > 0 && neg > 0) return;
                if (pos == 0 && neg == 0) return;
                if (neg > 0)
                    for (auto& x : f) x = -x;
                // normalize: first nonzero = +-1 scaled to keep the sign
                Rational lead;
                for (auto& x : f)
                    if (!x.is_zero()) { lead = x.abs(); break; }
                for (auto& x : f) x = x / lead;
                if (seen.insert(f).second) facets_.push_back(f);
                return;
            }
            for (int i = start; i < m; ++i) {
                pick.push_back(i);
                rec(i + 1);
                pick.pop_back();
            }
        };
        rec(0);
    }

    int dim_ = 0;
    std::vector<Vec> gens_;
    Subspace<Rational> span_;
    std::vector<Vec> facets_;
};

// All faces, sorted by dimension then lexicographically. Faces are the
// intersections of facets, plus the cone itself.
inline std::vector<Face> face_lattice(const Cone& s) {
    if (!s.is_sharp()) throw std::invalid_argument("face_lattice: cone is not sharp");
    std::set<Face> faces{s.whole()};
    std::vector<Face> frontier{s.whole()};
    std::vector<Face> facet_sets;
    for (auto& f : s.facet_normals()) {
        Face z;
        for (int i = 0; i < s.num_generators(); ++i)
            if (dot(f, s.generators()[i]).is_zero()) z.push_back(i);
        facet_sets.push_back(z);
    }
    while (!frontier.empty()) {
        std::vector<Face> next;
        for (auto& a : frontier)
            for (auto& b : facet_sets) {
                Face c;
                std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(c));
                if (faces.insert(c).second) next.push_back(c);
            }
        frontier = std::move(next);
    }
    std::vector<Face> out(faces.begin(), faces.end());
    std::stable_sort(out.begin(), out.end(), [&](const Face& a, const Face& b) {
        int da = s.face_dim(a), db = s.face_dim(b);
        return da != db ? da < db : a < b;
    });
    return out;
}

inline bool face_le(const Face& a, const Face& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

// sigma^vee in the dual space (same coordinates): facet normals and +-span^perp
inline Cone dual_cone(const Cone& s) {
    std::vector<Vec> g = s.facet_normals();
    Matrix<Rational> perp = s.span().equations();
    for (int i = 0; i < perp.rows(); ++i) {
        Vec v(s.ambient()), w(s.ambient());
        for (int j = 0; j < s.ambient(); ++j) {
            v[j] = perp(i, j);
            w[j] = -perp(i, j);
        }
        g.push_back(v);
        g.push_back(w);
    }
    return Cone(s.ambient(), g);
}

inline Vec apply(const Matrix<Rational>& h, const Vec& x) {
    Vec y(h.rows());
    for (int i = 0; i < h.rows(); ++i)
        for (int j = 0; j < h.cols(); ++j) y[i] += h(i, j) * x[j];
    return y;
}

struct FaceMaps {
    std::function<Face(const Face&)> image;     // face(sigma) -> face(sigma')
    std::function<Face(const Face&)> preimage;  // face(sigma') -> face(sigma)
};

inline FaceMaps face_maps(const Matrix<Rational>& h, const Cone& s, const Cone& t) {
    if (h.cols() != s.ambient() || h.rows() != t.ambient()) throw std::invalid_argument("face_maps: shape");
    for (auto& g : s.generators())
        if (!t.contains(apply(h, g))) throw std::invalid_argument("face_maps: h(sigma) not contained in sigma'");
    FaceMaps m;
    m.image = [h, s, t](const Face& f) {
        std::vector<Vec> im;
        for (int i : f) im.push_back(apply(h, s.generators()[i]));
        return t.smallest_face_containing(im);
    };
    m.preimage = [h, s, t](const Face& f) {
        Face out;
        for (int i = 0; i < s.num_generators(); ++i)
            if (t.in_face(f, apply(h, s.generators()[i]))) out.push_back(i);
        return out;
    };
    return m;
}

// ---------------------------------------------------------------------------
// cone actions and monodromy systems

struct ConeAction {
    Cone sigma;
    std::vector<Matrix<Rational>> images;  // one per generator of sigma
    Filtration<Rational> W;
    Matrix<Rational> Y;

    int dim() const { return W.ambient(); }

    // linear extension: N for x = sum c_i g_i
    Matrix<Rational> element(const std::vector<Rational>& coeffs) const {
        Matrix<Rational> N(dim(), dim());
        for (std::size_t i = 0; i < coeffs.size(); ++i)
            if (!coeffs[i].is_zero()) N += coeffs[i] * images[i];
        return N;
    }
};

struct MonodromySystem {
    ConeAction action;
    std::vector<Face> faces;
    std::map<Face, Filtration<Rational>> W_of;  // W(tau)
    std::vector<CheckLine> report;
    bool valid = false;
};

inline const char* admissibility_label() { return "admissibility (operational proxy)"; }

namespace detail {

inline std::vector<std::vector<Face>> maximal_chains(const Cone& s, const std::vector<Face>& faces) {
    std::vector<std::vector<Face>> out;
    std::vector<Face> cur{Face{}};
    int top = s.face_dim(s.whole());
    std::function<void()> rec = [&]() {
        Face last = cur.back();
        int d = s.face_dim(last);
        if (d == top) {
            out.push_back(cur);
            return;
        }
        for (auto& f : faces)
            if (s.face_dim(f) == d + 1 && face_le(last, f)) {
                cur.push_back(f);
                rec();
                cur.pop_back();
            }
    };
    rec();
    return out;
}

// generator sum plus two random positive combinations (interior of the face)
inline std::vector<std::vector<Rational>> interior_samples(const Cone& s, const Face& f, std::mt19937& rng) {
    std::uniform_int_distribution<int> d(1, 5);
    std::vector<std::vector<Rational>> out;
    for (int t = 0; t < 3; ++t) {
        std::vector<Rational> c(s.num_generators());
        for (int i : f) c[i] = t == 0 ? 1 : d(rng);
        out.push_back(c);
    }
    return out;
}

inline std::string face_name(const Face& f) {
    std::string s = "{";
    for (std::size_t i = 0; i < f.size(); ++i) s += (i ? "," : "") + std::to_string(f[i] + 1);
    return s + "}";
}

}  // namespace detail

inline MonodromySystem validate_monodromy_system(const ConeAction& A, unsigned seed = 1) {
    MonodromySystem R;
    R.action = A;
    auto& rep = R.report;
    auto add = [&](std::string nm, bool ok, std::string w = "") { rep.push_back({std::move(nm), ok, ok ? "" : std::move(w)}); };
    const Cone& s = A.sigma;
    int n = A.dim();
    bool sharp = s.is_sharp();
    add("sharp", sharp, "cone contains a line");
    bool shapes = static_cast<int>(A.images.size()) == s.num_generators();
    for (auto& N : A.images) shapes = shapes && N.rows() == n && N.cols() == n;
    shapes = shapes && A.Y.rows() == n;
    add("shapes", shapes, "one n x n matrix per generator expected");
    if (!sharp || !shapes) return R;
    // linear relations among generators must hold for their images
    {
        Matrix<Rational> G(s.ambient(), s.num_generators());
        for (int i = 0; i < s.num_generators(); ++i)
            for (int j = 0; j < s.ambient(); ++j) G(j, i) = s.generators()[i][j];
        Matrix<Rational> K = kernel(G);
        bool ok = true;
        for (int c = 0; c < K.cols() && ok; ++c) {
            std::vector<Rational> coeff(s.num_generators());
            for (int i = 0; i < s.num_generators(); ++i) coeff[i] = K(i, c);
            ok = A.element(coeff).is_zero();
        }
        add("action is linear", ok, "a linear relation among generators is not respected");
    }
    bool comm = true;
    for (std::size_t i = 0; i < A.images.size(); ++i)
        for (std::size_t j = i + 1; j < A.images.size(); ++j) comm = comm && commutator(A.images[i], A.images[j]).is_zero();
    add("commuting", comm, "generator images do not commute");
    bool nil = true, pres = true;
    for (auto& N : A.images) {
        nil = nil && is_nilpotent(N);
        pres = pres && preserves(N, A.W);
    }
    add("nilpotent", nil, "a generator image is not nilpotent");
    add("preserves W", pres, "a generator image does not preserve W");
    if (!comm || !nil || !pres) return R;

    R.faces = face_lattice(s);
    std::mt19937 rng(seed);
    bool adm = true;
    std::string why;
    R.W_of.emplace(Face{}, A.W);
    // direct: W(tau) = M(N, W) for interior N, independent of the sample
    for (auto& f : R.faces) {
        if (f.empty()) continue;
        std::optional<Filtration<Rational>> ref;
        for (auto& c : detail::interior_samples(s, f, rng)) {
            auto M = relative_monodromy_filtration(A.element(c), A.W);
            if (!M) {
                adm = false;
                why = "no relative monodromy filtration for an interior element of face " + detail::face_name(f);
                break;
            }
            if (ref && !(*ref == *M)) {
                adm = false;
                why = "W(tau) depends on the interior element for face " + detail::face_name(f);
                break;
            }
            ref = M;
        }
        if (!adm) break;
        R.W_of.emplace(f, *ref);
    }
    // chain recursion W(tau_j) = M(N_j, W(tau_{j-1}))
    if (adm) {
        for (auto& chain : detail::maximal_chains(s, R.faces)) {
            for (std::size_t j = 1; j < chain.size() && adm; ++j) {
                for (auto& c : detail::interior_samples(s, chain[j], rng)) {
                    auto M = relative_monodromy_filtration(A.element(c), R.W_of.at(chain[j - 1]));
                    if (!M || !(*M == R.W_of.at(chain[j]))) {
                        adm = false;
                        why = "chain recursion fails at " + detail::face_name(chain[j - 1]) + " < " + detail::face_name(chain[j]);
                        break;
                    }
                }
            }
            if (!adm) break;
        }
    }
    add(admissibility_label(), adm, why);
    if (!adm) return R;
    const auto& Wsig = R.W_of.at(s.whole());
    add("Y splits W(sigma)", splits(A.Y, Wsig), "Y is not a splitting of W(sigma)");
    add("Y compatible with W", preserves(A.Y, A.W), "Y does not preserve W");
    bool wt = true;
    for (auto& N : A.images) wt = wt && commutator(A.Y, N) == Rational(-2) * N;
    add("generators have Y-weight -2", wt, "a generator image is not of Y-weight -2");
    R.valid = all_pass(rep);
    return R;
}

inline Filtration<Rational> face_weight_filtration(const MonodromySystem& M, const Face& f) {
    if (!M.valid) throw std::logic_error("face_weight_filtration: system not validated");
    auto it = M.W_of.find(f);
    if (it == M.W_of.end()) throw std::invalid_argument("face_weight_filtration: not a face");
    return it->second;
}

// Deligne system from chosen elements: W^j = W(smallest face containing N_1..N_j).
// Elements are given by coefficient vectors over the generators.
inline DeligneSystemData deligne_system_from(const MonodromySystem& M, const std::vector<std::vector<Rational>>& elems) {
    if (!M.valid) throw std::logic_error("deligne_system_from: system not validated");
    const Cone& s = M.action.sigma;
    DeligneSystemData D;
    D.dim = M.action.dim();
    D.W.push_back(M.action.W);
    std::vector<Vec> pts;
    for (auto& c : elems) {
        Vec x(s.ambient());
        for (int i = 0; i < s.num_generators(); ++i)
            for (int k = 0; k < s.ambient(); ++k) x[k] += c[i] * s.generators()[i][k];
        pts.push_back(x);
        D.W.push_back(face_weight_filtration(M, s.smallest_face_containing(pts)));
        D.N.push_back(M.action.element(c));
    }
    D.Y = M.action.Y;
    return D;
}

// the standard cone R^n_{>=0} acting through N_1..N_n
inline ConeAction orthant_action(const Filtration<Rational>& W, const std::vector<Matrix<Rational>>& Ns, const Matrix<Rational>& Y) {
    return {Cone::orthant(static_cast<int>(Ns.size())), Ns, W, Y};
}

}  // namespace mslab
