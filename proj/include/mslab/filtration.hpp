#pragma once

#include "subspace.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mslab {

struct InvalidFiltration : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InvalidSplitting : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Finite increasing filtration of F^n. Stored on the minimal range [lo, hi]
// with W_{lo} != 0, W_{hi-1} != V and W_{hi} = V; W_w = 0 for w < lo and V
// for w >= hi.
template <class F>
class Filtration {
public:
    Filtration() = default;

    // steps: weight -> subspace; weights in between inherit the previous
    // step. The largest step must be V.
    static Filtration from_steps(int n, const std::map<int, Subspace<F>>& steps) {
        if (steps.empty()) throw InvalidFiltration("filtration has no steps");
        Filtration f;
        f.n_ = n;
        int lo = steps.begin()->first, hi = steps.rbegin()->first;
        if (!steps.rbegin()->second.is_full()) throw InvalidFiltration("filtration is not exhaustive");
        Subspace<F> prev = Subspace<F>::zero(n);
        std::vector<Subspace<F>> w;
        for (int k = lo; k <= hi; ++k) {
            auto it = steps.find(k);
            Subspace<F> cur = it == steps.end() ? prev : it->second;
            if (cur.ambient() != n) throw InvalidFiltration("subspace dimension mismatch");
            if (!cur.contains(prev)) throw InvalidFiltration("filtration is not increasing at weight " + std::to_string(k));
            w.push_back(cur);
            prev = cur;
        }
        f.lo_ = lo;
        f.w_ = std::move(w);
        f.trim();
        return f;
    }

    static Filtration pure(int n, int weight) {
        return from_steps(n, {{weight, Subspace<F>::full(n)}});
    }

    int ambient() const { return n_; }
    int lowest() const { return lo_; }
    int highest() const { return lo_ + static_cast<int>(w_.size()) - 1; }

    Subspace<F> at(int k) const {
        if (k < lo_) return Subspace<F>::zero(n_);
        if (k > highest()) return Subspace<F>::full(n_);
        return w_[k - lo_];
    }

    int graded_dim(int k) const { return at(k).dim() - at(k - 1).dim(); }

    // weights with nonzero graded piece
    std::vector<int> weights() const {
        std::vector<int> ws;
        for (int k = lowest(); k <= highest(); ++k)
            if (graded_dim(k) > 0) ws.push_back(k);
        return ws;
    }

    friend bool operator==(const Filtration& a, const Filtration& b) {
        return a.n_ == b.n_ && a.lo_ == b.lo_ && a.w_ == b.w_;
    }
    friend bool operator!=(const Filtration& a, const Filtration& b) { return !(a == b); }

    Filtration shifted(int s) const {
        Filtration f = *this;
        f.lo_ += s;
        return f;
    }

private:
    void trim() {
        while (w_.size() > 1 && w_.front().is_zero()) { w_.erase(w_.begin()); ++lo_; }
        while (w_.size() > 1 && w_[w_.size() - 2].is_full()) w_.pop_back();
    }
    int n_ = 0, lo_ = 0;
    std::vector<Subspace<F>> w_;
};

template <class F>
struct GradedPiece {
    int weight = 0;
    int dim = 0;
    Matrix<F> lifts;  // n x dim: representatives of a basis of W_w / W_{w-1}
};

template <class F>
GradedPiece<F> graded_piece(const Filtration<F>& W, int w) {
    GradedPiece<F> g;
    g.weight = w;
    g.lifts = W.at(w).complement_of(W.at(w - 1));
    g.dim = g.lifts.cols();
    return g;
}

// Basis of V adapted to W: the canonical lifts of the graded pieces in
// increasing weight. Coordinates in this basis are "graded coordinates".
template <class F>
struct GradedBasis {
    Matrix<F> A;             // columns = lifts
    Matrix<F> Ainv;
    std::vector<int> weight;  // weight of each column

    explicit GradedBasis(const Filtration<F>& W) {
        int n = W.ambient();
        A = Matrix<F>(n, 0);
        for (int w = W.lowest(); w <= W.highest(); ++w) {
            auto g = graded_piece(W, w);
            A = A.hcat(g.lifts);
            for (int i = 0; i < g.dim; ++i) weight.push_back(w);
        }
        Ainv = inverse(A);
    }
    int dim() const { return A.rows(); }
    std::vector<int> indices(int w) const {
        std::vector<int> r;
        for (int i = 0; i < static_cast<int>(weight.size()); ++i)
            if (weight[i] == w) r.push_back(i);
        return r;
    }
};

// Element of End(gr^W V) in graded coordinates; entry (i, j) maps the j-th
// graded basis vector (weight weight[j]) to the i-th (weight weight[i]).
template <class F>
struct GradedMap {
    Matrix<F> m;
    std::vector<int> weight;

    Matrix<F> block(int w_dst, int w_src) const {
        std::vector<int> is, js;
        for (int i = 0; i < static_cast<int>(weight.size()); ++i) {
            if (weight[i] == w_dst) is.push_back(i);
            if (weight[i] == w_src) js.push_back(i);
        }
        return m.rows_subset(is).cols_subset(js);
    }
    // true when only blocks lowering the weight by at least -k are nonzero,
    // i.e. the element lies in W_k End(gr V)
    bool in_weight(int k) const {
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j)
                if (weight[i] - weight[j] > k && !scalar_is_zero(m(i, j))) return false;
        return true;
    }
    friend bool operator==(const GradedMap& a, const GradedMap& b) { return a.weight == b.weight && a.m == b.m; }
    friend bool operator!=(const GradedMap& a, const GradedMap& b) { return !(a == b); }
};

// gr(f) in graded coordinates for f preserving W.
template <class F>
GradedMap<F> graded_endomorphism(const GradedBasis<F>& B, const Matrix<F>& f) {
    Matrix<F> g = B.Ainv * f * B.A;
    for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < g.cols(); ++j)
            if (B.weight[i] != B.weight[j]) g(i, j) = F(0);
    return {g, B.weight};
}

template <class F>
bool preserves(const Matrix<F>& f, const Filtration<F>& W) {
    for (int k = W.lowest(); k < W.highest(); ++k)
        if (!W.at(k).contains_columns(f * W.at(k).basis())) return false;
    return true;
}

// f W_w subset W_{w+k} for all w
template <class F>
bool in_endo_filtration(const Matrix<F>& f, const Filtration<F>& W, int k) {
    for (int w = W.lowest(); w <= W.highest(); ++w) {
        auto S = W.at(w);
        if (S.is_zero()) continue;
        if (!W.at(w + k).contains_columns(f * S.basis())) return false;
    }
    return true;
}

// Smallest k with f in W_k End(V); returns INT_MIN-ish sentinel for f = 0.
template <class F>
int endo_weight(const Matrix<F>& f, const Filtration<F>& W) {
    if (f.is_zero()) return W.lowest() - W.highest() - 1;
    int span = W.highest() - W.lowest();
    for (int k = -span; k <= span; ++k)
        if (in_endo_filtration(f, W, k)) return k;
    return span;
}

// The filtration W_k End(V) = {f : f W_w in W_{w+k}} on the n^2-dimensional
// space of endomorphisms, with f flattened row-major.
template <class F>
Filtration<F> induced_endo_filtration(const Filtration<F>& W) {
    GradedBasis<F> B(W);
    int n = W.ambient();
    int span = W.highest() - W.lowest();
    std::map<int, Subspace<F>> steps;
    for (int k = -span; k <= span; ++k) {
        std::vector<std::vector<F>> vs;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (B.weight[i] - B.weight[j] > k) continue;
                // A E_ij A^{-1}
                Matrix<F> e(n, n);
                for (int r = 0; r < n; ++r)
                    for (int c = 0; c < n; ++c) e(r, c) = B.A(r, i) * B.Ainv(j, c);
                vs.push_back(e.data());
            }
        steps[k] = Subspace<F>::span_vectors(n * n, vs);
    }
    return Filtration<F>::from_steps(n * n, steps);
}

// Filtration induced by Wp on gr^W V, in graded coordinates of W.
template <class F>
Filtration<F> induced_on_graded(const Filtration<F>& W, const Filtration<F>& Wp) {
    GradedBasis<F> B(W);
    int n = W.ambient();
    std::map<int, Subspace<F>> steps;
    for (int k = Wp.lowest(); k <= Wp.highest(); ++k) {
        std::vector<std::vector<F>> vs;
        for (int w : W.weights()) {
            auto S = Wp.at(k).intersect(W.at(w));
            if (S.is_zero()) continue;
            Matrix<F> c = B.Ainv * S.basis();
            for (int t = 0; t < c.cols(); ++t) {
                std::vector<F> v(n, F(0));
                for (int i = 0; i < n; ++i)
                    if (B.weight[i] == w) v[i] = c(i, t);
                vs.push_back(v);
            }
        }
        steps[k] = Subspace<F>::span_vectors(n, vs);
    }
    return Filtration<F>::from_steps(n, steps);
}

// Semisimple Y with the given integer spectrum, with eigenprojections
// P_w = prod_{w' != w} (Y - w') / (w - w').
template <class F>
struct Splitting {
    Matrix<F> Y;
    std::vector<int> spectrum;
    std::vector<Matrix<F>> proj;

    int dim() const { return Y.rows(); }
    const Matrix<F>& projection(int w) const {
        for (std::size_t i = 0; i < spectrum.size(); ++i)
            if (spectrum[i] == w) return proj[i];
        throw std::out_of_range("weight not in spectrum");
    }
    bool has_weight(int w) const {
        for (int s : spectrum)
            if (s == w) return true;
        return false;
    }
    Subspace<F> eigenspace(int w) const {
        if (!has_weight(w)) return Subspace<F>::zero(dim());
        return image_space(projection(w));
    }
    // filtration sum_{w' <= w} Ker(Y - w')
    Filtration<F> filtration() const {
        std::map<int, Subspace<F>> steps;
        Subspace<F> acc = Subspace<F>::zero(dim());
        for (int w : spectrum) {
            acc = acc + eigenspace(w);
            steps[w] = acc;
        }
        return Filtration<F>::from_steps(dim(), steps);
    }
};

template <class F>
Splitting<F> make_splitting(const Matrix<F>& Y, std::vector<int> spectrum) {
    if (!Y.square()) throw InvalidSplitting("splitting must be square");
    std::sort(spectrum.begin(), spectrum.end());
    spectrum.erase(std::unique(spectrum.begin(), spectrum.end()), spectrum.end());
    int n = Y.rows();
    Splitting<F> s;
    s.Y = Y;
    s.spectrum = spectrum;
    Matrix<F> I = Matrix<F>::identity(n);
    Matrix<F> vanish = I;
    for (int w : spectrum) vanish = vanish * (Y - F(Rational(w)) * I);
    if (!vanish.is_zero()) throw InvalidSplitting("Y is not semisimple with the expected integer spectrum");
    Matrix<F> total(n, n);
    for (int w : spectrum) {
        Matrix<F> p = I;
        for (int v : spectrum) {
            if (v == w) continue;
            p = p * (Y - F(Rational(v)) * I);
            p = F(Rational(1, 1) / Rational(w - v)) * p;
        }
        if (p.is_zero()) throw InvalidSplitting("weight " + std::to_string(w) + " is not an eigenvalue");
        total += p;
        s.proj.push_back(std::move(p));
    }
    return s;
}

// Y splits W: W_w = sum_{w' <= w} Ker(Y - w').
template <class F>
Splitting<F> splitting_of(const Matrix<F>& Y, const Filtration<F>& W) {
    auto s = make_splitting(Y, W.weights());
    if (s.filtration() != W) throw InvalidSplitting("Y does not split the filtration");
    return s;
}

template <class F>
bool splits(const Matrix<F>& Y, const Filtration<F>& W) {
    try {
        splitting_of(Y, W);
        return true;
    } catch (const InvalidSplitting&) {
        return false;
    }
}

// X^{[a]} = sum_w P_{w+a} X P_w
template <class F>
Matrix<F> weight_component(const Matrix<F>& X, const Splitting<F>& S, int a) {
    Matrix<F> r(X.rows(), X.cols());
    for (int w : S.spectrum)
        if (S.has_weight(w + a)) r += S.projection(w + a) * X * S.projection(w);
    return r;
}

// Ad(Y)-weights actually occurring in X.
template <class F>
std::map<int, Matrix<F>> weight_decomposition(const Matrix<F>& X, const Splitting<F>& S) {
    std::map<int, Matrix<F>> out;
    std::set<int> diffs;
    for (int a : S.spectrum)
        for (int b : S.spectrum) diffs.insert(a - b);
    for (int d : diffs) {
        auto c = weight_component(X, S, d);
        if (!c.is_zero()) out.emplace(d, std::move(c));
    }
    return out;
}

// The unique u with u - 1 in W_{-1}End and Y' = u Y u^{-1}: u = sum_w P'_w P_w.
template <class F>
Matrix<F> splitting_conjugator(const Filtration<F>& W, const Splitting<F>& Y, const Splitting<F>& Yp) {
    if (Y.filtration() != W || Yp.filtration() != W) throw InvalidSplitting("splitting_conjugator: inputs do not split W");
    Matrix<F> u(W.ambient(), W.ambient());
    for (int w : Y.spectrum) u += Yp.projection(w) * Y.projection(w);
    return u;
}

// Integer eigenvalues of a rational matrix via its characteristic polynomial.
inline std::vector<int> integer_spectrum(const Matrix<Rational>& Y);

}  // namespace mslab

#include "charpoly.hpp"
