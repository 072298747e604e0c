#pragma once

#include "charpoly.hpp"
#include "deligne.hpp"

namespace mslab {

// a A^2 + b AB + c BA + d B^2 = 0
struct QuadraticRelation {
    Rational a, b, c, d;
    Matrix<Rational> A, B;

    Matrix<Rational> value() const { return a * (A * A) + b * (A * B) + c * (B * A) + d * (B * B); }
    bool holds() const { return value().is_zero(); }
};

enum class EigenCase { I, II, III };

inline std::string case_name(EigenCase k) {
    switch (k) {
        case EigenCase::I: return "i";
        case EigenCase::II: return "ii";
        default: return "iii";
    }
}

inline EigenCase parse_case(const std::string& s) {
    if (s == "i") return EigenCase::I;
    if (s == "ii") return EigenCase::II;
    if (s == "iii") return EigenCase::III;
    throw std::invalid_argument("unknown eigenvector case '" + s + "'");
}

struct HypothesisError : std::invalid_argument {
    std::string clause;
    HypothesisError(const std::string& c, const std::string& msg) : std::invalid_argument(msg), clause(c) {}
};

struct RelationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SplittingFieldError : std::domain_error {
    using std::domain_error::domain_error;
};

struct EigenReport {
    EigenCase which = EigenCase::I;
    std::vector<Rational> v;
    Rational lambda, mu;  // Av = lambda v, Bv = mu v
    // case i
    Rational scale = 1;  // relation multiplied by this before taking roots
    Rational alpha, beta, gamma, delta;
    Matrix<Rational> X, Y;
    int nil_index = 0;  // least k with Y^k = 0
    std::vector<CheckLine> checks;

    bool pass() const { return all_pass(checks); }
};

namespace detail {

inline std::vector<Rational> mat_vec(const Matrix<Rational>& M, const std::vector<Rational>& v) {
    std::vector<Rational> out(M.rows());
    for (int i = 0; i < M.rows(); ++i)
        for (int j = 0; j < M.cols(); ++j) out[i] += M(i, j) * v[j];
    return out;
}

inline bool vec_zero(const std::vector<Rational>& v) {
    for (auto& x : v)
        if (!x.is_zero()) return false;
    return true;
}

inline std::string vec_str(const std::vector<Rational>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i].str();
    return s + ")";
}

// first nonzero entry 1
inline std::vector<Rational> normalized(std::vector<Rational> v) {
    for (auto& x : v)
        if (!x.is_zero()) {
            Rational s = x.inverse();
            for (auto& y : v) y *= s;
            break;
        }
    return v;
}

// Eigenvector of M for its least rational eigenvalue.
inline std::pair<Rational, std::vector<Rational>> rational_eigenvector(const Matrix<Rational>& M, const std::string& what) {
    auto roots = rational_roots(characteristic_polynomial(M));
    if (roots.empty()) throw SplittingFieldError(what + " has no rational eigenvalue");
    Rational l = roots.front();
    Matrix<Rational> K = kernel(M - l * Matrix<Rational>::identity(M.rows()));
    return {l, K.col(0)};
}

// eigenvalue of M on v, or nullopt when v is not an eigenvector
inline std::optional<Rational> eigenvalue_on(const Matrix<Rational>& M, const std::vector<Rational>& v) {
    auto w = mat_vec(M, v);
    int p = 0;
    while (v[p].is_zero()) ++p;
    Rational l = w[p] / v[p];
    for (std::size_t i = 0; i < v.size(); ++i)
        if (w[i] != l * v[i]) return std::nullopt;
    return l;
}

inline void require(bool ok, const std::string& clause, const std::string& msg) {
    if (!ok) throw HypothesisError(clause, msg);
}

inline EigenReport eigen_case_one(const QuadraticRelation& R) {
    EigenReport rep;
    rep.which = EigenCase::I;
    Rational a = R.a, b = R.b, c = R.c, d = R.d;
    Rational sa, sd;
    if (!a.sqrt_exact(sa)) {
        rep.scale = a;
    } else if (a.is_zero() && !d.sqrt_exact(sd)) {
        rep.scale = d;
    }
    a *= rep.scale, b *= rep.scale, c *= rep.scale, d *= rep.scale;
    Rational& al = rep.alpha;
    Rational& be = rep.beta;
    if (!a.sqrt_exact(al)) throw std::logic_error("scaled leading coefficient not a square");
    if (!al.is_zero()) {
        be = (b + c) / (Rational(2) * al);
        rep.gamma = 0;
        rep.delta = (b - al * be) / al;
    } else {
        if (!d.sqrt_exact(be)) throw std::logic_error("scaled trailing coefficient not a square");
        rep.delta = 0;
        rep.gamma = -b / be;
    }
    const int n = R.A.rows();
    rep.X = rep.gamma * R.A + rep.delta * R.B;
    rep.Y = al * R.A + be * R.B;
    const auto& X = rep.X;
    const auto& Y = rep.Y;
    Rational det = al * rep.delta - be * rep.gamma;
    rep.checks.push_back({"alpha delta - beta gamma nonzero", !det.is_zero(), det.str()});
    rep.checks.push_back({"alpha^2 = a, beta^2 = d, 2 alpha beta = b + c",
                          al * al == a && be * be == d && Rational(2) * al * be == b + c,
                          "alpha=" + al.str() + " beta=" + be.str()});
    rep.checks.push_back({"alpha beta + alpha delta - beta gamma = b", al * be + al * rep.delta - be * rep.gamma == b, ""});
    Matrix<Rational> Yn = Y;
    bool ident = true, traces = true;
    std::string wid, wtr;
    for (int k = 1; k <= n; ++k) {
        Matrix<Rational> next = Yn * Y;
        if (X * Yn - Yn * X != Rational(k) * next) {
            if (ident) wid = "n=" + std::to_string(k);
            ident = false;
        }
        if (!Yn.trace().is_zero()) {
            if (traces) wtr = "n=" + std::to_string(k) + " trace " + Yn.trace().str();
            traces = false;
        }
        Yn = next;
    }
    rep.checks.push_back({"XY - YX = Y^2", X * Y - Y * X == Y * Y, ""});
    rep.checks.push_back({"XY^n - Y^nX = nY^{n+1} for n <= dim", ident, wid});
    rep.checks.push_back({"Tr(Y^n) = 0 for n <= dim", traces, wtr});
    Matrix<Rational> P = Matrix<Rational>::identity(n);
    rep.nil_index = -1;
    for (int k = 0; k <= n; ++k) {
        if (P.is_zero()) { rep.nil_index = k; break; }
        P = P * Y;
    }
    rep.checks.push_back({"Y^dim = 0", rep.nil_index >= 0, rep.nil_index >= 0 ? "index " + std::to_string(rep.nil_index) : ""});

    auto [lx, v] = rational_eigenvector(X, "X");
    // X Y^k v = lx Y^k v + k Y^{k+1} v, so the last nonzero Y^k v lies in Ker Y and is X-fixed up to lx
    int steps = 0;
    for (auto w = mat_vec(Y, v); !vec_zero(w) && steps <= n; w = mat_vec(Y, w)) {
        v = w;
        ++steps;
    }
    auto xv = eigenvalue_on(X, v);
    rep.checks.push_back({"Y-string ends in Ker Y with the same X-eigenvalue", vec_zero(mat_vec(Y, v)) && xv && *xv == lx,
                          "steps " + std::to_string(steps)});
    rep.v = v;
    return rep;
}

inline Matrix<Rational> kernel_restriction(const Matrix<Rational>& K, const Matrix<Rational>& B, bool& stable) {
    auto s = solve_linear(K, B * K);
    stable = s.consistent();
    return stable ? s.particular : Matrix<Rational>(K.cols(), K.cols());
}

// Eigenvector of B inside Ker A.
inline EigenReport eigen_case_two(const QuadraticRelation& R) {
    EigenReport rep;
    rep.which = EigenCase::II;
    Matrix<Rational> K = kernel(R.A);
    bool stable = false;
    Matrix<Rational> M = kernel_restriction(K, R.B, stable);
    rep.checks.push_back({"B preserves Ker A", stable, "dim Ker A = " + std::to_string(K.cols())});
    if (!stable) throw std::logic_error("B does not preserve Ker A");
    auto [l, w] = rational_eigenvector(M, "B on Ker A");
    rep.v = mat_vec(K, w);
    return rep;
}

inline void finish(const QuadraticRelation& R, EigenReport& rep) {
    rep.v = normalized(rep.v);
    bool nz = !vec_zero(rep.v);
    rep.checks.push_back({"v nonzero", nz, vec_str(rep.v)});
    auto la = nz ? eigenvalue_on(R.A, rep.v) : std::nullopt;
    auto lb = nz ? eigenvalue_on(R.B, rep.v) : std::nullopt;
    if (la) rep.lambda = *la;
    if (lb) rep.mu = *lb;
    rep.checks.push_back({"Av = lambda v", la.has_value(), la ? "lambda=" + la->str() : vec_str(mat_vec(R.A, rep.v))});
    rep.checks.push_back({"Bv = mu v", lb.has_value(), lb ? "mu=" + lb->str() : vec_str(mat_vec(R.B, rep.v))});
}

}  // namespace detail

inline void check_hypotheses(const QuadraticRelation& R, EigenCase k) {
    if (!R.A.square() || R.A.rows() != R.B.rows() || !R.B.square() || R.A.rows() == 0)
        throw std::invalid_argument("A and B must be square of the same positive size");
    if (!R.holds()) throw RelationError("relation fails: residual " + R.value().str());
    const int n = R.A.rows();
    switch (k) {
        case EigenCase::I:
            detail::require(Rational(4) * R.a * R.d == (R.b + R.c) * (R.b + R.c), "4ad = (b+c)^2", "4ad != (b+c)^2");
            detail::require(R.b != R.c, "b != c", "b = c");
            detail::require(!R.a.is_zero() || !R.d.is_zero(), "a != 0 or d != 0", "a = d = 0");
            break;
        case EigenCase::II:
            detail::require(rank(R.A) < n, "A not invertible", "A is invertible");
            detail::require(!R.b.is_zero(), "b != 0", "b = 0");
            detail::require(R.d.is_zero(), "d = 0", "d != 0");
            break;
        case EigenCase::III:
            detail::require(rank(R.B) < n, "B not invertible", "B is invertible");
            detail::require(!R.c.is_zero(), "c != 0", "c = 0");
            detail::require(R.a.is_zero(), "a = 0", "a != 0");
            break;
    }
}

inline EigenReport common_eigenvector_report(const QuadraticRelation& R, EigenCase k) {
    check_hypotheses(R, k);
    EigenReport rep;
    if (k == EigenCase::I) {
        rep = detail::eigen_case_one(R);
    } else if (k == EigenCase::II) {
        rep = detail::eigen_case_two(R);
    } else {
        QuadraticRelation S{R.d, R.c, R.b, R.a, R.B, R.A};
        rep = detail::eigen_case_two(S);
        rep.which = EigenCase::III;
        rep.checks.front().name = "A preserves Ker B";
    }
    detail::finish(R, rep);
    return rep;
}

inline std::vector<Rational> common_eigenvector(const QuadraticRelation& R, EigenCase k) {
    auto rep = common_eigenvector_report(R, k);
    if (!rep.pass()) {
        for (auto& c : rep.checks)
            if (!c.pass) throw std::logic_error("common eigenvector check failed: " + c.name);
    }
    return rep.v;
}

struct MonodromyTriple {
    Matrix<Rational> N0, N1, N2, F;
    Rational q;
};

enum class Normalization { NotNeeded, Needed, Impossible };

inline std::string normalization_name(Normalization n) {
    switch (n) {
        case Normalization::NotNeeded: return "not needed";
        case Normalization::Needed: return "needed";
        default: return "impossible";
    }
}

struct TripleReport {
    std::vector<CheckLine> checks;
    Normalization normalization = Normalization::NotNeeded;
    Rational kappa;             // F N1 F^{-1} = N1 + kappa N2
    Rational shift;             // normalized N1 = N1 - shift N2
    Matrix<Rational> N1_normalized;
    std::vector<CheckLine> normalization_checks;

    bool valid() const { return all_pass(checks); }
};

inline TripleReport validate_triple(const MonodromyTriple& T) {
    TripleReport rep;
    auto eq = [&](std::vector<CheckLine>& out, const std::string& name, const Matrix<Rational>& lhs, const Matrix<Rational>& rhs) {
        Matrix<Rational> diff = lhs - rhs;
        out.push_back({name, diff.is_zero(), diff.is_zero() ? "" : "difference " + diff.str()});
    };
    const int n = T.F.rows();
    for (auto* m : {&T.N0, &T.N1, &T.N2, &T.F})
        if (m->rows() != n || m->cols() != n) {
            rep.checks.push_back({"operators square of equal size", false, "size " + std::to_string(m->rows()) + "x" + std::to_string(m->cols())});
            return rep;
        }
    const auto &N0 = T.N0, &N1 = T.N1, &N2 = T.N2, &F = T.F;
    bool invertible = rank(F) == n;
    rep.checks.push_back({"F invertible", invertible, invertible ? "" : "rank " + std::to_string(rank(F))});
    eq(rep.checks, "[N0,N2] = 0", commutator(N0, N2), Matrix<Rational>(n, n));
    eq(rep.checks, "[N1,N2] = 0", commutator(N1, N2), Matrix<Rational>(n, n));
    eq(rep.checks, "F N0 = q N0 F", F * N0, T.q * (N0 * F));
    eq(rep.checks, "F N2 = q N2 F", F * N2, T.q * (N2 * F));
    eq(rep.checks, "[N0,N1] = N2", commutator(N0, N1), N2);

    // F N1 - N1 F = kappa N2 F
    Matrix<Rational> lhs = F * N1 - N1 * F, N2F = N2 * F;
    std::optional<Rational> kappa;
    if (lhs.is_zero()) {
        kappa = Rational(0);
    } else {
        int p = 0;
        while (p < n * n && N2F.data()[p].is_zero()) ++p;
        if (p < n * n) {
            Rational k = lhs.data()[p] / N2F.data()[p];
            if (lhs == k * N2F) kappa = k;
        }
    }
    rep.N1_normalized = N1;
    if (!kappa) {
        rep.normalization = Normalization::Impossible;
        rep.normalization_checks.push_back({"F N1 F^-1 - N1 in span(N2)", false, "F N1 - N1 F = " + lhs.str()});
    } else if (kappa->is_zero()) {
        rep.normalization = Normalization::NotNeeded;
        rep.normalization_checks.push_back({"F N1 = N1 F", true, ""});
    } else if (T.q == Rational(1)) {
        rep.kappa = *kappa;
        rep.normalization = Normalization::Impossible;
        rep.normalization_checks.push_back({"q != 1 for normalization", false, "kappa=" + kappa->str()});
    } else {
        rep.kappa = *kappa;
        rep.normalization = Normalization::Needed;
        rep.shift = *kappa / (T.q - Rational(1));
        rep.N1_normalized = N1 - rep.shift * N2;
        eq(rep.normalization_checks, "F N1' = N1' F after normalization", F * rep.N1_normalized, rep.N1_normalized * F);
        eq(rep.normalization_checks, "[N0,N1'] = N2", commutator(N0, rep.N1_normalized), N2);
    }
    const auto& M1 = rep.N1_normalized;
    eq(rep.checks, "N0^2 N1 - 2 N0 N1 N0 + N1 N0^2 = 0", N0 * N0 * M1 - Rational(2) * (N0 * M1 * N0) + M1 * N0 * N0, Matrix<Rational>(n, n));
    eq(rep.checks, "N1^2 N0 - 2 N1 N0 N1 + N0 N1^2 = 0", M1 * M1 * N0 - Rational(2) * (M1 * N0 * M1) + N0 * M1 * M1, Matrix<Rational>(n, n));
    return rep;
}

}  // namespace mslab
