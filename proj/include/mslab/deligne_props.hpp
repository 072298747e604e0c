#pragma once

#include "cones.hpp"

namespace mslab {

// Structural identities of a valid Deligne system, each as a report line.
inline std::vector<CheckLine> verify_deligne_props(const DeligneSystemData& D) {
    std::vector<CheckLine> out;
    int n = D.length();
    auto ys = descend_splittings(D);
    auto S = sl2_structure(D, ys);
    auto js = [](int j) { return std::to_string(j); };

    // (N_1, Nhat_2, ..., Nhat_n) on the orthant, with W(sigma) = W^n
    {
        std::vector<Matrix<Rational>> gens{D.N[0]};
        for (int j = 1; j < n; ++j) gens.push_back(S.Nhat[j]);
        auto M = validate_monodromy_system(orthant_action(D.W[0], gens, D.Y));
        std::string why;
        for (auto& l : M.report)
            if (!l.pass) why = l.name + ": " + l.witness;
        bool ok = M.valid;
        if (ok && !(face_weight_filtration(M, M.action.sigma.whole()) == D.W[n])) {
            ok = false;
            why = "W(sigma) differs from W^n";
        }
        out.push_back({"(N_1, Nhat_2..Nhat_n) is a monodromy system with W(sigma) = W^n", ok, why});
    }
    // [N_j^{[a]}, Nhat_k] = 0 for j < k, [a] the Y^{j-1}-weight
    {
        bool ok = true;
        std::string why;
        for (int j = 1; j <= n && ok; ++j)
            for (auto& [a, X] : weight_decomposition(D.N[j - 1], ys[j - 1]))
                for (int k = j + 1; k <= n && ok; ++k)
                    if (!commutator(X, S.Nhat[k - 1]).is_zero()) {
                        ok = false;
                        why = "j=" + js(j) + " k=" + js(k) + " a=" + js(a);
                    }
        out.push_back({"[N_j^[a], Nhat_k] = 0 for j < k", ok, why});
    }
    // Y^0 = spl_W(N_1 + sum_{j >= 2} Nhat_j)
    {
        Matrix<Rational> T = D.N[0];
        for (int j = 1; j < n; ++j) T += S.Nhat[j];
        bool ok = false;
        std::string why;
        try {
            auto r = deligne_splitting(D.W[0], T, D.Y);
            ok = r.Y0.Y == ys[0].Y;
            if (!ok) why = "splittings differ";
        } catch (const std::exception& e) { why = e.what(); }
        out.push_back({"Y^0 = spl_W(N_1 + sum Nhat_j)", ok, why});
    }
    // [N_j^{[a]}, Nhat_k^+] = 0 for j <= k unless j = k and a = 0
    {
        bool ok = true;
        std::string why;
        for (int j = 1; j <= n && ok; ++j)
            for (auto& [a, X] : weight_decomposition(D.N[j - 1], ys[j - 1]))
                for (int k = j; k <= n && ok; ++k) {
                    if (j == k && a == 0) continue;
                    if (!commutator(X, S.Nplus[k - 1]).is_zero()) {
                        ok = false;
                        why = "j=" + js(j) + " k=" + js(k) + " a=" + js(a);
                    }
                }
        out.push_back({"[N_j^[a], Nhat_k^+] = 0 unless j = k and a = 0", ok, why});
    }
    return out;
}

// (N_1..N_j, Y^j) with W^0..W^j
inline DeligneSystemData truncate(const DeligneSystemData& D, int j, const std::vector<Splitting<Rational>>& ys) {
    DeligneSystemData T;
    T.dim = D.dim;
    T.W.assign(D.W.begin(), D.W.begin() + j + 1);
    T.N.assign(D.N.begin(), D.N.begin() + j);
    T.Y = ys[j].Y;
    return T;
}

}  // namespace mslab
