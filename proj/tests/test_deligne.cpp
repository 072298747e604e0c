#include <gtest/gtest.h>

#include <mslab/generators.hpp>

#include <random>

#include "oracles.hpp"
#include <set>

using namespace mslab;
using Q = Rational;
using M = Matrix<Q>;
using S = Subspace<Q>;
using Filt = Filtration<Q>;

using namespace oracle;

namespace {

S span(int n, std::vector<std::vector<Q>> vs) { return S::span_vectors(n, vs); }

DeligneSystemData ht2(int a, int b, int c, int d) { return gen::ht2_system(a, b, c, d); }

}  // namespace

TEST(MonodromyFiltration, FrozenExamples) {
    auto M0 = monodromy_filtration(M(3, 3), 0);
    EXPECT_EQ(M0.graded_dim(0), 3);
    EXPECT_EQ(M0.at(-1).dim(), 0);

    auto M3 = monodromy_filtration(jordan({3}), 0);
    std::vector<int> dims;
    for (int k = -2; k <= 2; ++k) dims.push_back(M3.graded_dim(k));
    EXPECT_EQ(dims, (std::vector<int>{1, 0, 1, 0, 1}));

    auto M21 = monodromy_filtration(jordan({2, 1}), 0);
    EXPECT_EQ(M21.graded_dim(-1), 1);
    EXPECT_EQ(M21.graded_dim(0), 1);
    EXPECT_EQ(M21.graded_dim(1), 1);
    EXPECT_EQ(M21.at(-2).dim(), 0);
    EXPECT_EQ(M21.at(1).dim(), 3);
}

TEST(MonodromyFiltration, JordanPartitionOracle) {
    std::mt19937 rng(11);
    std::vector<std::vector<int>> types{{1}, {2}, {4}, {3, 1}, {2, 2}, {3, 2}, {2, 1, 1}, {4, 2, 1}, {5}, {3, 3, 1}};
    for (auto& t : types) {
        M J = jordan(t);
        M g = random_invertible(J.rows(), rng);
        M N = g * J * inverse(g);
        for (int center : {0, 3, -2}) {
            auto Mf = monodromy_filtration(N, center);
            EXPECT_TRUE(verify_monodromy_axioms(N, Mf, center));
            auto want = partition_weights(t);
            for (int k = -6; k <= 6; ++k) {
                int exp = want.count(k) ? want[k] : 0;
                EXPECT_EQ(Mf.graded_dim(center + k), exp) << "type size " << t.size() << " k " << k;
            }
        }
        auto ch = jordan_chains(N);
        std::multiset<int> lens, want_l(t.begin(), t.end());
        for (auto& c : ch) lens.insert(c.length);
        EXPECT_EQ(lens, want_l);
    }
}

TEST(MonodromyFiltration, RejectsNonNilpotent) {
    EXPECT_THROW(monodromy_filtration(M::identity(2), 0), PreconditionError);
}

TEST(RelativeMonodromy, PureCaseAgrees) {
    std::mt19937 rng(5);
    for (int w : {-1, 0, 2}) {
        M J = jordan({3, 1});
        M g = random_invertible(4, rng);
        M N = g * J * inverse(g);
        auto R = relative_monodromy_filtration(N, Filt::pure(4, w));
        ASSERT_TRUE(R);
        EXPECT_EQ(*R, monodromy_filtration(N, w));
    }
}

TEST(RelativeMonodromy, Ht2Example) {
    for (auto [a, b, c, d] : std::vector<std::array<int, 4>>{{1, 1, 2, 3}, {0, 0, 1, 0}, {5, -2, 3, 7}}) {
        auto D = ht2(a, b, c, d);
        auto R = relative_monodromy_filtration(D.N[0], D.W[0]);
        ASSERT_TRUE(R);
        EXPECT_EQ(R->at(-3).dim(), 0);
        EXPECT_EQ(R->at(-2), span(4, {{1, 0, 0, 0}, {0, 1, 0, 0}}));
        EXPECT_EQ(R->at(-1), R->at(-2));
        EXPECT_EQ(R->at(0), S::full(4));
        EXPECT_TRUE(verify_relative_axioms(D.N[0], D.W[0], *R));
        auto bf = brute_force_relative(D.N[0], D.W[0]);
        ASSERT_EQ(bf.size(), 1u);
        EXPECT_EQ(bf[0], *R);
    }
}

TEST(RelativeMonodromy, NotExists) {
    Filt W = Filt::from_steps(2, {{-1, span(2, {{1, 0}})}, {0, S::full(2)}});
    M N{{0, 1}, {0, 0}};
    EXPECT_FALSE(relative_monodromy_filtration(N, W));
    EXPECT_TRUE(brute_force_relative(N, W).empty());
}

TEST(RelativeMonodromy, RejectsNonPreserving) {
    Filt W = Filt::from_steps(2, {{-1, span(2, {{1, 0}})}, {0, S::full(2)}});
    M N{{0, 0}, {1, 0}};
    EXPECT_THROW(relative_monodromy_filtration(N, W), PreconditionError);
}

TEST(RelativeMonodromy, SpliceOfCenteredFiltrations) {
    // instances with a known splitting: split SL(2) systems, W = W^0, N = N_1
    std::mt19937 rng(3);
    for (int t = 0; t < 12; ++t) {
        auto irr = gen::random_irreps(1, 7, rng);
        auto R = gen::representation(irr);
        auto D = gen::split_system(R);
        M g = gen::random_unipotent(D.W[0], rng);
        auto C = gen::conjugate(D, g);
        auto Mf = relative_monodromy_filtration(C.N[0], C.W[0]);
        ASSERT_TRUE(Mf);
        EXPECT_EQ(*Mf, C.W[1]);
    }
}

TEST(RelativeMonodromy, BruteForceOracleRandom) {
    std::mt19937 rng(17);
    std::uniform_int_distribution<int> coin(0, 2), val(-2, 2), wsteps(1, 3);
    int exists = 0, missing = 0;
    for (int t = 0; t < 60; ++t) {
        int n = 2 + t % 4;  // 2..5
        // W from a random weight per coordinate, N strictly upper triangular
        // with respect to a weight-sorted basis
        std::vector<int> wt(n);
        for (int i = 0; i < n; ++i) wt[i] = -wsteps(rng) + 1;
        std::sort(wt.begin(), wt.end());
        std::map<int, S> st;
        for (int k = wt.front(); k <= wt.back(); ++k) {
            std::vector<std::vector<Q>> vs;
            for (int i = 0; i < n; ++i)
                if (wt[i] <= k) {
                    std::vector<Q> e(n);
                    e[i] = 1;
                    vs.push_back(e);
                }
            st[k] = vs.empty() ? S::zero(n) : span(n, vs);
        }
        Filt W0 = Filt::from_steps(n, st);
        M N(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (coin(rng) == 0) N(i, j) = val(rng);
        M g = random_invertible(n, rng);
        M N2 = g * N * inverse(g);
        Filt W = gen::transform(g, W0);
        auto R = relative_monodromy_filtration(N2, W);
        auto bf = brute_force_relative(N2, W);
        EXPECT_LE(bf.size(), 1u);
        if (R) {
            ++exists;
            ASSERT_EQ(bf.size(), 1u) << "trial " << t;
            EXPECT_EQ(bf[0], *R);
        } else {
            ++missing;
            EXPECT_TRUE(bf.empty()) << "trial " << t;
        }
    }
    EXPECT_GT(exists, 5);
    EXPECT_GT(missing, 2);
}

TEST(DeligneSplitting, TrivialN) {
    Filt W = Filt::from_steps(3, {{-1, span(3, {{1, 0, 0}})}, {0, S::full(3)}});
    M Y = M::diagonal({-1, 0, 0});
    auto r = deligne_splitting(W, M(3, 3), Y);
    EXPECT_EQ(r.Y0.Y, Y);
    EXPECT_TRUE(r.delta.m.is_zero());
}

TEST(DeligneSplitting, Ht2FrozenExample) {
    auto D = ht2(1, 1, 2, 3);
    auto r = deligne_splitting(D.W[0], D.N[0], D.Y);
    M Y0 = r.Y0.Y;
    auto ev = [&](std::vector<Q> v, int w) {
        M x = M::column(v);
        EXPECT_EQ(Y0 * x, Q(w) * x) << "weight " << w;
    };
    ev({0, 0, Q(-1, 2), 1}, 0);
    ev({0, 0, 1, 0}, -1);
    ev({Q(1, 2), 1, 0, 0}, -1);
    ev({1, 0, 0, 0}, -2);
    EXPECT_TRUE(splits(Y0, D.W[0]));
    EXPECT_TRUE(commutator(Y0, D.Y).is_zero());
    // delta: gr_0 -> gr_{-2}, e4 -> 5/2 e1
    const auto& dl = r.delta;
    M blk = dl.block(-2, 0);
    ASSERT_EQ(blk.rows(), 1);
    ASSERT_EQ(blk.cols(), 1);
    EXPECT_EQ(blk(0, 0), Q(5, 2));
    EXPECT_TRUE(dl.in_weight(-2));
    M rest = dl.m;
    auto i2 = std::find(dl.weight.begin(), dl.weight.end(), -2) - dl.weight.begin();
    auto i0 = std::find(dl.weight.begin(), dl.weight.end(), 0) - dl.weight.begin();
    rest(i2, i0) = 0;
    EXPECT_TRUE(rest.is_zero());
}

TEST(DeligneSplitting, Ht2GeneralFormula) {
    std::mt19937 rng(23);
    std::uniform_int_distribution<int> d(-9, 9);
    for (int t = 0; t < 40; ++t) {
        int a = d(rng), b = d(rng), c = d(rng), dd = d(rng);
        if (c == 0) c = 4;
        auto D = ht2(a, b, c, dd);
        auto r = deligne_splitting(D.W[0], D.N[0], D.Y);
        EXPECT_EQ(r.delta.block(-2, 0)(0, 0), Q(dd) - Q(a) * Q(b) / Q(c));
        // characterization checked independently
        auto Y0 = r.Y0;
        auto comps = weight_decomposition(D.N[0], Y0);
        EXPECT_TRUE(weight_component(D.N[0], Y0, -1).is_zero());
        M N0 = weight_component(D.N[0], Y0, 0);
        for (auto& [w, X] : comps) {
            if (w >= -1) continue;
            M x = X;
            for (int i = 0; i < -w - 1; ++i) x = commutator(N0, x);
            EXPECT_TRUE(x.is_zero());
        }
    }
}

TEST(DeligneSplitting, RecoverRoundTrip) {
    auto D = ht2(1, 1, 2, 3);
    auto r = deligne_splitting(D.W[0], D.N[0], D.Y);
    M N = recover_N(D.W[0], r.grN, r.Y0, r.delta);
    M want(4, 4);
    want(1, 2) = 2;
    want(0, 2) = 1;
    want(1, 3) = 1;
    want(0, 3) = 3;
    EXPECT_EQ(N, want);
    Filt W = Filt::pure(2, 0);
    GradedMap<Q> z{M(2, 2), {0, 0}};
    EXPECT_TRUE(recover_N(W, z, make_splitting(M(2, 2), {0}), z).is_zero());
}

TEST(DeligneSplitting, RecoverRandomSystems) {
    std::mt19937 rng(29);
    for (int t = 0; t < 10; ++t) {
        auto R = gen::representation(gen::random_irreps(2, 8, rng));
        auto D = gen::perturbed_system(R, rng);
        // one-variable system (W^1, N_2, Y) and (W^0, N_1, Y^1)
        auto ys = descend_splittings(D);
        for (int j = 1; j <= 2; ++j) {
            M g = gen::random_unipotent(D.W[j - 1], rng);
            auto C = gen::conjugate(D, g);
            M Yj = g * ys[j].Y * inverse(g);
            auto r = deligne_splitting(C.W[j - 1], C.N[j - 1], Yj);
            EXPECT_EQ(recover_N(C.W[j - 1], r.grN, r.Y0, r.delta), C.N[j - 1]);
            EXPECT_TRUE(r.delta.in_weight(-2));
        }
    }
}

TEST(DeligneSplitting, Equivariance) {
    std::mt19937 rng(31);
    for (int t = 0; t < 12; ++t) {
        DeligneSystemData D;
        M Y;
        if (t % 3 == 0) {
            std::uniform_int_distribution<int> d(-5, 5);
            int c = d(rng);
            D = ht2(d(rng), d(rng), c == 0 ? 1 : c, d(rng));
            Y = D.Y;
        } else {
            auto R = gen::representation(gen::random_irreps(2, 8, rng));
            D = gen::perturbed_system(R, rng);
            Y = descend_splittings(D)[1].Y;
        }
        auto base = deligne_splitting(D.W[0], D.N[0], Y);
        for (bool unip : {true, false}) {
            M g = unip ? gen::random_unipotent(D.W[0], rng) : gen::random_filtered_automorphism(D.W[0], rng);
            M gi = inverse(g);
            Filt gW = gen::transform(g, D.W[0]);
            auto r = deligne_splitting(gW, g * D.N[0] * gi, g * Y * gi);
            EXPECT_EQ(r.Y0.Y, g * base.Y0.Y * gi);
            // gr(g) in canonical graded coordinates of W and gW
            GradedBasis<Q> B(D.W[0]), Bg(gW);
            M G = Bg.Ainv * g * B.A;
            for (int i = 0; i < G.rows(); ++i)
                for (int j = 0; j < G.cols(); ++j)
                    if (Bg.weight[i] != B.weight[j]) G(i, j) = 0;
            if (unip) EXPECT_EQ(G, M::identity(G.rows()));
            EXPECT_EQ(r.delta.m, G * base.delta.m * inverse(G));
            EXPECT_EQ(r.grN.m, G * base.grN.m * inverse(G));
        }
    }
}

TEST(DeligneSplitting, IndependentOfY) {
    std::mt19937 rng(37);
    std::uniform_int_distribution<int> d(-4, 4);
    for (int t = 0; t < 10; ++t) {
        DeligneSystemData D;
        M Y;
        if (t % 2 == 0) {
            int c = d(rng);
            D = ht2(d(rng), d(rng), c == 0 ? 2 : c, d(rng));
            Y = D.Y;
        } else {
            auto R = gen::representation(gen::random_irreps(2, 8, rng));
            D = gen::perturbed_system(R, rng);
            Y = descend_splittings(D)[1].Y;
        }
        const M& N = D.N[0];
        int n = N.rows();
        auto Ys = make_splitting(Y, integer_spectrum(Y));
        // X of negative Y-weight preserving W and commuting with N; then
        // Y' = (1+X) Y (1+X)^{-1} is another valid splitting
        auto jb = detail::joint_basis(D.W[0], Ys);
        std::vector<std::pair<int, int>> sup;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (jb.yt[i] < jb.yt[j] && jb.wt[i] <= jb.wt[j]) sup.push_back({i, j});
        if (sup.empty()) continue;
        M A(n * n, static_cast<int>(sup.size()));
        M Nt = jb.Pinv * N * jb.P;
        for (std::size_t s = 0; s < sup.size(); ++s) {
            M c = commutator(Nt, M::unit(n, sup[s].first, sup[s].second));
            for (int e = 0; e < n * n; ++e) A(e, s) = c.data()[e];
        }
        M K = kernel(A);
        M x = gen::random_combination(K, rng);
        M X(n, n);
        for (std::size_t s = 0; s < sup.size(); ++s) X(sup[s].first, sup[s].second) = x(s, 0);
        M g = M::identity(n) + jb.P * X * jb.Pinv;
        M Y2 = g * Y * inverse(g);
        auto r1 = deligne_splitting(D.W[0], N, Y);
        auto r2 = deligne_splitting(D.W[0], N, Y2);
        EXPECT_EQ(r1.delta.m, r2.delta.m);
        EXPECT_EQ(r1.grN.m, r2.grN.m);
    }
}

TEST(DeligneSplitting, CompatibleSplittingGivesZeroDelta) {
    std::mt19937 rng(41);
    for (int t = 0; t < 10; ++t) {
        auto R = gen::representation(gen::random_irreps(1, 7, rng));
        auto D = gen::split_system(R);
        M g = gen::random_unipotent(D.W[0], rng);
        auto C = gen::conjugate(D, g);
        auto r = deligne_splitting(C.W[0], C.N[0], C.Y);
        EXPECT_TRUE(r.delta.m.is_zero());
        EXPECT_TRUE(commutator(r.Y0.Y, C.N[0]).is_zero());
        EXPECT_EQ(r.Y0.Y, g * R.Y(0) * inverse(g));
    }
}

TEST(DeligneSplitting, PreconditionErrorsAreDistinct) {
    auto D = ht2(1, 1, 2, 3);
    using K = PreconditionError::Kind;
    auto kind_of = [](auto fn) -> std::optional<K> {
        try {
            fn();
        } catch (const PreconditionError& e) {
            return e.kind;
        }
        return std::nullopt;
    };
    Filt W = Filt::from_steps(2, {{-1, span(2, {{1, 0}})}, {0, S::full(2)}});
    EXPECT_EQ(kind_of([&] { deligne_splitting(W, M{{0, 1}, {0, 0}}, M::diagonal({-1, 0})); }), K::NoRelativeFiltration);
    EXPECT_EQ(kind_of([&] { deligne_splitting(D.W[0], D.N[0], M::diagonal({-2, 0, -2, 0})); }), K::NotASplitting);
    EXPECT_EQ(kind_of([&] { deligne_splitting(D.W[0], D.N[0], M::diagonal({-4, -4, 0, 0})); }), K::NotASplitting);
    EXPECT_EQ(kind_of([&] { deligne_splitting(D.W[0], M::identity(4), D.Y); }), K::NotNilpotent);
    // Y splits M(N) but N has mixed Y-weights
    M P{{1, 1, 0}, {0, 1, 0}, {0, 0, 1}};
    M Yb = P * M::diagonal({-2, 0, 2}) * inverse(P);
    EXPECT_EQ(kind_of([&] { deligne_splitting(Filt::pure(3, 0), jordan({3}), Yb); }), K::WeightCondition);
}

TEST(DeligneSystem, ValidateAndDescendHt2) {
    auto D = ht2(1, 1, 2, 3);
    EXPECT_TRUE(all_pass(validate_deligne_data(D)));
    auto ys = descend_splittings(D);
    ASSERT_EQ(ys.size(), 2u);
    EXPECT_EQ(ys[1].Y, D.Y);
    EXPECT_EQ(ys[0].Y, deligne_splitting(D.W[0], D.N[0], D.Y).Y0.Y);
    auto bad = D;
    bad.N[0](0, 0) = 1;
    EXPECT_FALSE(all_pass(validate_deligne_data(bad)));
}

TEST(DeligneSystem, SplitSystemsDescendToRepresentationGradings) {
    std::mt19937 rng(43);
    for (int t = 0; t < 12; ++t) {
        int n = 1 + t % 3;
        auto R = gen::representation(gen::random_irreps(n, 9, rng));
        auto D = gen::split_system(R);
        ASSERT_TRUE(all_pass(validate_deligne_data(D)));
        auto ys = descend_splittings(D);
        for (int j = 0; j <= n; ++j) EXPECT_EQ(ys[j].Y, R.Y(j));
    }
}

TEST(DeligneSystem, PerturbedSystemsDescendToRepresentationGradings) {
    std::mt19937 rng(47);
    int nontrivial = 0;
    for (int t = 0; t < 16; ++t) {
        int n = 1 + t % 3;
        auto R = gen::representation(gen::random_irreps(n, 9, rng));
        auto D = gen::perturbed_system(R, rng);
        for (int j = 0; j < n; ++j) nontrivial += D.N[j] != R.E[j];
        auto chk = validate_deligne_data(D);
        for (auto& c : chk) EXPECT_TRUE(c.pass) << c.name << " " << c.witness;
        auto ys = descend_splittings(D);
        for (int j = 0; j <= n; ++j) EXPECT_EQ(ys[j].Y, R.Y(j));
        // and after conjugation by g in 1 + W^0_{-1}End
        M g = gen::random_unipotent(D.W[0], rng);
        auto C = gen::conjugate(D, g);
        auto yc = descend_splittings(C);
        for (int j = 0; j <= n; ++j) EXPECT_EQ(yc[j].Y, g * R.Y(j) * inverse(g));
    }
    EXPECT_GT(nontrivial, 3);
}

TEST(Sl2Structure, Sym1) {
    DeligneSystemData D;
    D.dim = 2;
    D.W = {Filt::pure(2, 0), Filt::from_steps(2, {{-1, span(2, {{1, 0}})}, {1, S::full(2)}})};
    D.N = {M{{0, 1}, {0, 0}}};
    D.Y = M::diagonal({-1, 1});
    ASSERT_TRUE(all_pass(validate_deligne_data(D)));
    auto s = sl2_structure(D);
    EXPECT_EQ(s.Nhat[0], D.N[0]);
    EXPECT_EQ(s.Nplus[0], (M{{0, 0}, {1, 0}}));
}

TEST(Sl2Structure, Ht2Lowering) {
    for (auto [a, b, c, d] : std::vector<std::array<int, 4>>{{1, 1, 2, 3}, {3, -1, 5, 2}}) {
        auto D = ht2(a, b, c, d);
        auto s = sl2_structure(D);
        M E = s.Nhat[0];
        M e3 = M::column({0, 0, 1, 0});
        M v = M::column({0, 0, -Q(a) / Q(c), 1});
        EXPECT_EQ(E * e3, Q(c) * M::column({Q(b) / Q(c), 1, 0, 0}));
        EXPECT_TRUE((E * v).is_zero());
    }
}

TEST(Sl2Structure, SplitProductOfSym1) {
    auto R = gen::representation({{0, {1, 1}}});
    auto D = gen::split_system(R);
    auto s = sl2_structure(D);
    EXPECT_EQ(s.Nhat[0], R.E[0]);
    EXPECT_EQ(s.Nhat[1], R.E[1]);
    for (int j = 0; j < 2; ++j) EXPECT_EQ(s.H[j], R.Y(j + 1) - R.Y(j));
}

TEST(Sl2Structure, PerturbedSystemsRecoverLoweringOperators) {
    std::mt19937 rng(53);
    for (int t = 0; t < 10; ++t) {
        int n = 1 + t % 3;
        auto R = gen::representation(gen::random_irreps(n, 9, rng));
        auto D = gen::perturbed_system(R, rng);
        auto s = sl2_structure(D);
        for (int j = 0; j < n; ++j) EXPECT_EQ(s.Nhat[j], R.E[j]);
        for (auto& l : sl2n_relations(s)) EXPECT_TRUE(l.pass) << l.name;
    }
}
