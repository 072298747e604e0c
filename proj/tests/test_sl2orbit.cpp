#include <gtest/gtest.h>

#include <mslab/instances.hpp>

#include <random>

#include "oracles.hpp"

using namespace mslab;
using Q = Rational;

using namespace oracle;

namespace {

std::string failures(const std::vector<CheckLine>& c) {
    std::string s;
    for (auto& l : c)
        if (!l.pass) s += l.name + " [" + l.witness + "]; ";
    return s;
}

// delta block Hom(gr_0, gr_{-2}) of the height systems
Q corner(const ExpansionReport& R, int m) {
    int n = static_cast<int>(R.graded_weights.size());
    return GradedMap<Rational>{coefficient_or_zero(R.delta, m, n), R.graded_weights}.block(-2, 0)(0, 0);
}

OneVarSystem heights(Q a, Q b, Q c, Q d, Q ap, Q bp, Q cp, Q dp) {
    auto H = gen::ht2_system(a, b, c, d);
    return one_var_system(H.W[0], H.N[0], ht_operator(ap, bp, cp, dp), H.Y);
}

Matrix<Rational> sample_vec(int k, std::mt19937& rng) {
    Matrix<Rational> v(k, 1);
    for (int i = 0; i < k; ++i) v(i, 0) = static_cast<int>(rng() % 7) - 3;
    return v;
}

}  // namespace

TEST(OneVar, HeightsClosedFormUnitSlope) {
    auto R = one_var_expansion(heights(1, 1, 1, 1, 0, 0, 1, 0), 8);
    EXPECT_TRUE(R.pass()) << failures(R.checks);
    EXPECT_EQ(corner(R, -1), Q(0));
    EXPECT_EQ(corner(R, 0), Q(1));
    EXPECT_EQ(corner(R, 1), Q(-1));
    EXPECT_EQ(corner(R, 2), Q(1));
    for (int m = -1; m <= 8; ++m) EXPECT_EQ(corner(R, m), closed_form(1, 1, 1, 1, 0, 0, 1, 0, m)) << m;
}

TEST(OneVar, HeightsSlopeFiveHalves) {
    auto R = one_var_expansion(heights(1, 1, 2, 3, 0, 0, 1, 0), 8);
    EXPECT_TRUE(R.pass()) << failures(R.checks);
    EXPECT_EQ(corner(R, -1), Q(5, 2));
    EXPECT_EQ(corner(R, 0), Q(1, 4));
    EXPECT_EQ(corner(R, 1), Q(-1, 8));
    EXPECT_EQ(corner(R, 2), Q(1, 16));
    auto B = verify_twisted_weight_bounds(R);
    EXPECT_TRUE(all_pass(B)) << failures(B);
    int n = 4;
    EXPECT_EQ(coefficient_or_zero(R.delta_twisted, 0, n), R.delta_limit);
    EXPECT_EQ(GradedMap<Rational>({R.delta_limit, R.graded_weights}).block(-2, 0)(0, 0), Q(5, 2));
}

TEST(OneVar, HeightsMatchClosedFormOnGrid) {
    std::mt19937 rng(11);
    for (int t = 0; t < 12; ++t) {
        Q a = static_cast<int>(rng() % 7) - 3, b = static_cast<int>(rng() % 7) - 3, c = 1 + static_cast<int>(rng() % 4),
          d = static_cast<int>(rng() % 7) - 3;
        Q ap = static_cast<int>(rng() % 7) - 3, bp = static_cast<int>(rng() % 7) - 3, cp = 1 + static_cast<int>(rng() % 4),
          dp = static_cast<int>(rng() % 7) - 3;
        auto R = one_var_expansion(heights(a, b, c, d, ap, bp, cp, dp), 6);
        ASSERT_TRUE(R.pass()) << failures(R.checks);
        for (int m = -1; m <= 6; ++m) EXPECT_EQ(corner(R, m), closed_form(a, b, c, d, ap, bp, cp, dp, m));
    }
}

TEST(OneVar, ZeroSecondOperator) {
    auto H = gen::ht2_system(1, 2, 3, 4);
    auto S = one_var_system(H.W[0], H.N[0], Matrix<Rational>(4, 4), H.Y);
    auto R = one_var_expansion(S, 6);
    EXPECT_TRUE(R.pass()) << failures(R.checks);
    for (auto& [m, X] : R.u) EXPECT_EQ(X, m == 0 ? Matrix<Rational>::identity(4) : Matrix<Rational>(4, 4));
    for (auto& [m, X] : R.delta) EXPECT_EQ(X, m == -1 ? R.delta_limit : Matrix<Rational>(4, 4)) << m;
}

TEST(OneVar, SplitFirstOperatorHasNoSlope) {
    auto R = gen::representation({{0, {1, 1}}, {-1, {2, 0}}});
    auto S = one_var_system(gen::split_system(R));
    auto E = one_var_expansion(S, 6);
    EXPECT_TRUE(E.pass()) << failures(E.checks);
    EXPECT_TRUE(E.delta_limit.is_zero());
    for (auto& [m, X] : E.u) EXPECT_EQ(X, m == 0 ? Matrix<Rational>::identity(R.dim) : Matrix<Rational>(R.dim, R.dim));
    for (auto& [m, X] : E.u_twisted) EXPECT_EQ(m, 0);
}

TEST(OneVar, InvalidSystemRejected) {
    auto H = gen::ht2_system(1, 1, 1, 1);
    Matrix<Rational> N2 = Matrix<Rational>::unit(4, 2, 0);  // raises W
    EXPECT_THROW(one_var_system(H.W[0], H.N[0], N2, H.Y), std::invalid_argument);
}

TEST(OneVar, GeneratedInstancesVerify) {
    auto xs = inst::one_var_instances(16, 5, 6);
    ASSERT_GE(xs.size(), 16u);
    for (auto& x : xs) {
        auto R = one_var_expansion(x.system, 6);
        EXPECT_TRUE(R.pass()) << x.label << ": " << failures(R.checks);
        auto B = verify_twisted_weight_bounds(R);
        EXPECT_TRUE(all_pass(B)) << x.label << ": " << failures(B);
        auto I = two_variable_identities(x.system);
        EXPECT_TRUE(all_pass(I)) << x.label << ": " << failures(I);
    }
}

TEST(OneVar, ScaleCovariance) {
    auto xs = inst::one_var_instances(6, 17, 6);
    for (auto& x : xs) {
        Q lam(3, 2);
        auto A = one_var_expansion(x.system, 5);
        auto S2 = one_var_system(x.system.W(), lam * x.system.N1(), x.system.N2(), x.system.D.Y);
        auto B = one_var_expansion(S2, 5);
        for (int m = -1; m <= 5; ++m) {
            Q f = 1;
            for (int i = 0; i < std::abs(m); ++i) f *= m > 0 ? lam.inverse() : lam;
            int n = x.system.W().ambient();
            if (m >= 0) EXPECT_EQ(coefficient_or_zero(B.u, m, n), f * coefficient_or_zero(A.u, m, n)) << x.label << " m=" << m;
            EXPECT_EQ(coefficient_or_zero(B.delta, m, n), f * coefficient_or_zero(A.delta, m, n)) << x.label << " m=" << m;
        }
    }
}

TEST(OneVar, TwistedBoundsDetectViolation) {
    auto R = one_var_expansion(heights(1, 1, 2, 3, 0, 0, 1, 0), 6);
    // a fake coefficient with a large weight must be reported
    R.u_twisted[1] = R.twist_grading * Matrix<Rational>(4, 4) + Matrix<Rational>::unit(4, 0, 3);
    auto B = verify_twisted_weight_bounds(R);
    EXPECT_FALSE(all_pass(B));
}

TEST(Mild, DeltaTaylorAndStarredFormOnInstances) {
    auto xs = inst::mild_instances(9, 23, 6);
    ASSERT_GE(xs.size(), 9u);
    for (auto& x : xs) {
        auto R = mild_one_var(x.system, 6);
        EXPECT_TRUE(R.pass()) << x.label << ": " << failures(R.checks);
    }
}

TEST(Mild, ZeroFirstOperator) {
    auto H = gen::ht2_system(0, 0, 1, 0);
    auto S = one_var_system(H.W[0], Matrix<Rational>(4, 4), ht_operator(1, 2, 1, 4), H.Y);
    auto R = mild_one_var(S, 5);
    EXPECT_TRUE(R.pass()) << failures(R.checks);
    // delta(N_2) constant
    for (auto& [m, X] : R.delta) EXPECT_TRUE(m == 0 || X.is_zero()) << m;
    EXPECT_EQ(corner(R, 0), Q(4) - Q(2));
}

TEST(Mild, NonSplitRejected) {
    auto S = heights(1, 1, 2, 3, 0, 0, 1, 0);
    EXPECT_FALSE(compatible_splitting(S.W(), S.N1()).has_value());
    EXPECT_THROW(mild_one_var(S, 4), std::invalid_argument);
}

TEST(Mild, CompatibleSplittingIsASplitting) {
    auto H = gen::ht2_system(1, 2, 2, 1);
    auto Y = compatible_splitting(H.W[0], H.N[0]);
    ASSERT_TRUE(Y.has_value());
    EXPECT_TRUE(splits(*Y, H.W[0]));
    EXPECT_TRUE(commutator(*Y, H.N[0]).is_zero());
}

// ---------------------------------------------------------------------------

namespace {

// span{E^i v : v in ker F with H-weight <= k}
Subspace<Rational> highest_weight_oracle(const Sl2Triple& T, int k) {
    int d = T.H.rows();
    std::vector<std::vector<Rational>> vs;
    Matrix<Rational> I = Matrix<Rational>::identity(d);
    for (int w = 0; w <= k; ++w) {
        Matrix<Rational> A = T.F.vcat(T.H - Rational(w) * I);
        Matrix<Rational> K = kernel(A);
        for (int c = 0; c < K.cols(); ++c) {
            Matrix<Rational> v = K.cols_subset({c});
            for (int i = 0; i <= d; ++i) {
                vs.push_back(v.col(0));
                v = T.E * v;
            }
        }
    }
    return Subspace<Rational>::span_vectors(d, vs);
}

Sl2Triple triple_of(const gen::Sl2nRep& R) {
    Matrix<Rational> H = R.Y(1) - R.Y(0);
    return {H, R.E[0], complete_triple(H, R.E[0])};
}

}  // namespace

TEST(Isotypic, TrivialRepresentation) {
    Sl2Triple T{Matrix<Rational>(3, 3), Matrix<Rational>(3, 3), Matrix<Rational>(3, 3)};
    EXPECT_TRUE(isotypic_filtration(T, 0).is_full());
}

TEST(Isotypic, SymOnePlusSymThree) {
    auto R = gen::representation({{0, {1}}, {0, {3}}});
    auto T = triple_of(R);
    auto f1 = isotypic_filtration(T, 1);
    EXPECT_EQ(f1.dim(), 2);
    EXPECT_EQ(f1, Subspace<Rational>::span_vectors(6, {{1, 0, 0, 0, 0, 0}, {0, 1, 0, 0, 0, 0}}));
    EXPECT_TRUE(isotypic_filtration(T, 0).is_zero());
    EXPECT_EQ(isotypic_filtration(T, 2), f1);
    EXPECT_TRUE(isotypic_filtration(T, 3).is_full());
    for (int k = 0; k <= 4; ++k) EXPECT_EQ(isotypic_filtration(T, k), highest_weight_oracle(T, k)) << k;
}

TEST(Isotypic, AdjointOfSymOneIsScalarsAtZero) {
    auto R = gen::representation({{0, {1}}});
    auto T = triple_of(R);
    auto f0 = isotypic_filtration_end(T, 0);
    EXPECT_EQ(f0.dim(), 1);
    EXPECT_TRUE(f0.contains(flatten(Matrix<Rational>::identity(2))));
    EXPECT_TRUE(isotypic_filtration_end(T, 2).is_full());
}

TEST(Isotypic, RelationsRequired) {
    Sl2Triple T{Matrix<Rational>::diagonal({1, -1}), Matrix<Rational>::unit(2, 1, 0), Matrix<Rational>::unit(2, 1, 0)};
    EXPECT_THROW(isotypic_filtration(T, 0), std::invalid_argument);
}

TEST(Isotypic, PropertiesOnRandomRepresentations) {
    std::mt19937 rng(9);
    for (int t = 0; t < 8; ++t) {
        auto R = gen::representation(gen::random_irreps(1, 5, rng, 3, 0));
        auto T = triple_of(R);
        int d = R.dim;
        auto kerEF = Subspace<Rational>::span_columns(kernel(T.E.vcat(T.F)));
        EXPECT_EQ(isotypic_filtration(T, 0), kerEF);
        auto A = adjoint_triple(T);
        auto kerA = Subspace<Rational>::span_columns(kernel(A.E.vcat(A.F)));
        EXPECT_EQ(isotypic_filtration_end(T, 0), kerA);
        for (int k = 0; k <= 4; ++k) {
            EXPECT_EQ(isotypic_filtration(T, k), highest_weight_oracle(T, k));
            // H-weights of fil_k lie in [-k, k]
            auto fk = isotypic_filtration_end(T, k);
            auto Hs = semisimple_splitting(A.H);
            for (int w : Hs.spectrum) {
                if (std::abs(w) <= k) continue;
                EXPECT_TRUE((Hs.projection(w) * fk.basis()).is_zero()) << "k=" << k << " w=" << w;
            }
        }
        // fil_k . fil_k' in fil_{k+k'} under composition
        for (int k = 0; k <= 2; ++k)
            for (int kp = 0; kp <= 2; ++kp) {
                auto fk = isotypic_filtration_end(T, k), fkp = isotypic_filtration_end(T, kp);
                auto target = isotypic_filtration_end(T, k + kp);
                for (int s = 0; s < 3 && fk.dim() && fkp.dim(); ++s) {
                    Matrix<Rational> X = unflatten((fk.basis() * sample_vec(fk.dim(), rng)).col(0), d);
                    Matrix<Rational> Y = unflatten((fkp.basis() * sample_vec(fkp.dim(), rng)).col(0), d);
                    EXPECT_TRUE(target.contains(flatten(X * Y)));
                }
            }
    }
}

// ---------------------------------------------------------------------------

TEST(TorusTwist, OneStepIsTheSum) {
    auto H = gen::ht2_system(1, 1, 1, 1);
    ConeAction A = orthant_action(H.W[0], {H.N[0], ht_operator(0, 1, 2, 0)}, H.Y);
    auto M = validate_monodromy_system(A);
    ASSERT_TRUE(M.valid);
    FaceBase psi;
    psi.sigma = Cone::orthant(2);
    psi.flag = {Face{}, Face{0, 1}};
    psi.elems = {{Vec{1, 1}, Vec{1, 2}}};
    auto ctx = twist_context(M, psi, inst::point_in_base(psi, {{1, Q(1, 2)}}));
    auto T = torus_twist(ctx);
    EXPECT_TRUE(T.denominator_free);
    EXPECT_EQ(T.Ny.nvars, 1);
    // N_y = N_{1,1} + z N_{1,2}
    Matrix<Rational> N11 = H.N[0] + ht_operator(0, 1, 2, 0), N12 = H.N[0] + Q(2) * ht_operator(0, 1, 2, 0);
    EXPECT_EQ(T.Ny.evaluate({Q(7)}, Matrix<Rational>(4, 4)), N11 + Q(7) * N12);
}

TEST(TorusTwist, HeightsTwoStepsMatchesGradedConjugation) {
    auto S = heights(1, 1, 2, 3, 1, -1, 1, 2);
    ConeAction A = orthant_action(S.W(), {S.N1(), S.N2()}, S.D.Y);
    auto M = validate_monodromy_system(A);
    auto psi = inst::base_one_one();
    auto ctx = twist_context(M, psi, inst::point_in_base(psi, {{1}, {1}}));
    auto T = torus_twist(ctx);
    EXPECT_TRUE(T.denominator_free);
    // oracle: N_1 + sum_r s^r M^{(-r)}
    MultiPoly<Matrix<Rational>> want;
    want.nvars = 1;
    want.add({0}, S.N1());
    for (auto& [a, c] : weight_decomposition(S.N2(), S.ys[1])) want.add({-a}, c);
    EXPECT_EQ(T.Ny.terms, want.terms);
    EXPECT_EQ(T.Ny.evaluate(encasement_values(ctx), Matrix<Rational>(4, 4)), twist_limit(ctx));
}

TEST(TorusTwist, GeneratedTwoStepInstances) {
    for (auto& x : inst::two_step_instances(8, 31)) {
        EXPECT_TRUE(all_pass(twist_conditions(x.ctx))) << x.label << ": " << failures(twist_conditions(x.ctx));
        auto T = torus_twist(x.ctx);
        EXPECT_TRUE(T.denominator_free) << x.label;
        int n = x.ctx.D.dim;
        EXPECT_EQ(T.Ny.evaluate(encasement_values(x.ctx), Matrix<Rational>(n, n)), twist_limit(x.ctx)) << x.label;
    }
}

TEST(TorusTwist, ThreeSteps) {
    auto xs = inst::three_step_instances(6, 13);
    ASSERT_GE(xs.size(), 6u);
    for (auto& x : xs) {
        EXPECT_TRUE(all_pass(twist_conditions(x.ctx))) << x.label;
        auto T = torus_twist(x.ctx);
        EXPECT_TRUE(T.denominator_free) << x.label;
        EXPECT_EQ(T.Ny.nvars, 2);
        int n = x.ctx.D.dim;
        EXPECT_EQ(T.Ny.evaluate(encasement_values(x.ctx), Matrix<Rational>(n, n)), twist_limit(x.ctx)) << x.label;
    }
}

TEST(TorusTwist, WrongGradingReportsNegativePowers) {
    auto S = heights(1, 1, 2, 3, 1, -1, 1, 2);
    auto M = validate_monodromy_system(orthant_action(S.W(), {S.N1(), S.N2()}, S.D.Y));
    auto psi = inst::base_one_one();
    auto ctx = twist_context(M, psi, inst::point_in_base(psi, {{1}, {1}}));
    // Y^0 in place of Y^1 breaks the weight condition on N_1
    auto bad = with_gradings(ctx, {S.ys[0].Y});
    EXPECT_FALSE(all_pass(twist_conditions(bad)));
    auto T = torus_twist(bad);
    EXPECT_FALSE(T.denominator_free);
    EXPECT_FALSE(T.offending.empty());
}

// ---------------------------------------------------------------------------

TEST(MultiVar, OneElementPerStepReducesToOneVariable) {
    auto S = heights(1, 1, 2, 3, 1, -1, 1, 2);
    auto M = validate_monodromy_system(orthant_action(S.W(), {S.N1(), S.N2()}, S.D.Y));
    auto psi = inst::base_one_one();
    auto ctx = twist_context(M, psi, inst::point_in_base(psi, {{1}, {1}}));
    auto MR = multi_var_expansion(ctx, 4);
    EXPECT_TRUE(MR.pass()) << failures(MR.checks) << failures(MR.expansions[0].checks);
    ASSERT_EQ(MR.expansions.size(), 1u);
    auto R = one_var_expansion(S, 4);
    EXPECT_EQ(MR.expansions[0].u, R.u);
    EXPECT_EQ(MR.expansions[0].delta, R.delta);
}

TEST(MultiVar, HeightsExtraRayConstantTerm) {
    // N_{1,1} = H(1,1,1,1), N_{1,2} = H(2,0,1,-1), N_{2,1} = H(0,1,3,2)
    auto H = gen::ht2_system(0, 0, 1, 0);
    std::vector<Matrix<Rational>> ops{ht_operator(1, 1, 1, 1), ht_operator(2, 0, 1, -1), ht_operator(0, 1, 3, 2)};
    auto M = validate_monodromy_system(orthant_action(H.W[0], ops, H.Y));
    ASSERT_TRUE(M.valid);
    auto psi = inst::base_two_one();
    Q c12(1, 2);
    auto ctx = twist_context(M, psi, inst::point_in_base(psi, {{1, c12}, {1}}));
    auto MR = multi_var_expansion(ctx, 4);
    EXPECT_TRUE(MR.pass()) << failures(MR.checks);
    for (auto& e : MR.expansions) EXPECT_TRUE(e.pass()) << e.statement << ": " << failures(e.checks);
    // psi elements: e1+e2 and e1+2e2, so N_1(alpha) = (1+alpha) op0 + (1+2 alpha) op1
    for (std::size_t i = 0; i < MR.samples.size(); ++i) {
        Q al = MR.samples[i][0][1];
        Q p = 1 + al, q = 1 + 2 * al;
        Q a = p * 1 + q * 2, b = p * 1 + q * 0, c = p * 1 + q * 1, d = p * 1 + q * -1;
        EXPECT_EQ(corner(MR.expansions[i], -1), d - a * b / c) << i;
    }
}

TEST(MultiVar, GeneratedInstances) {
    auto xs = inst::two_step_instances(8, 41);
    ASSERT_GE(xs.size(), 8u);
    int starred = 0;
    for (auto& x : xs) {
        auto MR = multi_var_expansion(x.ctx, 4);
        EXPECT_TRUE(all_pass(MR.checks)) << x.label << ": " << failures(MR.checks);
        for (auto& e : MR.expansions) EXPECT_TRUE(e.pass()) << x.label << " " << e.statement << ": " << failures(e.checks);
        starred += MR.starred_applicable;
    }
    EXPECT_GT(starred, 0);
}

TEST(MultiVar, RequiresTwoSteps) {
    auto H = gen::ht2_system(1, 1, 1, 1);
    auto M = validate_monodromy_system(orthant_action(H.W[0], {H.N[0], ht_operator(0, 1, 2, 0)}, H.Y));
    FaceBase psi;
    psi.sigma = Cone::orthant(2);
    psi.flag = {Face{}, Face{0, 1}};
    psi.elems = {{Vec{1, 1}, Vec{1, 2}}};
    auto ctx = twist_context(M, psi, inst::point_in_base(psi, {{1, 1}}));
    EXPECT_THROW(multi_var_expansion(ctx, 3), std::invalid_argument);
}
