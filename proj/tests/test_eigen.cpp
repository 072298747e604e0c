#include <gtest/gtest.h>

#include "mslab/instances.hpp"

#include "oracles.hpp"

using namespace mslab;

using oracle::joint_eigenspaces;
using oracle::in_some;

namespace {

using M = Matrix<Rational>;
using V = std::vector<Rational>;

M mat(std::initializer_list<std::initializer_list<int>> rows) {
    int r = static_cast<int>(rows.size()), c = static_cast<int>(rows.begin()->size());
    M m(r, c);
    int i = 0;
    for (auto& row : rows) {
        int j = 0;
        for (int x : row) m(i, j++) = x;
        ++i;
    }
    return m;
}

V e(int n, int i) {
    V v(n);
    v[i] = 1;
    return v;
}

// Joint eigenspaces enumerated over all pairs of rational eigenvalues.
std::string failing(const EigenReport& r) {
    std::string s;
    for (auto& c : r.checks)
        if (!c.pass) s += c.name + " [" + c.witness + "]; ";
    return s;
}

std::string failing(const std::vector<CheckLine>& cs) {
    std::string s;
    for (auto& c : cs)
        if (!c.pass) s += c.name + " [" + c.witness + "]; ";
    return s;
}

}  // namespace

TEST(CommonEigenvector, UnipotentAgainstIdentity) {
    QuadraticRelation R{1, -2, 0, 1, mat({{1, 1}, {0, 1}}), M::identity(2)};
    ASSERT_TRUE(R.holds());
    auto rep = common_eigenvector_report(R, EigenCase::I);
    EXPECT_TRUE(rep.pass()) << failing(rep);
    EXPECT_EQ(rep.v, e(2, 0));
    EXPECT_EQ(rep.lambda, Rational(1));
    EXPECT_EQ(rep.mu, Rational(1));
    EXPECT_EQ(rep.nil_index, 2);
}

TEST(CommonEigenvector, NonSquareLeadingCoefficientIsRescaled) {
    QuadraticRelation R{2, -4, 0, 2, mat({{1, 1}, {0, 1}}), M::identity(2)};
    auto rep = common_eigenvector_report(R, EigenCase::I);
    EXPECT_TRUE(rep.pass()) << failing(rep);
    EXPECT_EQ(rep.scale, Rational(2));
    EXPECT_EQ(rep.v, e(2, 0));
}

TEST(CommonEigenvector, EqualNilpotentOperators) {
    M N = mat({{0, 1, 0}, {0, 0, 1}, {0, 0, 0}});
    QuadraticRelation R{1, -2, 0, 1, N, N};
    auto rep = common_eigenvector_report(R, EigenCase::I);
    EXPECT_TRUE(rep.pass()) << failing(rep);
    EXPECT_TRUE(rep.Y.is_zero());
    EXPECT_EQ(rep.v, e(3, 0));
}

TEST(CommonEigenvector, ZeroLeadingCoefficient) {
    // A = t^2 d/dt, B = t on Q[t]/t^3: Y^2 - [X, Y] = 0 read as (0, -1, 1, 1)
    M X = mat({{0, 0, 0}, {0, 0, 0}, {0, 1, 0}});
    M Y = mat({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
    QuadraticRelation R{0, -1, 1, 1, X, Y};
    ASSERT_TRUE(R.holds());
    auto rep = common_eigenvector_report(R, EigenCase::I);
    EXPECT_TRUE(rep.pass()) << failing(rep);
    EXPECT_EQ(rep.alpha, Rational(0));
    EXPECT_EQ(rep.v, e(3, 2));
}

TEST(CommonEigenvector, AnticommutingSingular) {
    QuadraticRelation R{0, 1, 1, 0, mat({{0, 0}, {0, 1}}), mat({{3, 0}, {0, 0}})};
    ASSERT_TRUE(R.holds());
    auto rep = common_eigenvector_report(R, EigenCase::II);
    EXPECT_TRUE(rep.pass()) << failing(rep);
    EXPECT_EQ(rep.v, e(2, 0));
    EXPECT_EQ(rep.lambda, Rational(0));
    EXPECT_EQ(rep.mu, Rational(3));
    EXPECT_TRUE(in_some(joint_eigenspaces(R.A, R.B), rep.v));
}

TEST(CommonEigenvector, SwappedCase) {
    QuadraticRelation R{0, 1, 1, 0, mat({{3, 0}, {0, 0}}), mat({{0, 0}, {0, 1}})};
    auto rep = common_eigenvector_report(R, EigenCase::III);
    EXPECT_TRUE(rep.pass()) << failing(rep);
    EXPECT_EQ(rep.v, e(2, 0));
    EXPECT_EQ(rep.lambda, Rational(3));
    EXPECT_EQ(rep.mu, Rational(0));
}

TEST(CommonEigenvector, HypothesisClausesDistinguished) {
    M A = mat({{1, 1}, {0, 1}}), I = M::identity(2);
    auto clause = [](const QuadraticRelation& R, EigenCase k) {
        try {
            common_eigenvector(R, k);
        } catch (const HypothesisError& e) {
            return e.clause;
        }
        return std::string("none");
    };
    // (A - I)^2 = 0 expanded with b = c is excluded from case i
    EXPECT_EQ(clause({1, -1, -1, 1, A, I}, EigenCase::I), "b != c");
    EXPECT_EQ(clause({0, 0, 0, 0, A, I}, EigenCase::I), "b != c");
    EXPECT_EQ(clause({0, 1, -1, 0, I, I}, EigenCase::I), "a != 0 or d != 0");
    M Z = M(2, 2);
    EXPECT_EQ(clause({1, 0, 0, 1, Z, Z}, EigenCase::I), "4ad = (b+c)^2");
    EXPECT_EQ(clause({0, 1, 0, 0, I, Z}, EigenCase::II), "A not invertible");
    EXPECT_EQ(clause({1, 0, 0, 0, Z, I}, EigenCase::II), "b != 0");
    EXPECT_EQ(clause({0, 1, 0, 0, Z, Z}, EigenCase::II), "none");
    EXPECT_EQ(clause({0, 1, 0, 1, Z, Z}, EigenCase::II), "d = 0");
    EXPECT_EQ(clause({0, 0, 1, 0, Z, I}, EigenCase::III), "B not invertible");
    EXPECT_EQ(clause({0, 1, 0, 0, I, Z}, EigenCase::III), "c != 0");
    EXPECT_EQ(clause({1, 0, 1, 0, Z, Z}, EigenCase::III), "a = 0");
}

TEST(CommonEigenvector, RelationFailureRejected) {
    QuadraticRelation R{1, -2, 0, 1, mat({{1, 1}, {0, 2}}), M::identity(2)};
    EXPECT_THROW(common_eigenvector(R, EigenCase::I), RelationError);
}

TEST(CommonEigenvector, IrrationalSpectrumRejected) {
    QuadraticRelation R{0, 1, 0, 0, M(2, 2), mat({{0, -1}, {1, 0}})};
    EXPECT_THROW(common_eigenvector(R, EigenCase::II), SplittingFieldError);
}

class GeneratedEigen : public ::testing::TestWithParam<EigenCase> {};

TEST_P(GeneratedEigen, PostVerifiesAgainstJointEigenspaces) {
    auto insts = inst::eigen_instances(GetParam(), 25, 1234);
    ASSERT_EQ(insts.size(), 25u);
    for (auto& in : insts) {
        ASSERT_LE(in.R.A.rows(), 6);
        auto rep = common_eigenvector_report(in.R, in.which);
        EXPECT_TRUE(rep.pass()) << in.label << ": " << failing(rep);
        EXPECT_TRUE(in_some(joint_eigenspaces(in.R.A, in.R.B), rep.v)) << in.label;
        if (in.which == EigenCase::I) {
            EXPECT_GE(rep.nil_index, 0) << in.label;
            EXPECT_TRUE((rep.X * rep.Y - rep.Y * rep.X) == rep.Y * rep.Y) << in.label;
        }
        if (in.which == EigenCase::II) EXPECT_EQ(rep.lambda, Rational(0)) << in.label;
        if (in.which == EigenCase::III) EXPECT_EQ(rep.mu, Rational(0)) << in.label;
    }
}

INSTANTIATE_TEST_SUITE_P(Cases, GeneratedEigen, ::testing::Values(EigenCase::I, EigenCase::II, EigenCase::III),
                         [](const auto& info) { return "case_" + case_name(info.param); });

TEST(GeneratedEigen, CaseOneCoversRescaleAndZeroAlpha) {
    int rescaled = 0, zero_alpha = 0, nontrivial_y = 0;
    for (auto& in : inst::eigen_instances(EigenCase::I, 25, 1234)) {
        auto rep = common_eigenvector_report(in.R, EigenCase::I);
        rescaled += rep.scale != Rational(1);
        zero_alpha += rep.alpha.is_zero();
        nontrivial_y += rep.nil_index > 1;
    }
    EXPECT_GT(rescaled, 0);
    EXPECT_GT(zero_alpha, 0);
    EXPECT_GT(nontrivial_y, 5);
}

TEST(MonodromyTriple, ZeroOperatorsValid) {
    MonodromyTriple T{M(3, 3), M(3, 3), M(3, 3), M::identity(3), Rational(7)};
    auto r = validate_triple(T);
    EXPECT_TRUE(r.valid()) << failing(r.checks);
    EXPECT_EQ(r.normalization, Normalization::NotNeeded);
}

TEST(MonodromyTriple, ElementaryTwisted) {
    Rational q(5);
    M F = M::diagonal({q, 1});
    MonodromyTriple T{M::unit(2, 0, 1), M(2, 2), M(2, 2), F, q};
    auto r = validate_triple(T);
    EXPECT_TRUE(r.valid()) << failing(r.checks);
    T.q = 4;
    EXPECT_FALSE(validate_triple(T).valid());
}

TEST(MonodromyTriple, BracketMismatchHasWitness) {
    M N0 = M::unit(3, 0, 1), N1 = M::unit(3, 1, 2);
    MonodromyTriple T{N0, N1, M(3, 3), M::diagonal({2, 1, 1}), Rational(2)};
    auto r = validate_triple(T);
    EXPECT_FALSE(r.valid());
    bool seen = false;
    for (auto& c : r.checks)
        if (c.name == "[N0,N1] = N2") {
            EXPECT_FALSE(c.pass);
            EXPECT_NE(c.witness.find("1"), std::string::npos);
            seen = true;
        }
    EXPECT_TRUE(seen);
}

TEST(MonodromyTriple, NormalizationShift) {
    Rational q(3);
    M N0 = M::unit(3, 0, 1), N2 = M::unit(3, 0, 2);
    M N1 = M::unit(3, 1, 2) + Rational(2) * N2;
    MonodromyTriple T{N0, N1, N2, M::diagonal({q, 1, 1}), q};
    auto r = validate_triple(T);
    EXPECT_TRUE(r.valid()) << failing(r.checks);
    EXPECT_EQ(r.normalization, Normalization::Needed);
    EXPECT_EQ(r.kappa, Rational(4));
    EXPECT_EQ(r.shift, Rational(2));
    EXPECT_EQ(r.N1_normalized, M::unit(3, 1, 2));
    EXPECT_TRUE(all_pass(r.normalization_checks)) << failing(r.normalization_checks);
}

TEST(MonodromyTriple, NormalizationNotExpressible) {
    MonodromyTriple T{M(2, 2), M::unit(2, 0, 1), M(2, 2), M::diagonal({2, 1}), Rational(2)};
    auto r = validate_triple(T);
    EXPECT_TRUE(r.valid());
    EXPECT_EQ(r.normalization, Normalization::Impossible);
}

TEST(MonodromyTriple, GeneratedTriplesSatisfyIdentities) {
    std::mt19937 rng(99);
    int needed = 0;
    for (int i = 0; i < 20; ++i) {
        auto T = inst::random_triple(rng, 1 + i % 2);
        auto r = validate_triple(T);
        EXPECT_TRUE(r.valid()) << failing(r.checks);
        EXPECT_NE(r.normalization, Normalization::Impossible);
        EXPECT_TRUE(all_pass(r.normalization_checks)) << failing(r.normalization_checks);
        needed += r.normalization == Normalization::Needed;
        // the identities also hold for the unnormalized N1
        M A = T.N0, B = T.N1;
        EXPECT_TRUE((A * A * B - Rational(2) * (A * B * A) + B * A * A).is_zero());
        EXPECT_TRUE((B * B * A - Rational(2) * (B * A * B) + A * B * B).is_zero());
    }
    EXPECT_GT(needed, 5);
}
