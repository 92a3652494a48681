#include "orbitlat/exterior.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace orbitlat;

namespace {

KVector<double> e(int n, std::vector<int> j) { return KVector<double>::unit(IndexSet(n, std::move(j))); }

Vec vec(std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

Mat random_matrix(std::mt19937_64& rng, int n, int k) {
    std::normal_distribution<double> g;
    Mat m(n, k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) m(i, j) = g(rng);
    return m;
}

// coefficient of e_J in v_1 ^ ... ^ v_k by summing over all permutations
double shuffle_sum(const Mat& vs, const IndexSet& j) {
    const int k = static_cast<int>(vs.cols());
    std::vector<int> p(k);
    std::iota(p.begin(), p.end(), 0);
    double total = 0.0;
    do {
        int inversions = 0;
        for (int a = 0; a < k; ++a)
            for (int b = a + 1; b < k; ++b) inversions += p[a] > p[b];
        double term = inversions % 2 ? -1.0 : 1.0;
        for (int a = 0; a < k; ++a) term *= vs(j.members()[a] - 1, p[a]);
        total += term;
    } while (std::next_permutation(p.begin(), p.end()));
    return total;
}

}  // namespace

TEST(IndexSet, RejectsUnsortedAndOutOfRange) {
    EXPECT_THROW(IndexSet(3, {2, 1}), InputError);
    EXPECT_THROW(IndexSet(3, {0}), InputError);
    EXPECT_THROW(IndexSet(3, {4}), InputError);
    EXPECT_EQ(IndexSet(3, {1, 3}), IndexSet(3, {1, 3}));
    EXPECT_LT(IndexSet(3, {1, 2}), IndexSet(3, {1, 3}));
    EXPECT_EQ(all_index_sets(5, 2).size(), 10u);
}

TEST(Wedge, BasisVectors) {
    auto w = wedge(e(2, {1}), e(2, {2}));
    EXPECT_DOUBLE_EQ(w.coord(IndexSet(2, {1, 2})), 1.0);
    EXPECT_EQ(support(w).size(), 1u);
}

TEST(Wedge, SelfWedgeVanishes) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 20; ++t) {
        auto v = KVector<double>::from_vector(random_matrix(rng, 4, 1).col(0));
        EXPECT_LT(kvec_norm(wedge(v, v)), 1e-12);
    }
}

TEST(Wedge, SumAndDifferenceMatchesShuffleSum) {
    auto u = KVector<double>::from_vector(vec({1, 1}));
    auto v = KVector<double>::from_vector(vec({1, -1}));
    auto w = wedge(u, v);
    Mat vs(2, 2);
    vs << 1, 1, 1, -1;
    EXPECT_DOUBLE_EQ(w.coord(IndexSet(2, {1, 2})), -2.0);
    EXPECT_DOUBLE_EQ(w.coord(IndexSet(2, {1, 2})), shuffle_sum(vs, IndexSet(2, {1, 2})));
}

TEST(Wedge, MatchesShuffleSumOnRandomVectors) {
    std::mt19937_64 rng(2);
    for (int n = 2; n <= 5; ++n)
        for (int k = 1; k <= n; ++k) {
            Mat vs = random_matrix(rng, n, k);
            KVector<double> w = KVector<double>::from_vector(vs.col(0));
            for (int c = 1; c < k; ++c) w = wedge(w, KVector<double>::from_vector(vs.col(c)));
            for (const auto& j : all_index_sets(n, k)) EXPECT_NEAR(w.coord(j), shuffle_sum(vs, j), 1e-10);
        }
}

TEST(Wedge, AntisymmetricAndBilinear) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 30; ++t) {
        Mat m = random_matrix(rng, 4, 3);
        auto u = KVector<double>::from_vector(m.col(0));
        auto v = KVector<double>::from_vector(m.col(1));
        auto w = KVector<double>::from_vector(m.col(2));
        EXPECT_LT(kvec_norm(wedge(u, v) + wedge(v, u)), 1e-12);
        auto lhs = wedge(u + 2.5 * w, v);
        auto rhs = wedge(u, v) + 2.5 * wedge(w, v);
        EXPECT_LT(kvec_norm(lhs - rhs), 1e-12);
    }
}

TEST(Wedge, ExactRationalAntisymmetry) {
    DVec<Rational> a(3), b(3);
    a << Rational(1, 2), Rational(-3), Rational(2, 7);
    b << Rational(5), Rational(1, 3), Rational(0);
    auto u = KVector<Rational>::from_vector(a);
    auto v = KVector<Rational>::from_vector(b);
    EXPECT_TRUE((wedge(u, v) + wedge(v, u)).is_zero());
}

TEST(Wedge, GradeOverflowRejected) {
    EXPECT_THROW(wedge(e(2, {1, 2}), e(2, {1})), InputError);
}

TEST(KvecNorm, Examples) {
    EXPECT_DOUBLE_EQ(kvec_norm(e(3, {1, 2})), 1.0);
    EXPECT_DOUBLE_EQ(kvec_norm(KVector<double>(3, 2)), 0.0);
    auto v = 3.0 * e(3, {1, 2}) + (-4.0) * e(3, {1, 3});
    EXPECT_DOUBLE_EQ(kvec_norm(v), 4.0);
}

TEST(Support, Examples) {
    Mat b(3, 2);
    b << 1, 0, 0, 1, 0, 0;
    EXPECT_EQ(support_of_subspace<double>(b), (std::set<IndexSet>{IndexSet(3, {1, 2})}));
    b << 1, 0, 0, 1, 1, 0;
    std::set<IndexSet> expect{IndexSet(3, {1, 2}), IndexSet(3, {2, 3})};
    EXPECT_EQ(support_of_subspace<double>(b), expect);
    EXPECT_EQ(projection_injective_support<double>(b), expect);
    Mat d(2, 1);
    d << 1, 1;
    EXPECT_EQ(support_of_subspace<double>(d).size(), 2u);
}

TEST(Support, DependentInputRejected) {
    Mat b(3, 2);
    b << 1, 2, 1, 2, 0, 0;
    EXPECT_THROW(support_of_subspace<double>(b), InputError);
    EXPECT_THROW(projection_injective_support<double>(b), InputError);
}

TEST(Support, BasisIndependentAndMatchesProjectionTest) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> coin(0, 2);
    for (int n = 2; n <= 6; ++n)
        for (int k = 1; k <= n; ++k)
            for (int t = 0; t < 8; ++t) {
                // sparse integer bases so that supports are proper subsets
                Mat b = Mat::Zero(n, k);
                for (int c = 0; c < k; ++c) b(c, c) = 1;
                for (int i = 0; i < n; ++i)
                    for (int c = 0; c < k; ++c)
                        if (i != c && coin(rng) == 0) b(i, c) = coin(rng) + 1;
                if (Eigen::FullPivLU<Mat>(b).rank() < k) continue;
                std::vector<int> perm(n);
                std::iota(perm.begin(), perm.end(), 0);
                std::shuffle(perm.begin(), perm.end(), rng);
                Mat pb(n, k);
                for (int i = 0; i < n; ++i) pb.row(perm[i]) = b.row(i);
                Mat change = Mat::Identity(k, k);
                for (int c = 1; c < k; ++c) change(c - 1, c) = 2.0;  // invertible upper-triangular change of basis
                auto s1 = support_of_subspace<double>(pb);
                EXPECT_EQ(s1, support_of_subspace<double>(Mat(pb * change)));
                EXPECT_EQ(s1, projection_injective_support<double>(pb));
            }
}

TEST(DiagAct, Examples) {
    auto v = e(3, {1, 2}) + 2.0 * e(3, {2, 3});
    EXPECT_LT(kvec_norm(diag_act_kvector(Vec::Zero(3), v) - v), 1e-15);
    auto s = diag_act_kvector(vec({std::log(2.0), -std::log(2.0)}), e(2, {1}));
    EXPECT_NEAR(s.coord(IndexSet(2, {1})), 2.0, 1e-15);
    auto t = diag_act_kvector(vec({1, 0, -1}), e(3, {1, 3}));
    EXPECT_NEAR(t.coord(IndexSet(3, {1, 3})), 1.0, 1e-15);
}

TEST(DiagAct, CommutesWithWedge) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 30; ++t) {
        Mat m = random_matrix(rng, 4, 3);
        Vec x = m.col(2);
        Vec ex = x.array().exp();
        auto lhs = diag_act_kvector(x, wedge(KVector<double>::from_vector(m.col(0)), KVector<double>::from_vector(m.col(1))));
        auto rhs = wedge(KVector<double>::from_vector(Vec(ex.cwiseProduct(m.col(0)))),
                         KVector<double>::from_vector(Vec(ex.cwiseProduct(m.col(1)))));
        EXPECT_LT(kvec_norm(lhs - rhs), 1e-9 * std::max(1.0, kvec_norm(lhs)));
    }
}

TEST(DiagAct, LogNormConvexAlongSegments) {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 200; ++t) {
        Mat m = random_matrix(rng, 4, 4);
        auto v = wedge(KVector<double>::from_vector(m.col(0)), KVector<double>::from_vector(m.col(1)));
        Vec x0 = m.col(2), x1 = m.col(3);
        auto f = [&](const Vec& x) { return std::log(kvec_norm(diag_act_kvector(x, v))); };
        EXPECT_LE(f(0.5 * (x0 + x1)), 0.5 * (f(x0) + f(x1)) + 1e-9);
    }
}

TEST(MeasuredSubspace, CanonicalSignAndNorm) {
    Mat b(3, 2);
    b << 0, 1, 1, 0, 0, 2;  // wedge has negative first coordinate
    MeasuredSubspace<double> m(b);
    EXPECT_GT(m.plucker().coords().begin()->second, 0.0);
    EXPECT_LT(kvec_norm(wedge_columns<double>(m.basis()) - m.plucker()), 1e-15);
    EXPECT_DOUBLE_EQ(m.norm(), 2.0);
    Mat flipped = b;
    flipped.col(0) *= -1;
    EXPECT_LT(kvec_norm(MeasuredSubspace<double>(flipped).plucker() - m.plucker()), 1e-15);
    Mat dep(3, 2);
    dep << 1, 2, 0, 0, 1, 2;
    EXPECT_THROW(MeasuredSubspace<double>{dep}, InputError);
}
