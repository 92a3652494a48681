#include "generators.hpp"
#include "oracles.hpp"
#include "orbitlat/io.hpp"

#include <gtest/gtest.h>

using namespace orbitlat;

namespace {

Lattice diag(std::initializer_list<double> d) {
    Vec v(static_cast<Eigen::Index>(d.size()));
    Eigen::Index i = 0;
    for (double x : d) v(i++) = x;
    return Lattice::diagonal(v);
}

Lattice hexagonal() {
    const double s = std::sqrt(2 / std::sqrt(3.0));
    Mat hex(2, 2);
    hex << s, s / 2, 0, s * std::sqrt(3.0) / 2;
    return Lattice(hex);
}

IMat axes(int n, std::vector<int> cols) {
    IMat g = IMat::Zero(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) g(cols[j], static_cast<Eigen::Index>(j)) = 1;
    return g;
}

Mat cols(int n, std::vector<int> unit) {
    Mat m = Mat::Zero(n, static_cast<Eigen::Index>(unit.size()));
    for (std::size_t j = 0; j < unit.size(); ++j) m(unit[j], static_cast<Eigen::Index>(j)) = 1;
    return m;
}

}  // namespace

TEST(GraysonProfile, Examples) {
    auto z3 = grayson_profile(Lattice::identity(3));
    for (const auto& p : z3.points) EXPECT_NEAR(p.min_log_cov, 0.0, 1e-12);
    EXPECT_EQ(z3.vertex_ranks, (std::vector<int>{0, 3}));

    auto d = grayson_profile(diag({0.25, 1, 4}));
    EXPECT_EQ(d.vertex_ranks, (std::vector<int>{0, 1, 2, 3}));
    EXPECT_NEAR(d.points[1].min_log_cov, -std::log(4.0), 1e-12);
    EXPECT_NEAR(d.points[2].min_log_cov, -std::log(4.0), 1e-12);

    auto t = grayson_profile(diag({2, 0.5}));
    EXPECT_EQ(t.vertex_ranks, (std::vector<int>{0, 1, 2}));
    EXPECT_NEAR(t.points[1].min_log_cov, std::log(0.5), 1e-12);
}

TEST(GraysonProfile, VertexSlopesStrictlyIncrease) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Lattice l = random_lattice(2 + static_cast<int>(seed % 3), seed, RandomDist::gaussian_qr);
        auto p = grayson_profile(l);
        EXPECT_EQ(p.points.front().min_log_cov, 0.0);
        EXPECT_NEAR(p.points.back().min_log_cov, 0.0, 1e-9);
        for (std::size_t i = 2; i < p.vertex_ranks.size(); ++i) {
            const int a = p.vertex_ranks[i - 2], b = p.vertex_ranks[i - 1], c = p.vertex_ranks[i];
            const double s1 = (p.points[b].min_log_cov - p.points[a].min_log_cov) / (b - a);
            const double s2 = (p.points[c].min_log_cov - p.points[b].min_log_cov) / (c - b);
            EXPECT_LT(s1, s2);
        }
    }
}

TEST(HNFiltration, Examples) {
    auto z = hn_filtration(Lattice::identity(4));
    EXPECT_TRUE(z.trivial());

    const Lattice d = diag({0.25, 1, 4});
    auto f = hn_filtration(d);
    ASSERT_EQ(f.ranks(), (std::vector<int>{0, 1, 2, 3}));
    EXPECT_TRUE(f.chain[1].same_subgroup(Sublattice(d, axes(3, {0}))));
    EXPECT_TRUE(f.chain[2].same_subgroup(Sublattice(d, axes(3, {0, 1}))));

    const Lattice t = diag({2, 0.5});
    auto g = hn_filtration(t);
    ASSERT_EQ(g.ranks(), (std::vector<int>{0, 1, 2}));
    EXPECT_TRUE(g.chain[1].same_subgroup(Sublattice(t, axes(2, {1}))));
    EXPECT_NEAR(g.covolumes[1], 0.5, 1e-15);
}

TEST(HNFiltration, TiesOffTheVerticesAreAccepted) {
    // two shortest lines tie at rank 1, which lies on the hull chord
    const Lattice l = diag({0.5, 0.5, 4});
    auto p = grayson_profile(l);
    EXPECT_FALSE(p.minimizers[1].ties.empty());
    auto f = hn_filtration(l);
    ASSERT_EQ(f.ranks(), (std::vector<int>{0, 2, 3}));
    EXPECT_TRUE(f.chain[1].same_subgroup(Sublattice(l, axes(3, {0, 1}))));
}

TEST(HNFiltration, NestedSaturatedAndCovolumesAtMostOne) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Lattice l = random_lattice(2 + static_cast<int>(seed % 3), 50 + seed, RandomDist::gaussian_qr);
        auto f = hn_filtration(l);
        auto r = f.ranks();
        for (std::size_t i = 1; i < r.size(); ++i) EXPECT_LT(r[i - 1], r[i]);
        for (std::size_t i = 0; i + 1 < f.chain.size(); ++i) EXPECT_TRUE(f.chain[i].contained_in(f.chain[i + 1]));
        for (std::size_t i = 1; i + 1 < f.chain.size(); ++i) {
            EXPECT_LE(f.covolumes[i], 1 + 1e-9);
            EXPECT_TRUE(saturate(f.chain[i]).same_subgroup(f.chain[i]));
        }
        EXPECT_EQ(f.trivial(), is_stable(l).stable);
    }
}

TEST(HNFiltration, EquivariantUnderSmallDiagonalPerturbation) {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g;
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Lattice l = random_lattice(3, 80 + seed, RandomDist::gaussian_qr);
        auto f = hn_filtration(l);
        if (f.trivial()) continue;
        Vec x(3);
        for (int i = 0; i < 3; ++i) x(i) = 1e-7 * g(rng);
        x.array() -= x.mean();
        const Lattice al(Mat(x.array().exp().matrix().asDiagonal() * l.basis()));
        auto fa = hn_filtration(al);
        ASSERT_EQ(f.ranks(), fa.ranks());
        for (std::size_t i = 0; i < f.chain.size(); ++i) EXPECT_EQ(f.chain[i].canonical(), fa.chain[i].canonical());
        ++checked;
    }
    EXPECT_GT(checked, 5);
}

TEST(IsStable, Examples) {
    EXPECT_TRUE(is_stable(Lattice::identity(3)).stable);
    auto r = is_stable(diag({2, 0.5}));
    EXPECT_FALSE(r.stable);
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_NEAR(r.witness_covolume, 0.5, 1e-15);
    EXPECT_NEAR(covolume(*r.witness), 0.5, 1e-15);
    EXPECT_TRUE(is_stable(hexagonal()).stable);
    EXPECT_GE(oracle::euclidean_minima(hexagonal().basis()).values[0], 1.0);
}

TEST(IsStable, AgreesWithOracleAndUnimodularInvariant) {
    std::mt19937_64 rng(22);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const int n = 2 + static_cast<int>(seed % 3);
        const Lattice l = random_lattice(n, 120 + seed, RandomDist::gaussian_qr);
        auto rep = is_stable(l);
        EXPECT_NEAR(rep.margin, oracle::stability_margin(l.basis()), 1e-9);
        EXPECT_EQ(rep.stable, oracle::stability_margin(l.basis()) >= -1e-9);
        const Lattice l2(Mat(l.basis() * gen::random_unimodular(rng, n, 15).cast<double>()));
        EXPECT_EQ(is_stable(l2).stable, rep.stable);
    }
}

TEST(MinkowskiFlag, Examples) {
    auto z = minkowski_flag(Lattice::identity(3), NormSpec::euclidean());
    EXPECT_TRUE(z.trivial());
    EXPECT_DOUBLE_EQ(z.norm(), 1.0);

    auto t = minkowski_flag(diag({2, 0.5}), NormSpec::euclidean());
    ASSERT_EQ(t.dims(), (std::vector<int>{1}));
    EXPECT_NEAR(t.members[0].norm(), 0.5, 1e-15);
    EXPECT_EQ(support(t.members[0].plucker()), (std::set<IndexSet>{IndexSet(2, {2})}));

    auto d = minkowski_flag(diag({0.25, 1, 4}), NormSpec::euclidean());
    ASSERT_EQ(d.dims(), (std::vector<int>{1, 2}));
    EXPECT_EQ(support(d.members[0].plucker()), (std::set<IndexSet>{IndexSet(3, {1})}));
    EXPECT_EQ(support(d.members[1].plucker()), (std::set<IndexSet>{IndexSet(3, {1, 2})}));
}

TEST(MinkowskiFlag, TrivialIffWellRounded) {
    for (const NormSpec& norm : {NormSpec::euclidean(), NormSpec::l_infinity()}) {
        EXPECT_TRUE(minkowski_flag(hexagonal(), NormSpec::euclidean()).trivial());
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const Lattice l = random_lattice(3, 160 + seed, RandomDist::gaussian_qr);
            auto f = minkowski_flag(l, norm);
            EXPECT_EQ(f.trivial(), is_well_rounded(l, norm));
            for (std::size_t i = 1; i < f.members.size(); ++i) EXPECT_LT(f.members[i - 1].dim(), f.members[i].dim());
            double mx = f.trivial() ? 1.0 : 0.0;
            for (const auto& m : f.members) mx = std::max(mx, m.norm());
            EXPECT_DOUBLE_EQ(mx, f.norm());
        }
    }
}

TEST(FlagBound, Examples) {
    auto z = flag_norm_bound_check(Lattice::identity(3), NormSpec::euclidean());
    EXPECT_DOUBLE_EQ(z.flag_norm, 1.0);
    auto t = flag_norm_bound_check(diag({2, 0.5}), NormSpec::euclidean());
    EXPECT_NEAR(t.flag_norm, 0.5, 1e-15);
    EXPECT_LE(t.flag_norm, t.bound);
    EXPECT_THROW(flag_norm_bound_check(diag({2, 1}), NormSpec::euclidean()), InputError);
}

TEST(FlagBound, RandomUnimodularLattices) {
    for (const NormSpec& norm : {NormSpec::euclidean(), NormSpec::l_infinity(), NormSpec::l_1()})
        for (std::uint64_t seed = 0; seed < 100; ++seed)
            EXPECT_NO_THROW(flag_norm_bound_check(random_lattice(3, 200 + seed, RandomDist::gaussian_qr), norm));
}

TEST(SupportPermutation, Examples) {
    EXPECT_EQ(flag_support_permutation({cols(2, {0}), Mat::Identity(2, 2)}), (Permutation{1, 2}));
    EXPECT_EQ(flag_support_permutation({cols(2, {1}), Mat::Identity(2, 2)}), (Permutation{2, 1}));
    EXPECT_THROW(flag_support_permutation({cols(3, {0, 1}), cols(3, {0})}), InputError);
}

TEST(SupportPermutation, SatisfiesDefinitionAndBruteForceAgrees) {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 300; ++t) {
        const int n = 2 + t % 4;
        auto chain = gen::random_sparse_flag(rng, n);
        Permutation s = flag_support_permutation(chain);
        EXPECT_TRUE(satisfies_support_property(s, chain));
        auto valid = oracle::valid_permutations(chain, 1e-9);
        EXPECT_NE(std::find(valid.begin(), valid.end(), s), valid.end());
    }
}
