#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace altblock;
namespace t = altblock::testing;

namespace {

RunRecord fake_run(std::uint64_t seed, const std::vector<int>& labels, double objective) {
    RunRecord r;
    r.seed = seed;
    HardPartition p = HardPartition::from_labels(labels);
    p.k = 2;
    r.blockmodel.membership = indicator(p);
    r.blockmodel.image = Matrix::Identity(2, 2);
    r.blockmodel.objective_value = objective;
    return r;
}

RestartBatch fake_batch(const std::vector<std::vector<int>>& parts) {
    RestartBatch b;
    b.restarts = static_cast<int>(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i)
        b.runs.push_back(fake_run(i, parts[i], 10.0 - static_cast<double>(i)));
    return b;
}

}  // namespace

TEST(GroupSolutions, PermutationEquivalence) {
    const auto groups = group_solutions(fake_batch({{0, 0, 1}, {1, 1, 0}}));
    ASSERT_EQ(groups.size(), 1u);
    EXPECT_EQ(groups[0].occurrences, 2);
    EXPECT_EQ(groups[0].representative, 1u);  // lower objective
    EXPECT_EQ(groups[0].canonical_partition.assignment, (std::vector<int>{0, 0, 1}));
}

TEST(GroupSolutions, DistinctPartitions) {
    EXPECT_EQ(group_solutions(fake_batch({{0, 0, 1}, {0, 1, 1}})).size(), 2u);
}

TEST(GroupSolutions, OccurrencesPartitionTheRuns) {
    std::vector<std::vector<int>> parts;
    for (int i = 0; i < 100; ++i) {
        if (i % 10 < 5) parts.push_back(i % 2 ? std::vector<int>{0, 0, 1, 1} : std::vector<int>{1, 1, 0, 0});
        else if (i % 10 < 8) parts.push_back({0, 1, 0, 1});
        else parts.push_back({0, 0, 0, 1});
    }
    const auto groups = group_solutions(fake_batch(parts));
    ASSERT_EQ(groups.size(), 3u);
    int total = 0;
    for (const auto& g : groups) total += g.occurrences;
    EXPECT_EQ(total, 100);
    EXPECT_EQ(groups[0].occurrences, 50);
    EXPECT_EQ(groups[1].occurrences, 30);
    EXPECT_EQ(groups[2].occurrences, 20);
}

TEST(RunBatch, SingleRestart) {
    const RestartBatch b = run_batch(t::karate(), SolverConfig{}, {}, 1, 5);
    ASSERT_EQ(b.runs.size(), 1u);
    EXPECT_EQ(b.runs[0].seed, 5u);
    EXPECT_EQ(group_solutions(b).size(), 1u);
    EXPECT_THROW(run_batch(t::karate(), SolverConfig{}, {}, 0, 5), ConfigError);
}

TEST(RunBatch, IndependentOfThreadCount) {
    const RestartBatch one = run_batch(t::karate(), SolverConfig{}, {}, 6, 100, 1);
    const RestartBatch many = run_batch(t::karate(), SolverConfig{}, {}, 6, 100, 3);
    ASSERT_EQ(one.runs.size(), many.runs.size());
    for (std::size_t i = 0; i < one.runs.size(); ++i) {
        EXPECT_EQ(one.runs[i].seed, many.runs[i].seed);
        EXPECT_EQ(one.runs[i].blockmodel.membership, many.runs[i].blockmodel.membership);
    }
}

TEST(RunBatch, ReportsCarryReferenceAndTarget) {
    ReferenceSet refs;
    refs.reference_partition = t::karate_factions();
    refs.target_partition = t::karate_factions();
    const RestartBatch b = run_batch(t::karate(), SolverConfig{}, refs, 2, 0);
    for (const auto& r : b.runs) {
        EXPECT_TRUE(r.report.d_rkl_to_reference.has_value());
        EXPECT_TRUE(r.report.nmi_to_target.has_value());
    }
}

TEST(RunBatch, KarateImageDissimilarityHasDominantGroup) {
    ReferenceSet refs;
    refs.reference_images.push_back({t::karate_reference_image(), 1.0});
    SolverConfig cfg;
    cfg.approach = Approach::ImageDissimilarity;
    cfg.beta = 1.0;
    const RestartBatch b = run_batch(t::karate(), cfg, refs, 100, 0);
    const auto groups = group_solutions(b);
    ASSERT_FALSE(groups.empty());
    EXPECT_GT(groups[0].occurrences, 50);
}

TEST(MetaDissimilarity, IdenticalRunsGiveZero) {
    const RestartBatch b = fake_batch({{0, 0, 1}, {0, 0, 1}, {0, 0, 1}});
    EXPECT_TRUE(meta_dissimilarity(b).isZero(0.0));
    EXPECT_TRUE(meta_dissimilarity(fake_batch({{0, 0, 1}, {1, 1, 0}}), MetaMetric::OneMinusNmi).isZero(1e-12));
}

TEST(MetaDissimilarity, MatchesPairwiseOracle) {
    const RestartBatch b = run_batch(t::karate(), SolverConfig{}, {}, 3, 40);
    const Matrix d = meta_dissimilarity(b);
    const Matrix d_nmi = meta_dissimilarity(b, MetaMetric::OneMinusNmi);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            const auto &bi = b.runs[i].blockmodel, &bj = b.runs[j].blockmodel;
            const double expected = i == j ? 0.0 : 0.5 * (d_rkl(bi, bj) + d_rkl(bj, bi));
            EXPECT_NEAR(d(static_cast<Index>(i), static_cast<Index>(j)), expected, 1e-9 * std::max(1.0, expected));
            const double e_nmi = i == j ? 0.0 : 1.0 - nmi(harden(bi), harden(bj));
            EXPECT_NEAR(d_nmi(static_cast<Index>(i), static_cast<Index>(j)), e_nmi, 1e-12);
        }
}

TEST(Ivat, TwoByTwo) {
    Matrix d(2, 2);
    d << 0, 3.5, 3.5, 0;
    const IvatResult r = ivat_reorder(d);
    ASSERT_EQ(r.permutation.size(), 2u);
    EXPECT_NE(r.permutation[0], r.permutation[1]);
    EXPECT_EQ(r.ivat(0, 1), 3.5);
    EXPECT_EQ(r.ivat(1, 0), 3.5);
}

TEST(Ivat, RejectsAsymmetric) {
    Matrix d(2, 2);
    d << 0, 1, 2, 0;
    EXPECT_THROW(ivat_reorder(d), NotSymmetric);
    EXPECT_THROW(ivat_reorder(Matrix::Zero(2, 3)), NotSymmetric);
}

TEST(Ivat, IsAPermutationAndConjugation) {
    std::mt19937_64 rng(1);
    const Matrix d = t::random_metric(rng, 9);
    const IvatResult r = ivat_reorder(d);
    std::vector<Index> sorted = r.permutation;
    std::sort(sorted.begin(), sorted.end());
    for (Index i = 0; i < 9; ++i) EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i);
    for (Index a = 0; a < 9; ++a)
        for (Index b = 0; b < 9; ++b)
            EXPECT_EQ(r.reordered(a, b), d(r.permutation[static_cast<std::size_t>(a)], r.permutation[static_cast<std::size_t>(b)]));
}

TEST(Ivat, MatchesExhaustiveMinimaxPaths) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const IvatResult r = ivat_reorder(t::random_metric(rng, 6));
        EXPECT_EQ(r.ivat, t::brute_force_minimax(r.reordered)) << "trial " << trial;
        EXPECT_TRUE((r.ivat.array() >= 0.0).all());
        EXPECT_TRUE((r.ivat.array() <= r.reordered.array()).all());
        EXPECT_LE(r.ivat.maxCoeff(), r.reordered.maxCoeff());
    }
}

TEST(Ivat, TwoSeparatedClustersFormBlocks) {
    // Points 0..3 near 0, points 4..7 near 100, interleaved in input order.
    const std::vector<double> x{0.0, 100.0, 1.0, 101.0, 2.0, 102.5, 3.0, 103.0};
    Matrix d(8, 8);
    for (Index i = 0; i < 8; ++i)
        for (Index j = 0; j < 8; ++j) d(i, j) = std::abs(x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]);
    const IvatResult r = ivat_reorder(d);
    const bool first_low = x[static_cast<std::size_t>(r.permutation[0])] < 50.0;
    for (Index i = 0; i < 4; ++i) EXPECT_EQ(x[static_cast<std::size_t>(r.permutation[static_cast<std::size_t>(i)])] < 50.0, first_low);
    const double between = r.ivat(0, 7);
    for (Index i = 0; i < 4; ++i)
        for (Index j = 4; j < 8; ++j) EXPECT_EQ(r.ivat(i, j), between);
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j) {
            EXPECT_LT(r.ivat(i, j), between);
            EXPECT_LT(r.ivat(i + 4, j + 4), between);
        }
    for (Index i = 0; i < 8; ++i) EXPECT_EQ(r.ivat(i, i), 0.0);
}

TEST(ReferenceBlockmodel, UsesImageWhenSizeFits) {
    ReferenceSet refs;
    EXPECT_FALSE(reference_blockmodel(t::karate(), refs).has_value());
    refs.reference_partition = t::karate_factions();
    const auto mean = reference_blockmodel(t::karate(), refs);
    ASSERT_TRUE(mean.has_value());
    EXPECT_EQ(mean->image, block_mean_image(t::karate().weights(), t::karate_factions()));
    refs.reference_images.push_back({t::karate_reference_image(), 1.0});
    EXPECT_EQ(reference_blockmodel(t::karate(), refs)->image, t::karate_reference_image());
}

TEST(Ivat, ReorderingIsIdempotent) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const IvatResult first = ivat_reorder(t::random_metric(rng, 10));
        const IvatResult second = ivat_reorder(first.reordered);
        for (Index i = 0; i < 10; ++i) EXPECT_EQ(second.permutation[static_cast<std::size_t>(i)], i);
    }
}
