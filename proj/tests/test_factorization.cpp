#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace altblock;
namespace t = altblock::testing;

namespace {

/// Planted instance with exact factorization A = C M C^T and row-stochastic C.
struct Planted {
    Matrix c, m, a;
};

Planted planted_row_stochastic(std::uint64_t seed, Index n, Index k) {
    std::mt19937_64 rng(seed);
    Planted p;
    p.c = t::row_normalized(t::random_uniform(rng, n, k, 0.1, 1.0));
    p.m = t::random_symmetric(rng, k, 0.2, 1.0);
    p.a = reconstruct(p.c, p.m);
    p.a = 0.5 * (p.a + p.a.transpose());
    return p;
}

}  // namespace

TEST(SolverConfig, Validation) {
    SolverConfig c;
    EXPECT_NO_THROW(c.validate());
    c.k = 1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.beta = -1.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.max_iterations = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.epsilon = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Initialize, DeterministicPerSeed) {
    SolverConfig cfg;
    cfg.seed = 11;
    const auto [c1, m1] = initialize(cfg, 34);
    const auto [c2, m2] = initialize(cfg, 34);
    EXPECT_EQ(c1, c2);
    EXPECT_EQ(m1, m2);
    cfg.seed = 12;
    const auto [c3, m3] = initialize(cfg, 34);
    EXPECT_NE(c1, c3);
    EXPECT_NE(m1, m3);
}

TEST(Initialize, ShapeAndRange) {
    SolverConfig cfg;
    const auto [c, m] = initialize(cfg, 34);
    ASSERT_EQ(c.rows(), 34);
    ASSERT_EQ(c.cols(), 2);
    ASSERT_EQ(m.rows(), 2);
    ASSERT_EQ(m.cols(), 2);
    EXPECT_TRUE((c.array() > 0.0).all() && (c.array() < 1.0).all());
    EXPECT_TRUE((m.array() > 0.0).all() && (m.array() < 1.0).all());
    EXPECT_EQ(m, m.transpose());
    EXPECT_LT(row_sum_error(c), 1e-15);
}

TEST(BaseObjective, ZeroAtExactFactorization) {
    std::mt19937_64 rng(1);
    const Matrix c = t::random_uniform(rng, 6, 2);
    Matrix m(2, 2);
    m << 1.0, 0.25, 0.25, 0.5;
    const Matrix a = reconstruct(c, m);
    EXPECT_NEAR(base_objective(a, c, m), 0.0, 1e-24);
}

TEST(BaseObjective, SumOfSquaresWhenImageIsZero) {
    Matrix a(2, 2);
    a << 0, 1, 1, 0;
    EXPECT_DOUBLE_EQ(base_objective(a, Matrix::Identity(2, 2), Matrix::Zero(2, 2)), 2.0);
}

TEST(BaseObjective, MatchesNaiveResidual) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix a = t::random_graph(rng, 9, 0.4);
        const Matrix c = t::random_uniform(rng, 9, 3);
        const Matrix m = t::random_symmetric(rng, 3);
        EXPECT_NEAR(base_objective(a, c, m), t::naive_residual(a, c, m), 1e-10);
    }
}

TEST(UpdateMBase, ZeroImageIsFixedPoint) {
    std::mt19937_64 rng(3);
    const Matrix a = t::random_graph(rng, 8, 0.5);
    const Matrix c = t::random_uniform(rng, 8, 2);
    EXPECT_TRUE(update_M_base(a, c, Matrix::Zero(2, 2), 1e-9).isZero(0.0));
}

TEST(UpdateMBase, ExactFactorizationIsStationary) {
    std::mt19937_64 rng(4);
    const Matrix c = t::random_uniform(rng, 8, 2, 0.1, 1.0);
    const Matrix m = t::random_symmetric(rng, 2, 0.2, 1.0);
    const Matrix a = reconstruct(c, m);
    const Matrix next = update_M_base(a, c, m, 1e-15);
    EXPECT_LT((next - m).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(UpdateMBase, NeverIncreasesObjective) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix a = t::random_graph(rng, 8, 0.5);
        const Matrix c = t::random_uniform(rng, 8, 2);
        const Matrix m = t::random_symmetric(rng, 2);
        const double before = base_objective(a, c, m);
        const double after = base_objective(a, c, update_M_base(a, c, m, 1e-12));
        EXPECT_LE(after, before + 1e-9) << "trial " << trial;
    }
}

TEST(UpdateMBase, PreservesNonNegativityAndSymmetry) {
    std::mt19937_64 rng(6);
    const Matrix a = t::random_graph(rng, 10, 0.5);
    const Matrix c = t::random_uniform(rng, 10, 3);
    const Matrix m = t::random_symmetric(rng, 3);
    const Matrix next = update_M_base(a, c, m, 1e-9);
    EXPECT_TRUE((next.array() >= 0.0).all());
    EXPECT_LT((next - next.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(UpdateCLagrangian, RowStochasticStationaryPoint) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Planted p = planted_row_stochastic(seed, 10, 2);
        const Matrix next = update_C_lagrangian(p.a, p.c, p.m, nullptr, 1e-15);
        EXPECT_LT((next - p.c).cwiseAbs().maxCoeff(), 1e-8) << "seed " << seed;
    }
}

TEST(UpdateCLagrangian, ZeroRowStaysZero) {
    std::mt19937_64 rng(7);
    const Matrix a = t::random_graph(rng, 8, 0.5);
    Matrix c = t::random_uniform(rng, 8, 2);
    c.row(3).setZero();
    const Matrix m = t::random_symmetric(rng, 2);
    const Matrix next = update_C_lagrangian(a, c, m, nullptr, 1e-9);
    EXPECT_TRUE(next.row(3).isZero(0.0));
    EXPECT_TRUE((next.array() >= 0.0).all());
}

TEST(Gradient, BaseMatchesFiniteDifferences) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix a = t::random_graph(rng, 7, 0.5);
        const Matrix c = t::random_uniform(rng, 7, 2, 0.2, 1.0);
        const Matrix m = t::random_symmetric(rng, 2, 0.2, 1.0);
        const Matrix fd_c = t::finite_difference([&](const Matrix& x) { return t::naive_residual(a, x, m); }, c, 1e-6);
        const Matrix fd_m = t::finite_difference([&](const Matrix& x) { return t::naive_residual(a, c, x); }, m, 1e-6);
        EXPECT_LT(t::relative_error(gradient_C(a, c, m), fd_c), 1e-5);
        EXPECT_LT(t::relative_error(gradient_M(a, c, m), fd_m), 1e-5);
    }
}

TEST(Solve, IterationCap) {
    SolverConfig cfg;
    cfg.max_iterations = 1;
    const auto r = solve(t::karate(), cfg, {});
    EXPECT_EQ(r.trace.iterations_run, 1);
    EXPECT_FALSE(r.trace.converged);
    EXPECT_EQ(r.trace.objective_per_iteration.size(), 1u);
}

TEST(Solve, PlantedRecoveryBestOfTwentySeeds) {
    Matrix c = Matrix::Zero(10, 2);
    for (Index i = 0; i < 10; ++i) c(i, i < 5 ? 0 : 1) = 1.0;
    Matrix m(2, 2);
    m << 0.9, 0.1, 0.1, 0.6;
    const AdjacencyMatrix g(reconstruct(c, m));
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SolverConfig cfg;
        cfg.seed = seed;
        cfg.tolerance = 1e-10;
        cfg.max_iterations = 5000;
        best = std::min(best, base_objective(g, solve(g, cfg, {}).blockmodel));
    }
    EXPECT_LT(best, 1e-4);
}

TEST(Solve, OutputIsNonNegativeAndRowStochasticWhenConverged) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SolverConfig cfg;
        cfg.seed = seed;
        const auto r = solve(t::karate(), cfg, {});
        EXPECT_TRUE((r.blockmodel.membership.array() >= 0.0).all());
        EXPECT_TRUE((r.blockmodel.image.array() >= 0.0).all());
        if (r.trace.converged) {
            EXPECT_LT(r.trace.final_row_sum_error, cfg.stochasticity_tolerance);
        }
        EXPECT_EQ(r.trace.iterations_run, static_cast<int>(r.trace.objective_per_iteration.size()));
        EXPECT_DOUBLE_EQ(r.blockmodel.objective_value, r.trace.objective_per_iteration.back());
    }
}

TEST(Solve, ImageStaysSymmetric) {
    SolverConfig cfg;
    cfg.seed = 4;
    const auto r = solve(t::karate(), cfg, {});
    const Matrix& m = r.blockmodel.image;
    EXPECT_LT((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-10 * m.cwiseAbs().maxCoeff());
}

TEST(Solve, DeterministicPerSeed) {
    SolverConfig cfg;
    cfg.seed = 21;
    const auto a = solve(t::karate(), cfg, {});
    const auto b = solve(t::karate(), cfg, {});
    EXPECT_EQ(a.blockmodel.membership, b.blockmodel.membership);
    EXPECT_EQ(a.blockmodel.image, b.blockmodel.image);
    EXPECT_EQ(a.trace.objective_per_iteration, b.trace.objective_per_iteration);
}

TEST(Solve, BetaZeroImageDissimilarityMatchesBase) {
    ReferenceSet refs;
    refs.reference_images.push_back({t::karate_reference_image(), 1.0});
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        SolverConfig base;
        base.seed = seed;
        SolverConfig alt = base;
        alt.approach = Approach::ImageDissimilarity;
        std::vector<Matrix> cs, ms;
        solve(t::karate(), base, {}, [&](int, const Matrix& c, const Matrix& m) {
            cs.push_back(c);
            ms.push_back(m);
        });
        std::size_t step = 0;
        solve(t::karate(), alt, refs, [&](int, const Matrix& c, const Matrix& m) {
            ASSERT_LT(step, cs.size());
            EXPECT_LE((c - cs[step]).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_LE((m - ms[step]).cwiseAbs().maxCoeff(), 1e-12);
            ++step;
        });
        EXPECT_EQ(step, cs.size());
    }
}

TEST(Solve, RejectsBadConfig) {
    SolverConfig cfg;
    cfg.k = 0;
    EXPECT_THROW(solve(t::karate(), cfg, {}), ConfigError);
}
