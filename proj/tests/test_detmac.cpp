#include <hetmac/detmac.hpp>

#include "oracles.hpp"
#include "random_alloc.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hetmac;
using namespace hetmac::detmac;

namespace {

DetConfig cfg_of(std::vector<int> n, std::vector<int> flat) { return DetConfig{std::move(n), MTable::from_flat(flat)}; }

F2Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng)
{
    std::bernoulli_distribution bit(0.5);
    F2Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
            m.set(i, j, bit(rng));
    return m;
}

} // namespace

TEST(F2Matrix, IdentityAndZeroRanks)
{
    EXPECT_EQ(rank_f2(F2Matrix::identity(7)), 7u);
    EXPECT_EQ(rank_f2(F2Matrix::zero(5, 9)), 0u);
    EXPECT_EQ(rank_f2(F2Matrix(0, 0)), 0u);
}

TEST(F2Matrix, LiteralAndProduct)
{
    const F2Matrix a{{1, 1}, {0, 1}};
    EXPECT_EQ(a * a, F2Matrix::identity(2));
    EXPECT_EQ(a + a, F2Matrix::zero(2, 2));
    EXPECT_EQ(rank_f2(F2Matrix{{1, 1, 0}, {0, 1, 1}, {1, 0, 1}}), 2u);
    EXPECT_THROW((F2Matrix{{1, 2}}), error);
}

TEST(F2Matrix, RankMatchesSpanOracle)
{
    std::mt19937_64 rng(11);
    for (int t = 0; t < 300; ++t) {
        const std::size_t r = 1 + rng() % 9;
        const std::size_t c = 1 + rng() % 9;
        const auto m = random_matrix(r, c, rng);
        ASSERT_EQ(rank_f2(m), oracle::rank_by_span(m)) << m.to_string();
    }
}

TEST(F2Matrix, WideMatricesCrossWordBoundary)
{
    std::mt19937_64 rng(5);
    const auto a = random_full_rank(70, rng);
    EXPECT_EQ(rank_f2(a), 70u);
    EXPECT_EQ(rank_f2(hconcat({a, a}, 70)), 70u);
}

TEST(F2Matrix, ShiftTruncatesLowBits)
{
    const auto s = shift_matrix(4, 1);
    F2Matrix x(4, 1);
    x.set(0, 0, true);
    x.set(3, 0, true);
    const auto y = s * x;
    EXPECT_TRUE(y.get(1, 0));
    EXPECT_FALSE(y.get(0, 0));
    EXPECT_EQ(rank_f2(y), 1u);
    EXPECT_EQ(rank_f2(shift_matrix(6, 2)), 4u);
    EXPECT_EQ(shift_matrix(3, 0), F2Matrix::identity(3));
    EXPECT_THROW(shift_matrix(3, 4), error);
}

TEST(Region, TwoUserPointsHaveZeroSlack)
{
    for (auto flat : {std::vector<int>{8, 0, 4}, {6, 2, 4}, {4, 4, 4}, {2, 4, 4}, {0, 4, 4}}) {
        const auto v = verify_region(cfg_of({8, 4}, flat));
        ASSERT_EQ(v.size(), 2u);
        for (const auto& c : v) {
            EXPECT_TRUE(c.feasible);
            EXPECT_EQ(c.min_slack, 0);
        }
    }
}

TEST(Region, WeakUserCannotExceedItsGain)
{
    const auto v = verify_region(cfg_of({8, 4}, {2, 6, 4}));
    EXPECT_FALSE(v[0].feasible);
    EXPECT_EQ(v[0].sum_slack, 0);
    EXPECT_EQ(v[0].min_slack, -2);
    EXPECT_TRUE(v[1].feasible);
}

TEST(Region, OverloadedComponent)
{
    const auto v = verify_region(cfg_of({8, 4}, {6, 4, 4}));
    EXPECT_FALSE(v[0].feasible);
    EXPECT_EQ(v[0].load, 10);
    EXPECT_EQ(v[0].capacity, 8);
}

TEST(Region, EmptyAllocationIsFeasible)
{
    EXPECT_TRUE(is_feasible(cfg_of({5, 3, 0}, {0, 0, 0, 0, 0, 0})));
}

TEST(Layout, TypeOneStacksFAboveWeakerUsers)
{
    const auto cfg = cfg_of({8, 4}, {4, 4, 4});
    const auto s1 = generator_layout(SchemeType::type1, cfg, 0, 0);
    ASSERT_EQ(s1.size(), 1u);
    EXPECT_EQ(s1[0].row, 0u);
    EXPECT_EQ(s1[0].count, 4u);
    const auto s2 = generator_layout(SchemeType::type1, cfg, 1, 0);
    ASSERT_EQ(s2.size(), 1u);
    EXPECT_EQ(s2[0].row, 0u);
}

TEST(Layout, TypeTwoBottomAlignsSmallBlocks)
{
    const auto cfg = cfg_of({8, 4}, {2, 2, 4});
    const auto s = generator_layout(SchemeType::type2, cfg, 0, 0);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].row, 2u); // d = 4, m = 2
    EXPECT_EQ(generator_layout(SchemeType::type1, cfg, 0, 0)[0].row, 4u);
}

TEST(Layout, TypeTwoSplitsAcrossTheWeakerUser)
{
    const auto cfg = cfg_of({10, 8}, {6, 4, 8});
    const auto s = generator_layout(SchemeType::type2, cfg, 0, 0);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].row, 0u);
    EXPECT_EQ(s[0].count, 2u);
    EXPECT_EQ(s[1].row, 6u);
    EXPECT_EQ(s[1].f_row, 2u);
    EXPECT_EQ(s[1].count, 4u);
}

TEST(Layout, InfeasibleThrows)
{
    const auto cfg = cfg_of({8, 4}, {6, 4, 4});
    EXPECT_THROW(generator_layout(SchemeType::type1, cfg, 0, 0), error);
    try {
        generator_layout(SchemeType::type1, cfg, 0, 0);
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::infeasible_allocation);
    }
}

TEST(Generator, ShapeAndFValidation)
{
    const auto cfg = cfg_of({10, 8}, {6, 4, 8});
    const auto g = build_generator(SchemeType::type1, cfg, 0, 0, F2Matrix::identity(6));
    EXPECT_EQ(g.rows(), 10u);
    EXPECT_EQ(g.cols(), 6u);
    EXPECT_EQ(rank_f2(g), 6u);
    EXPECT_THROW(build_generator(SchemeType::type1, cfg, 0, 0, F2Matrix::identity(5)), error);
    EXPECT_THROW(build_generator(SchemeType::type1, cfg, 0, 0, F2Matrix::zero(6, 6)), error);
}

TEST(Achievability, TwoUserExampleGivesTheTable)
{
    const auto cfg = cfg_of({10, 8}, {6, 4, 8});
    std::mt19937_64 rng(3);
    const auto f = FBlocks::random(cfg.m, rng);
    for (auto t : {SchemeType::type1, SchemeType::type2}) {
        const auto rep = verify_achievability(cfg, t, f);
        EXPECT_TRUE(rep.achieves_table());
        std::vector<int> mi;
        for (const auto& e : rep.entries)
            mi.push_back(e.mutual_info);
        EXPECT_EQ(mi, (std::vector<int>{6, 4, 8}));
    }
}

TEST(Achievability, ReceivedBlocksRejectWrongHeight)
{
    const auto cfg = cfg_of({4, 2}, {2, 0, 2});
    std::vector<F2Matrix> gens{F2Matrix(3, 2), F2Matrix(3, 0)};
    EXPECT_THROW(received_blocks(cfg, 0, gens), error);
}

TEST(Achievability, InfeasibleReportIsFlagged)
{
    const auto cfg = cfg_of({8, 4}, {2, 6, 4});
    const auto rep = verify_achievability(cfg, SchemeType::type1, FBlocks::identity(cfg.m));
    EXPECT_FALSE(rep.feasible);
    EXPECT_FALSE(rep.achieves_table());
}

// Property: every feasible table is achieved by both generator families, and
// the rank MI agrees with an independent span count.
TEST(AchievabilityProperty, RandomFeasibleTables)
{
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 150; ++t) {
        const std::size_t K = 1 + rng() % 4;
        const auto n = testing_util::random_gains(K, 10, rng);
        DetConfig cfg{n, testing_util::random_feasible(n, rng)};
        ASSERT_TRUE(is_feasible(cfg));
        const auto f = FBlocks::random(cfg.m, rng);
        for (auto type : {SchemeType::type1, SchemeType::type2}) {
            const auto rep = verify_achievability(cfg, type, f);
            ASSERT_TRUE(rep.achieves_table()) << "trial " << t;
            for (std::size_t l = 0; l < K; ++l) {
                if (cfg.q(l) > 10)
                    continue;
                const auto gens = component_generators(type, cfg, l, f);
                const auto blocks = received_blocks(cfg, l, gens);
                std::size_t total = 0;
                for (const auto& b : blocks)
                    total += b.cols();
                if (total > 12)
                    continue;
                const auto all = oracle::rank_by_span(hconcat(blocks, cfg.q(l)));
                for (std::size_t k = l; k < K; ++k) {
                    auto others = blocks;
                    others.erase(others.begin() + static_cast<std::ptrdiff_t>(k - l));
                    const auto mi = static_cast<int>(all) - static_cast<int>(oracle::rank_by_span(hconcat(others, cfg.q(l))));
                    EXPECT_EQ(mi, det_mutual_info(cfg, l, gens, k));
                }
            }
        }
    }
}

TEST(AchievabilityProperty, OneBitPastTheRegionCannotBeBuilt)
{
    std::mt19937_64 rng(99);
    int checked = 0;
    for (int t = 0; t < 200; ++t) {
        const auto n = testing_util::random_gains(3, 8, rng);
        auto m = testing_util::random_feasible(n, rng);
        while (is_feasible(DetConfig{n, m}) && m(0, 0) <= n[0])
            ++m(0, 0);
        if (m(0, 0) > n[0])
            continue;
        const DetConfig cfg{n, m};
        for (auto type : {SchemeType::type1, SchemeType::type2})
            EXPECT_THROW(component_generators(type, cfg, 0, FBlocks::identity(m)), error);
        ++checked;
    }
    EXPECT_GT(checked, 20);
}
