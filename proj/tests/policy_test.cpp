// Copyright 2026 The sapaug Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "oracles.hpp"
#include "sapaug/policy.hpp"

using namespace sapaug;

TEST(RankLosses, AscendingWithStableTies)
{
    EXPECT_EQ(rank_losses(std::vector{0.5, 0.1, 0.9}).ranks(), (std::vector<std::size_t>{2, 1, 3}));
    EXPECT_EQ(rank_losses(std::vector{0.3, 0.3}).ranks(), (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(rank_losses(std::vector{7.0}).ranks(), (std::vector<std::size_t>{1}));
    EXPECT_EQ(rank_losses(std::vector{2.0, 1.0, 2.0, 1.0}).ranks(), (std::vector<std::size_t>{3, 1, 4, 2}));
}

TEST(RankLosses, RejectsBadInput)
{
    EXPECT_THROW(rank_losses(std::vector<double>{}), InputError);
    EXPECT_THROW(rank_losses(std::vector{1.0, std::nan("")}), InputError);
    EXPECT_THROW(rank_losses(std::vector{std::numeric_limits<double>::infinity()}), InputError);
}

TEST(RankLosses, InvariantToPositiveScaling)
{
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> losses(17);
        for (auto& l : losses) {
            l = rng.uniform(0.0, 5.0);
        }
        const double c = std::exp(rng.uniform(-5.0, 5.0));
        auto scaled = losses;
        for (auto& l : scaled) {
            l *= c;
        }
        const PolicyParams params{rng.uniform(1.0, 50.0), rng.uniform(0.1, 0.9), 1.0};
        const auto r1 = rank_losses(losses);
        const auto r2 = rank_losses(scaled);
        ASSERT_EQ(r1.ranks(), r2.ranks());
        ASSERT_EQ(lambdas_for_batch(params, r1), lambdas_for_batch(params, r2));
    }
}

TEST(LossRanking, FromRanksValidatesPermutation)
{
    EXPECT_NO_THROW(LossRanking::from_ranks({2, 1, 3}));
    EXPECT_THROW(LossRanking::from_ranks({1, 1}), InputError);
    EXPECT_THROW(LossRanking::from_ranks({0, 1}), InputError);
    EXPECT_THROW(LossRanking::from_ranks({}), InputError);
}

TEST(LambdaOfRank, DocumentedExamples)
{
    EXPECT_NEAR(lambda_of_rank({2.0, 0.5, 1.0}, 3, 10), 0.7, 1e-12);
    for (double s : {0.5, 2.0, 37.0, 200.0}) {
        for (double a : {0.05, 0.5, 0.95}) {
            EXPECT_EQ(lambda_of_rank({s, a, 1.0}, 12, 12), 0.0);
        }
    }
    // alpha = s a = 7, beta = s (1 - a) = 3, x = 8 / 32
    const double expected = 1.0 - oracle::inc_beta_integer(7, 3, 0.25);
    const double got = lambda_of_rank({10.0, 0.7, 1.0}, 8, 32);
    EXPECT_NEAR(got, expected, 1e-12);
    EXPECT_GT(got, 0.99);
}

TEST(LambdaOfRank, LinearSpecialCase)
{
    for (std::size_t b = 1; b <= 128; ++b) {
        for (std::size_t r = 1; r <= b; ++r) {
            ASSERT_NEAR(lambda_of_rank({2.0, 0.5, 1.0}, r, b), 1.0 - static_cast<double>(r) / b, 1e-12);
        }
    }
}

TEST(LambdaOfRank, RejectsBadRankAndParams)
{
    EXPECT_THROW(lambda_of_rank({2.0, 0.5, 1.0}, 0, 10), InputError);
    EXPECT_THROW(lambda_of_rank({2.0, 0.5, 1.0}, 11, 10), InputError);
    EXPECT_THROW(lambda_of_rank({0.0, 0.5, 1.0}, 1, 10), InputError);
    EXPECT_THROW(lambda_of_rank({2.0, 1.0, 1.0}, 1, 10), InputError);
    EXPECT_THROW(lambda_of_rank({2.0, 0.5, 1.5}, 1, 10), InputError);
}

TEST(LambdasForBatch, DocumentedExamples)
{
    const auto ranking = rank_losses(std::vector{0.4, 0.1, 0.8, 0.2});
    const auto lambdas = lambdas_for_batch({2.0, 0.5, 1.0}, ranking);
    const std::vector<double> expected = {0.25, 0.75, 0.0, 0.5};
    ASSERT_EQ(lambdas.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_NEAR(lambdas[i], expected[i], 1e-12);
    }
    EXPECT_EQ(lambdas_for_batch({5.0, 0.3, 1.0}, rank_losses(std::vector{1.0})), std::vector<double>{0.0});
}

TEST(LambdasForBatch, LargeScaleIsStepLike)
{
    // Quadrature oracle for I_x(20, 20) at x = 0.1 and x = 0.9.
    const double oracle_gap =
        (1.0 - oracle::inc_beta_quadrature(20.0, 20.0, 0.1)) - (1.0 - oracle::inc_beta_quadrature(20.0, 20.0, 0.9));
    EXPECT_GT(oracle_gap, 0.9);
    const PolicyParams params{40.0, 0.5, 1.0};
    const double gap = lambda_of_rank(params, 10, 100) - lambda_of_rank(params, 90, 100);
    EXPECT_NEAR(gap, oracle_gap, 1e-10);
    EXPECT_GT(gap, 0.9);
}

TEST(LambdaOfRank, NonIncreasingInRank)
{
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const PolicyParams params{std::exp(rng.uniform(0.0, std::log(200.0))), rng.uniform(0.05, 0.95), 1.0};
        const std::size_t b = 1 + static_cast<std::size_t>(rng.uniform_int(0, 127));
        double prev = 1.0;
        for (std::size_t r = 1; r <= b; ++r) {
            const double l = lambda_of_rank(params, r, b);
            ASSERT_LE(l, prev);
            ASSERT_GE(l, 0.0);
            prev = l;
        }
    }
}

TEST(LambdaOfRank, NonDecreasingInLocation)
{
    for (double s : {1.0, 2.0, 5.0, 20.0, 80.0, 200.0}) {
        for (std::size_t r = 1; r <= 32; ++r) {
            double prev = -1.0;
            for (int i = 1; i <= 9; ++i) {
                const double l = lambda_of_rank({s, 0.1 * i, 1.0}, r, 32);
                ASSERT_GE(l, prev) << "s=" << s << " rank=" << r << " a=" << 0.1 * i;
                prev = l;
            }
        }
    }
}

TEST(SampleSelection, EndpointsAndFrequency)
{
    Rng rng(99);
    for (int i = 0; i < 1000; ++i) {
        ASSERT_TRUE(sample_selection({2.0, 0.5, 1.0}, rng));
        ASSERT_FALSE(sample_selection({2.0, 0.5, 0.0}, rng));
    }
    Rng fixed(12345);
    int hits = 0;
    for (int i = 0; i < 10000; ++i) {
        hits += sample_selection({2.0, 0.5, 0.5}, fixed) ? 1 : 0;
    }
    EXPECT_GE(hits, 4800);
    EXPECT_LE(hits, 5200);
}

TEST(SampleSelection, DeterministicForSeed)
{
    Rng a(5);
    Rng b(5);
    for (int i = 0; i < 500; ++i) {
        ASSERT_EQ(sample_selection({2.0, 0.5, 0.3}, a), sample_selection({2.0, 0.5, 0.3}, b));
    }
}

TEST(PolicySet, IndexingAndValidation)
{
    PolicySet set(PolicyParams{3.0, 0.4, 0.2});
    set[AugmentationKind::CutMix].p = 0.9;
    EXPECT_DOUBLE_EQ(set[AugmentationKind::CutMix].p, 0.9);
    EXPECT_DOUBLE_EQ(set[AugmentationKind::TimeMask].p, 0.2);
    EXPECT_NO_THROW(set.validate());
    set[AugmentationKind::FreqMask].a = 0.0;
    EXPECT_THROW(set.validate(), InputError);
    for (auto kind : kAllAugmentations) {
        EXPECT_EQ(PolicySet::disabled()[kind].p, 0.0);
    }
}
