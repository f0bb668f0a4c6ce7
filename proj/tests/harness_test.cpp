// Copyright 2026 The sapaug Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <set>

#include "sapaug/harness.hpp"

using namespace sapaug;
using namespace sapaug::harness;

namespace {

/// Default-config harness, built once for the whole suite.
const Harness& default_harness()
{
    static const auto h = std::make_unique<Harness>(generate_dataset(DatasetConfig{}, 0), TrainConfig{});
    return *h;
}

const Harness& small_harness()
{
    static const auto h = [] {
        DatasetConfig cfg;
        cfg.train_size = 64;
        cfg.validation_size = 32;
        TrainConfig tc;
        tc.epochs = 2;
        return std::make_unique<Harness>(generate_dataset(cfg, 3), tc);
    }();
    return *h;
}

PolicySet uniform_policy(double s, double a, double p)
{
    PolicySet set;
    for (auto k : kAllAugmentations) {
        set[k] = PolicyParams{s, a, p};
    }
    return set;
}

} // namespace

// Pinned once from the default configuration and seed 0.
constexpr double kPinnedBaseline = 249.0 / 256.0;

TEST(Dataset, DeterministicAndBalanced)
{
    DatasetConfig cfg;
    cfg.train_size = 40;
    cfg.validation_size = 20;
    const auto a = generate_dataset(cfg, 7);
    const auto b = generate_dataset(cfg, 7);
    ASSERT_EQ(a.train.size(), 40u);
    ASSERT_EQ(a.validation.size(), 20u);
    for (std::size_t i = 0; i < a.train.size(); ++i) {
        ASSERT_EQ(a.train[i].waveform, b.train[i].waveform);
        ASSERT_EQ(a.train[i].label, b.train[i].label);
        ASSERT_EQ(a.train[i].waveform.size(), 16000u);
        ASSERT_EQ(a.train[i].waveform.sample_rate, 16000);
    }
    std::array<int, 4> counts{};
    for (const auto& s : a.train) {
        ++counts[static_cast<std::size_t>(s.label)];
    }
    EXPECT_EQ(counts, (std::array<int, 4>{10, 10, 10, 10}));
    const auto c = generate_dataset(cfg, 8);
    EXPECT_NE(a.train[0].waveform, c.train[0].waveform);
}

TEST(Dataset, EmptySplitRejected)
{
    DatasetConfig cfg;
    cfg.train_size = 0;
    EXPECT_THROW(generate_dataset(cfg, 0), InputError);
    cfg.train_size = 8;
    cfg.validation_size = 0;
    EXPECT_THROW(generate_dataset(cfg, 0), InputError);
}

TEST(Dataset, ClassesHaveDistinctDominantMelBins)
{
    DatasetConfig cfg;
    cfg.train_size = 32;
    cfg.validation_size = 4;
    const auto ds = generate_dataset(cfg, 1);
    std::vector<std::vector<double>> sums(4, std::vector<double>(80, 0.0));
    for (const auto& s : ds.train) {
        const auto pooled = pool_frames(featurize(s.waveform));
        for (std::size_t b = 0; b < 80; ++b) {
            sums[static_cast<std::size_t>(s.label)][b] += pooled[b];
        }
    }
    std::set<std::size_t> peaks;
    for (const auto& row : sums) {
        peaks.insert(static_cast<std::size_t>(std::ranges::max_element(row) - row.begin()));
    }
    EXPECT_EQ(peaks.size(), 4u);
}

TEST(TinyModel, SoftmaxSumsToOne)
{
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> z(5);
        for (auto& v : z) {
            v = 50.0 * rng.normal();
        }
        const auto p = TinyModel::softmax(z);
        double s = 0.0;
        for (double v : p) {
            ASSERT_GE(v, 0.0);
            s += v;
        }
        ASSERT_NEAR(s, 1.0, 1e-6);
    }
}

TEST(TinyModel, GradientMatchesFiniteDifferences)
{
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        TinyModel m(6, 3);
        m.init_random(rng, 1.0);
        for (auto& b : m.bias()) {
            b = rng.normal();
        }
        std::vector<double> x(6);
        for (auto& v : x) {
            v = rng.normal();
        }
        const int label = static_cast<int>(rng.uniform_int(0, 2));
        std::vector<double> gw(18, 0.0);
        std::vector<double> gb(3, 0.0);
        m.accumulate_gradient(x, label, 1.0, gw, gb);

        const double h = 1e-5;
        auto check = [&](double& param, double analytic) {
            const double saved = param;
            param = saved + h;
            const double up = m.loss(x, label);
            param = saved - h;
            const double down = m.loss(x, label);
            param = saved;
            const double numeric = (up - down) / (2.0 * h);
            ASSERT_LE(std::abs(numeric - analytic), 1e-5 * std::max(1.0, std::abs(numeric)));
        };
        for (std::size_t i = 0; i < gw.size(); ++i) {
            check(m.weights()[i], gw[i]);
        }
        for (std::size_t i = 0; i < gb.size(); ++i) {
            check(m.bias()[i], gb[i]);
        }
    }
}

TEST(TinyModel, LossIsPositiveAndFinite)
{
    TinyModel m(3, 4);
    Rng rng(3);
    m.init_random(rng, 100.0);
    const std::vector<double> x = {10.0, -20.0, 30.0};
    for (int label = 0; label < 4; ++label) {
        const double l = m.loss(x, label);
        EXPECT_TRUE(std::isfinite(l));
        EXPECT_GE(l, 0.0);
    }
}

TEST(Harness, BaselineAccuracyPinned)
{
    const auto r = default_harness().train_and_evaluate(PolicySet::disabled(), 0);
    EXPECT_FALSE(r.diverged);
    EXPECT_GE(r.accuracy, 0.95);
    EXPECT_NEAR(r.accuracy, kPinnedBaseline, 0.02);
    EXPECT_GT(r.final_mean_loss, 0.0);
    EXPECT_TRUE(std::isfinite(r.final_mean_loss));
    for (auto n : r.applications) {
        EXPECT_EQ(n, 0u);
    }
}

TEST(Harness, DisabledPolicyEqualsBaselineExactly)
{
    const auto& h = small_harness();
    auto zero_p = uniform_policy(37.0, 0.3, 0.0);
    const auto a = h.train_and_evaluate(PolicySet::disabled(), 11);
    const auto b = h.train_and_evaluate(zero_p, 11);
    EXPECT_EQ(a.accuracy, b.accuracy);
    EXPECT_EQ(a.final_mean_loss, b.final_mean_loss);
}

TEST(Harness, DeterministicForSeed)
{
    const auto& h = small_harness();
    const auto policy = uniform_policy(4.0, 0.6, 0.5);
    const auto a = h.train_and_evaluate(policy, 5);
    const auto b = h.train_and_evaluate(policy, 5);
    EXPECT_EQ(a.accuracy, b.accuracy);
    EXPECT_EQ(a.final_mean_loss, b.final_mean_loss);
    EXPECT_EQ(a.applications, b.applications);
    for (auto n : a.applications) {
        EXPECT_GT(n, 0u);
    }
}

TEST(Harness, DecodeEncodeRoundTrip)
{
    const auto space = search::SearchSpace::policy_space();
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        search::Point u(space.size());
        for (auto& c : u) {
            c = rng.uniform();
        }
        const auto v = space.from_unit(u);
        const auto back = encode_policies(space, decode_policies(space, v));
        for (std::size_t i = 0; i < v.size(); ++i) {
            ASSERT_NEAR(back[i], v[i], 1e-12);
        }
    }
    auto v = space.from_unit(search::Point(space.size(), 0.5));
    v[0] = 500.0;
    EXPECT_THROW(decode_policies(space, v), InputError);
    EXPECT_THROW(decode_policies(space, search::Point(3, 0.5)), InputError);
}

TEST(Harness, ObjectiveWithZeroProbabilitiesIsBaseline)
{
    const auto& h = small_harness();
    const auto space = search::SearchSpace::policy_space();
    auto v = space.from_unit(search::Point(space.size(), 0.7));
    for (auto kind : kAllAugmentations) {
        v[*space.index_of("p_" + std::string(to_string(kind)))] = 0.0;
    }
    const auto objective = make_objective(h, space, 100);
    const std::array<std::uint64_t, 3> seeds = {100, 101, 102};
    EXPECT_EQ(objective(v), h.median_objective(PolicySet::disabled(), seeds));
}

TEST(Harness, SearchRunExercisesEveryKind)
{
    const auto& h = small_harness();
    const auto space = search::SearchSpace::policy_space();
    search::OptimizerOptions opt;
    opt.n_init = 4;
    search::BayesianOptimizer bo(space, opt, 9);
    search::run_search(bo, make_objective(h, space, 0), 6, 2);
    std::array<std::size_t, kNumAugmentations> total{};
    for (const auto& t : bo.history().trials()) {
        ASSERT_TRUE(t.completed());
        ASSERT_GE(*t.objective, 0.0);
        ASSERT_LE(*t.objective, 1.0);
        const auto r = h.train_and_evaluate(decode_policies(space, t.point), 0);
        for (std::size_t k = 0; k < total.size(); ++k) {
            total[k] += r.applications[k];
        }
    }
    for (std::size_t k = 0; k < total.size(); ++k) {
        EXPECT_GT(total[k], 0u) << to_string(kAllAugmentations[k]);
    }
}
