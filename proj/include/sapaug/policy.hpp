// Copyright 2026 The sapaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "betafn.hpp"
#include "errors.hpp"
#include "kinds.hpp"
#include "random.hpp"

namespace sapaug {

/// Hyper-parameters of one augmentation's policy.
///
/// `s` scales both beta shapes and controls how step-like the mapping is,
/// `a` is the mean of the underlying Beta distribution and shifts the
/// transition point, `p` is the probability of applying the augmentation.
struct PolicyParams {
    double s = 2.0;
    double a = 0.5;
    double p = 1.0;

    void validate() const
    {
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw InputError("policy: s must be positive and finite, got " + std::to_string(s));
        }
        if (!(a > 0.0 && a < 1.0)) {
            throw InputError("policy: a must lie in (0, 1), got " + std::to_string(a));
        }
        if (!(p >= 0.0 && p <= 1.0)) {
            throw InputError("policy: p must lie in [0, 1], got " + std::to_string(p));
        }
    }

    double shape_alpha() const { return s * a; }
    double shape_beta() const { return s * (1.0 - a); }

    friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

/// One PolicyParams per augmentation kind.
class PolicySet {
public:
    PolicySet() = default;
    explicit PolicySet(const PolicyParams& all) { entries_.fill(all); }

    PolicyParams& operator[](AugmentationKind kind) { return entries_[index_of(kind)]; }
    const PolicyParams& operator[](AugmentationKind kind) const { return entries_[index_of(kind)]; }

    void validate() const
    {
        for (const auto& e : entries_) {
            e.validate();
        }
    }

    /// Same (s, a) everywhere with every selection probability set to zero.
    static PolicySet disabled()
    {
        PolicySet set;
        for (auto& e : set.entries_) {
            e.p = 0.0;
        }
        return set;
    }

    friend bool operator==(const PolicySet&, const PolicySet&) = default;

private:
    std::array<PolicyParams, kNumAugmentations> entries_{};
};

/// Ascending loss ranks within a mini-batch; rank 1 is the smallest loss.
class LossRanking {
public:
    std::size_t batch_size() const { return ranks_.size(); }
    /// Rank of the sample at batch position i, in {1, ..., B}.
    std::size_t rank(std::size_t i) const { return ranks_.at(i); }
    const std::vector<std::size_t>& ranks() const { return ranks_; }

    static LossRanking from_ranks(std::vector<std::size_t> ranks)
    {
        std::vector<bool> seen(ranks.size(), false);
        for (auto r : ranks) {
            if (r < 1 || r > ranks.size() || seen[r - 1]) {
                throw InputError("LossRanking: ranks must be a permutation of 1..B");
            }
            seen[r - 1] = true;
        }
        if (ranks.empty()) {
            throw InputError("LossRanking: empty batch");
        }
        LossRanking out;
        out.ranks_ = std::move(ranks);
        return out;
    }

private:
    std::vector<std::size_t> ranks_;
};

/// Rank losses in ascending order, ties broken by batch position.
inline LossRanking rank_losses(std::span<const double> losses)
{
    if (losses.empty()) {
        throw InputError("rank_losses: empty batch");
    }
    for (double l : losses) {
        if (!std::isfinite(l)) {
            throw InputError("rank_losses: non-finite loss value");
        }
    }
    std::vector<std::size_t> order(losses.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return losses[i] < losses[j]; });
    std::vector<std::size_t> ranks(losses.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        ranks[order[pos]] = pos + 1;
    }
    return LossRanking::from_ranks(std::move(ranks));
}

/// Augmentation strength for a sample of rank `rank` in a batch of size
/// `batch`: 1 - I_{rank/B}(s*a, s*(1-a)). Decreasing in rank, increasing in a.
inline double lambda_of_rank(const PolicyParams& params, std::size_t rank, std::size_t batch)
{
    params.validate();
    if (batch == 0 || rank < 1 || rank > batch) {
        throw InputError("lambda_of_rank: rank " + std::to_string(rank) + " outside 1.." + std::to_string(batch));
    }
    const double x = static_cast<double>(rank) / static_cast<double>(batch);
    return 1.0 - inc_beta(params.shape_alpha(), params.shape_beta(), x);
}

inline std::vector<double> lambdas_for_batch(const PolicyParams& params, const LossRanking& ranking)
{
    std::vector<double> out;
    out.reserve(ranking.batch_size());
    for (auto r : ranking.ranks()) {
        out.push_back(lambda_of_rank(params, r, ranking.batch_size()));
    }
    return out;
}

/// Bernoulli(p) draw deciding whether the augmentation is applied at all.
inline bool sample_selection(const PolicyParams& params, Rng& rng) { return rng.bernoulli(params.p); }

} // namespace sapaug
