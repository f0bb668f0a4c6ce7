// Copyright 2026 The sapaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "augment.hpp"
#include "errors.hpp"
#include "featurize.hpp"
#include "kinds.hpp"
#include "policy.hpp"
#include "random.hpp"

namespace sapaug {

/// Settings shared by every sample in a batch.
struct PipelineConfig {
    std::size_t num_masks = 4;
    std::size_t n_cm = 6;
    std::uint64_t seed = 0;
};

struct BatchSample {
    Waveform waveform;
    int label = 0;
    /// Loss of the current model on the un-augmented sample.
    double clean_loss = 0.0;
    std::uint64_t id = 0;
};

/// What happens to one sample for one augmentation kind.
struct KindDecision {
    bool selected = false;
    double lambda = 0.0;
    AugmentationStrength strength;
    /// Partner sample id for the raw-domain mixing transforms.
    std::optional<std::uint64_t> partner;
};

struct SamplePlan {
    std::uint64_t id = 0;
    std::size_t rank = 1;
    std::array<KindDecision, kNumAugmentations> decisions{};

    const KindDecision& operator[](AugmentationKind kind) const { return decisions[index_of(kind)]; }
    KindDecision& operator[](AugmentationKind kind) { return decisions[index_of(kind)]; }

    bool any_selected() const
    {
        return std::ranges::any_of(decisions, [](const KindDecision& d) { return d.selected; });
    }
};

/// Per-sample decisions for one mini-batch, in batch order.
struct AugmentationPlan {
    std::uint64_t seed = 0;
    std::size_t batch_size = 0;
    std::vector<SamplePlan> samples;
};

namespace detail {

enum class StreamPurpose : std::uint64_t { Select = 1, Partner = 2, Apply = 3 };

inline Rng sample_stream(std::uint64_t seed, std::uint64_t id, AugmentationKind kind, StreamPurpose purpose)
{
    return Rng(derive_seed(seed, {id, index_of(kind), static_cast<std::uint64_t>(purpose)}));
}

} // namespace detail

/// Decisions for one sample given its rank. `others` are the ids of the
/// other samples in the batch, used to draw mixing partners; when empty the
/// sample is paired with itself.
inline SamplePlan plan_sample(std::uint64_t id, std::size_t rank, std::size_t batch_size, const PolicySet& policies,
                              std::uint64_t seed, std::span<const std::uint64_t> others)
{
    std::vector<std::uint64_t> candidates(others.begin(), others.end());
    std::ranges::sort(candidates);
    SamplePlan plan;
    plan.id = id;
    plan.rank = rank;
    for (auto kind : kAllAugmentations) {
        const auto& params = policies[kind];
        auto& d = plan[kind];
        d.lambda = lambda_of_rank(params, rank, batch_size);
        d.strength = map_lambda(kind, d.lambda);
        auto select_rng = detail::sample_stream(seed, id, kind, detail::StreamPurpose::Select);
        d.selected = sample_selection(params, select_rng);
        if (is_raw_domain(kind)) {
            if (candidates.empty()) {
                d.partner = id;
            } else {
                auto partner_rng = detail::sample_stream(seed, id, kind, detail::StreamPurpose::Partner);
                const auto pick = partner_rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1);
                d.partner = candidates[static_cast<std::size_t>(pick)];
            }
        }
    }
    return plan;
}

/// Rank the batch by clean loss and decide, per sample and augmentation,
/// whether it is applied and how strongly. Pure in (ids, losses, policies, seed).
inline AugmentationPlan plan_batch(std::span<const BatchSample> batch, const PolicySet& policies,
                                   const PipelineConfig& config)
{
    if (batch.empty()) {
        throw InputError("plan_batch: empty batch");
    }
    policies.validate();
    std::vector<double> losses;
    std::vector<std::uint64_t> ids;
    losses.reserve(batch.size());
    ids.reserve(batch.size());
    for (const auto& s : batch) {
        losses.push_back(s.clean_loss);
        ids.push_back(s.id);
    }
    if (std::set<std::uint64_t>(ids.begin(), ids.end()).size() != ids.size()) {
        throw InputError("plan_batch: sample ids must be unique within a batch");
    }
    const auto ranking = rank_losses(losses);

    AugmentationPlan plan;
    plan.seed = config.seed;
    plan.batch_size = batch.size();
    plan.samples.reserve(batch.size());
    std::vector<std::uint64_t> others;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        others.clear();
        for (std::size_t j = 0; j < batch.size(); ++j) {
            if (j != i) {
                others.push_back(ids[j]);
            }
        }
        plan.samples.push_back(plan_sample(ids[i], ranking.rank(i), batch.size(), policies, config.seed, others));
    }
    return plan;
}

/// Random draws made while applying a sample plan.
struct AppliedTrace {
    std::size_t cut_width = 0;
    std::vector<CutSegment> cut_segments;
    std::optional<double> stretch_ratio;
    std::vector<std::size_t> time_mask_starts;
    std::vector<std::size_t> freq_mask_starts;
};

struct AugmentedSample {
    /// Waveform after the raw-domain transforms.
    Waveform waveform;
    FeatureMatrix features;
    AppliedTrace trace;
};

/// Apply one sample's plan: pairing, CutMix, featurize, stretch, time masks,
/// frequency masks. Partners are the clean waveforms named in the plan. A
/// sample planned as its own partner (batch of one) skips the mixing step.
/// `clean_features`, if given, must equal featurizer(x) and is reused when no
/// raw-domain transform is selected.
inline AugmentedSample apply_sample(const Waveform& x, const SamplePlan& plan, const Waveform* pairing_partner,
                                    const Waveform* cutmix_partner, const PipelineConfig& config,
                                    Featurizer& featurizer, const FeatureMatrix* clean_features = nullptr)
{
    using enum AugmentationKind;
    AugmentedSample out;
    out.waveform = x;
    bool raw_changed = false;
    const auto mixes_with_other = [&](AugmentationKind kind) {
        return plan[kind].selected && plan[kind].partner != plan.id;
    };
    if (mixes_with_other(SamplePairing)) {
        if (pairing_partner == nullptr) {
            throw InputError("apply_sample: missing SamplePairing partner");
        }
        out.waveform = sample_pairing(out.waveform, *pairing_partner, plan[SamplePairing].strength.value);
        raw_changed = true;
    }
    if (mixes_with_other(CutMix)) {
        if (cutmix_partner == nullptr) {
            throw InputError("apply_sample: missing CutMix partner");
        }
        auto rng = detail::sample_stream(config.seed, plan.id, CutMix, detail::StreamPurpose::Apply);
        const auto w = plan[CutMix].strength.segment_samples();
        out.trace.cut_width = effective_cut_width(w, out.waveform.size(), cutmix_partner->size());
        out.trace.cut_segments =
            draw_cutmix_segments(out.waveform.size(), cutmix_partner->size(), w, config.n_cm, rng);
        out.waveform = cutmix_at(out.waveform, *cutmix_partner, out.trace.cut_width, out.trace.cut_segments);
        raw_changed = true;
    }

    if (!raw_changed && clean_features != nullptr) {
        out.features = *clean_features;
    } else {
        out.features = featurizer(out.waveform);
    }

    if (plan[TimeStretch].selected) {
        auto rng = detail::sample_stream(config.seed, plan.id, TimeStretch, detail::StreamPurpose::Apply);
        out.trace.stretch_ratio = draw_stretch_ratio(plan[TimeStretch].strength.value, rng);
        out.features = time_stretch_by(out.features, *out.trace.stretch_ratio);
    }
    if (plan[TimeMask].selected) {
        auto rng = detail::sample_stream(config.seed, plan.id, TimeMask, detail::StreamPurpose::Apply);
        const auto width = plan[TimeMask].strength.mask_width();
        out.trace.time_mask_starts = draw_mask_starts(out.features.frames(), width, config.num_masks, rng);
        out.features = time_mask_at(out.features, width, out.trace.time_mask_starts);
    }
    if (plan[FreqMask].selected) {
        auto rng = detail::sample_stream(config.seed, plan.id, FreqMask, detail::StreamPurpose::Apply);
        const auto width = plan[FreqMask].strength.mask_width();
        out.trace.freq_mask_starts = draw_mask_starts(out.features.bins(), width, config.num_masks, rng);
        out.features = freq_mask_at(out.features, width, out.trace.freq_mask_starts);
    }
    return out;
}

namespace detail {

inline const Waveform* find_waveform(std::span<const BatchSample> batch, std::optional<std::uint64_t> id)
{
    if (!id) {
        return nullptr;
    }
    for (const auto& s : batch) {
        if (s.id == *id) {
            return &s.waveform;
        }
    }
    throw InputError("apply_plan: partner id not in batch");
}

} // namespace detail

/// Apply a plan to the batch it was made for. Outputs follow batch order.
inline std::vector<AugmentedSample> apply_plan_traced(std::span<const BatchSample> batch, const AugmentationPlan& plan,
                                                      const PipelineConfig& config, Featurizer& featurizer)
{
    if (plan.samples.size() != batch.size()) {
        throw InputError("apply_plan: plan was made for a different batch");
    }
    std::vector<AugmentedSample> out;
    out.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& sp = plan.samples[i];
        if (sp.id != batch[i].id) {
            throw InputError("apply_plan: plan was made for a different batch");
        }
        const auto* pair = detail::find_waveform(batch, sp[AugmentationKind::SamplePairing].partner);
        const auto* cut = detail::find_waveform(batch, sp[AugmentationKind::CutMix].partner);
        out.push_back(apply_sample(batch[i].waveform, sp, pair, cut, config, featurizer));
    }
    return out;
}

inline std::vector<FeatureMatrix> apply_plan(std::span<const BatchSample> batch, const AugmentationPlan& plan,
                                             const PipelineConfig& config, const FeaturizerConfig& feat_config = {})
{
    if (batch.empty()) {
        return {};
    }
    Featurizer featurizer(feat_config, batch.front().waveform.sample_rate);
    auto traced = apply_plan_traced(batch, plan, config, featurizer);
    std::vector<FeatureMatrix> out;
    out.reserve(traced.size());
    for (auto& t : traced) {
        out.push_back(std::move(t.features));
    }
    return out;
}

} // namespace sapaug
