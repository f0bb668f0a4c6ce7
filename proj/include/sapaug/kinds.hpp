// Copyright 2026 The sapaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace sapaug {

/// The five augmentations combined by the policy. The enumerator order is
/// also the order of the search-space vector and of the JSON policy keys.
enum class AugmentationKind : std::size_t {
    TimeMask = 0,
    FreqMask = 1,
    TimeStretch = 2,
    SamplePairing = 3,
    CutMix = 4,
};

inline constexpr std::size_t kNumAugmentations = 5;

inline constexpr std::array<AugmentationKind, kNumAugmentations> kAllAugmentations = {
    AugmentationKind::TimeMask,    AugmentationKind::FreqMask, AugmentationKind::TimeStretch,
    AugmentationKind::SamplePairing, AugmentationKind::CutMix,
};

constexpr std::size_t index_of(AugmentationKind kind) noexcept { return static_cast<std::size_t>(kind); }

constexpr std::string_view to_string(AugmentationKind kind) noexcept
{
    switch (kind) {
    case AugmentationKind::TimeMask:
        return "time_mask";
    case AugmentationKind::FreqMask:
        return "freq_mask";
    case AugmentationKind::TimeStretch:
        return "time_stretch";
    case AugmentationKind::SamplePairing:
        return "sample_pairing";
    case AugmentationKind::CutMix:
        return "cutmix";
    }
    return "unknown";
}

constexpr std::optional<AugmentationKind> kind_from_string(std::string_view name) noexcept
{
    for (auto kind : kAllAugmentations) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    return std::nullopt;
}

/// True for transforms that operate on raw waveforms.
constexpr bool is_raw_domain(AugmentationKind kind) noexcept
{
    return kind == AugmentationKind::SamplePairing || kind == AugmentationKind::CutMix;
}

} // namespace sapaug
