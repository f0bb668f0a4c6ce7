// Copyright 2026 The sapaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "kinds.hpp"
#include "random.hpp"

namespace sapaug {

/// Mono PCM audio, samples nominally in [-1, 1].
struct Waveform {
    std::vector<float> samples;
    int sample_rate = 16000;

    std::size_t size() const { return samples.size(); }

    void validate() const
    {
        if (samples.empty()) {
            throw InputError("waveform: no samples");
        }
        if (sample_rate <= 0) {
            throw InputError("waveform: sample rate must be positive");
        }
    }

    friend bool operator==(const Waveform&, const Waveform&) = default;
};

/// T x F matrix of log-mel features, row-major (one row per frame).
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t frames, std::size_t bins, float fill = 0.0f)
        : frames_(frames), bins_(bins), data_(frames * bins, fill)
    {
    }
    FeatureMatrix(std::size_t frames, std::size_t bins, std::vector<float> data)
        : frames_(frames), bins_(bins), data_(std::move(data))
    {
        if (data_.size() != frames_ * bins_) {
            throw InputError("FeatureMatrix: data size does not match T x F");
        }
    }

    std::size_t frames() const { return frames_; }
    std::size_t bins() const { return bins_; }
    bool empty() const { return data_.empty(); }

    float& operator()(std::size_t t, std::size_t f) { return data_[t * bins_ + f]; }
    float operator()(std::size_t t, std::size_t f) const { return data_[t * bins_ + f]; }

    std::span<float> row(std::size_t t) { return {data_.data() + t * bins_, bins_}; }
    std::span<const float> row(std::size_t t) const { return {data_.data() + t * bins_, bins_}; }

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }

    void validate() const
    {
        if (frames_ < 1 || bins_ < 1) {
            throw InputError("FeatureMatrix: need at least one frame and one bin");
        }
        for (float v : data_) {
            if (!std::isfinite(v)) {
                throw InputError("FeatureMatrix: non-finite entry");
            }
        }
    }

    /// Per-bin mean over all frames.
    std::vector<double> bin_means() const
    {
        std::vector<double> sums(bins_, 0.0);
        for (std::size_t t = 0; t < frames_; ++t) {
            for (std::size_t f = 0; f < bins_; ++f) {
                sums[f] += (*this)(t, f);
            }
        }
        for (auto& s : sums) {
            s /= static_cast<double>(frames_);
        }
        return sums;
    }

    /// Per-frame mean over all bins.
    std::vector<double> frame_means() const
    {
        std::vector<double> sums(frames_, 0.0);
        for (std::size_t t = 0; t < frames_; ++t) {
            for (std::size_t f = 0; f < bins_; ++f) {
                sums[t] += (*this)(t, f);
            }
            sums[t] /= static_cast<double>(bins_);
        }
        return sums;
    }

    double frame_hop_ms = 10.0;
    double frame_len_ms = 25.0;

    friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b)
    {
        return a.frames_ == b.frames_ && a.bins_ == b.bins_ && a.data_ == b.data_;
    }

private:
    std::size_t frames_ = 0;
    std::size_t bins_ = 0;
    std::vector<float> data_;
};

/// Parameter value controlling one augmentation's magnitude.
struct AugmentationStrength {
    AugmentationKind kind = AugmentationKind::TimeMask;
    /// m_t / m_f (integral), rho0, lambda_sp or w depending on kind.
    double value = 0.0;

    std::size_t mask_width() const { return static_cast<std::size_t>(value); }
    /// CutMix segment width in samples.
    std::size_t segment_samples() const { return static_cast<std::size_t>(std::floor(value)); }

    friend bool operator==(const AugmentationStrength&, const AugmentationStrength&) = default;
};

/// Affine map from policy output lambda in [0, 1] to each augmentation's
/// parameter: mask widths floor(2 + 4 lambda), stretch bound 0.2 + 0.4 lambda,
/// pairing weight 0.1 lambda, CutMix width 1600 + 3200 lambda samples.
inline AugmentationStrength map_lambda(AugmentationKind kind, double lambda)
{
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw InputError("map_lambda: lambda must lie in [0, 1], got " + std::to_string(lambda));
    }
    double value = 0.0;
    switch (kind) {
    case AugmentationKind::TimeMask:
    case AugmentationKind::FreqMask:
        value = std::floor(2.0 + 4.0 * lambda);
        break;
    case AugmentationKind::TimeStretch:
        // lerp is exact at both endpoints and monotone.
        value = std::lerp(0.2, 0.6, lambda);
        break;
    case AugmentationKind::SamplePairing:
        value = 0.1 * lambda;
        break;
    case AugmentationKind::CutMix:
        value = 1600.0 + 3200.0 * lambda;
        break;
    }
    return {kind, value};
}

// --- masking -----------------------------------------------------------------

/// Uniform mask starts in [0, axis_len - width]; width is clamped to axis_len.
inline std::vector<std::size_t> draw_mask_starts(std::size_t axis_len, std::size_t width, std::size_t num_masks,
                                                 Rng& rng)
{
    width = std::min(width, axis_len);
    std::vector<std::size_t> starts;
    starts.reserve(num_masks);
    for (std::size_t k = 0; k < num_masks; ++k) {
        starts.push_back(static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(axis_len - width))));
    }
    return starts;
}

/// Fill frames [start, start + width) of every mask with the per-bin mean of
/// the input.
inline FeatureMatrix time_mask_at(const FeatureMatrix& feat, std::size_t width, std::span<const std::size_t> starts)
{
    width = std::min(width, feat.frames());
    const auto means = feat.bin_means();
    FeatureMatrix out = feat;
    for (auto start : starts) {
        if (start + width > feat.frames()) {
            throw InputError("time_mask: mask runs past the last frame");
        }
        for (std::size_t t = start; t < start + width; ++t) {
            for (std::size_t f = 0; f < feat.bins(); ++f) {
                out(t, f) = static_cast<float>(means[f]);
            }
        }
    }
    return out;
}

/// Fill bins [start, start + width) of every mask with the per-frame mean of
/// the input.
inline FeatureMatrix freq_mask_at(const FeatureMatrix& feat, std::size_t width, std::span<const std::size_t> starts)
{
    width = std::min(width, feat.bins());
    const auto means = feat.frame_means();
    FeatureMatrix out = feat;
    for (auto start : starts) {
        if (start + width > feat.bins()) {
            throw InputError("freq_mask: mask runs past the last bin");
        }
        for (std::size_t t = 0; t < feat.frames(); ++t) {
            for (std::size_t f = start; f < start + width; ++f) {
                out(t, f) = static_cast<float>(means[t]);
            }
        }
    }
    return out;
}

inline FeatureMatrix time_mask(const FeatureMatrix& feat, std::size_t m_t, std::size_t num_masks, Rng& rng)
{
    feat.validate();
    if (m_t < 1) {
        throw InputError("time_mask: mask width must be at least 1");
    }
    const auto starts = draw_mask_starts(feat.frames(), m_t, num_masks, rng);
    return time_mask_at(feat, m_t, starts);
}

inline FeatureMatrix freq_mask(const FeatureMatrix& feat, std::size_t m_f, std::size_t num_masks, Rng& rng)
{
    feat.validate();
    if (m_f < 1) {
        throw InputError("freq_mask: mask width must be at least 1");
    }
    const auto starts = draw_mask_starts(feat.bins(), m_f, num_masks, rng);
    return freq_mask_at(feat, m_f, starts);
}

// --- time stretching -----------------------------------------------------------

/// Source frame of every output frame: floor(i / (1 + rho)) for
/// i < floor((1 + rho) T). A zero-length result collapses to frame 0.
inline std::vector<std::size_t> stretch_source_indices(std::size_t frames, double rho)
{
    if (!(rho > -1.0) || !std::isfinite(rho)) {
        throw InputError("time_stretch: rho must be greater than -1");
    }
    const double factor = 1.0 + rho;
    auto out_len = static_cast<std::size_t>(std::floor(factor * static_cast<double>(frames)));
    if (out_len == 0) {
        return {0};
    }
    std::vector<std::size_t> idx(out_len);
    for (std::size_t i = 0; i < out_len; ++i) {
        const auto src = static_cast<std::size_t>(std::floor(static_cast<double>(i) / factor));
        idx[i] = std::min(src, frames - 1);
    }
    return idx;
}

inline FeatureMatrix time_stretch_by(const FeatureMatrix& feat, double rho)
{
    feat.validate();
    const auto idx = stretch_source_indices(feat.frames(), rho);
    FeatureMatrix out(idx.size(), feat.bins());
    out.frame_hop_ms = feat.frame_hop_ms;
    out.frame_len_ms = feat.frame_len_ms;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        std::ranges::copy(feat.row(idx[i]), out.row(i).begin());
    }
    return out;
}

/// rho ~ U(-rho0, rho0).
inline double draw_stretch_ratio(double rho0, Rng& rng)
{
    if (!(rho0 >= 0.0 && rho0 < 1.0)) {
        throw InputError("time_stretch: rho0 must lie in [0, 1), got " + std::to_string(rho0));
    }
    return rng.uniform(-rho0, rho0);
}

inline FeatureMatrix time_stretch(const FeatureMatrix& feat, double rho0, Rng& rng)
{
    return time_stretch_by(feat, draw_stretch_ratio(rho0, rng));
}

// --- raw waveform mixing -------------------------------------------------------

/// x_j repeated or truncated to `length` samples.
inline std::vector<float> tile_to_length(std::span<const float> x, std::size_t length)
{
    std::vector<float> out(length);
    for (std::size_t i = 0; i < length; ++i) {
        out[i] = x[i % x.size()];
    }
    return out;
}

/// (1 - lambda_sp) x_i + lambda_sp x_j, with x_j tiled or clipped to the
/// length of x_i and the result clipped to [-1, 1].
inline Waveform sample_pairing(const Waveform& x_i, const Waveform& x_j, double lambda_sp)
{
    x_i.validate();
    x_j.validate();
    if (x_i.sample_rate != x_j.sample_rate) {
        throw InputError("sample_pairing: sample rates differ");
    }
    if (!(lambda_sp >= 0.0 && lambda_sp <= 0.1)) {
        throw InputError("sample_pairing: lambda_sp must lie in [0, 0.1], got " + std::to_string(lambda_sp));
    }
    const auto partner = tile_to_length(x_j.samples, x_i.size());
    Waveform out{std::vector<float>(x_i.size()), x_i.sample_rate};
    for (std::size_t n = 0; n < x_i.size(); ++n) {
        const double mixed = (1.0 - lambda_sp) * x_i.samples[n] + lambda_sp * partner[n];
        out.samples[n] = static_cast<float>(std::clamp(mixed, -1.0, 1.0));
    }
    return out;
}

/// One replaced CutMix segment: x_i[dst, dst + w) <- x_j[src, src + w).
struct CutSegment {
    std::size_t dst = 0;
    std::size_t src = 0;

    friend bool operator==(const CutSegment&, const CutSegment&) = default;
};

/// Segment width after clamping to both waveform lengths.
inline std::size_t effective_cut_width(std::size_t w, std::size_t len_i, std::size_t len_j)
{
    return std::min({w, len_i, len_j});
}

inline std::vector<CutSegment> draw_cutmix_segments(std::size_t len_i, std::size_t len_j, std::size_t w,
                                                    std::size_t n_cm, Rng& rng)
{
    w = effective_cut_width(w, len_i, len_j);
    std::vector<CutSegment> segs;
    segs.reserve(n_cm);
    for (std::size_t k = 0; k < n_cm; ++k) {
        CutSegment seg;
        seg.dst = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(len_i - w)));
        seg.src = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(len_j - w)));
        segs.push_back(seg);
    }
    return segs;
}

/// Apply segments in order; later segments overwrite earlier ones.
inline Waveform cutmix_at(const Waveform& x_i, const Waveform& x_j, std::size_t w, std::span<const CutSegment> segs)
{
    Waveform out = x_i;
    for (const auto& seg : segs) {
        if (seg.dst + w > x_i.size() || seg.src + w > x_j.size()) {
            throw InputError("cutmix: segment out of range");
        }
        std::copy_n(x_j.samples.begin() + static_cast<std::ptrdiff_t>(seg.src), w,
                    out.samples.begin() + static_cast<std::ptrdiff_t>(seg.dst));
    }
    return out;
}

inline Waveform cutmix(const Waveform& x_i, const Waveform& x_j, std::size_t w, std::size_t n_cm, Rng& rng)
{
    x_i.validate();
    x_j.validate();
    if (x_i.sample_rate != x_j.sample_rate) {
        throw InputError("cutmix: sample rates differ");
    }
    if (w < 1) {
        throw InputError("cutmix: segment width must be at least 1");
    }
    const auto segs = draw_cutmix_segments(x_i.size(), x_j.size(), w, n_cm, rng);
    return cutmix_at(x_i, x_j, effective_cut_width(w, x_i.size(), x_j.size()), segs);
}

} // namespace sapaug
