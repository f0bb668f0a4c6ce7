// Copyright 2026 The sapaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "augment.hpp"
#include "errors.hpp"

namespace sapaug {

struct FeaturizerConfig {
    double window_ms = 25.0;
    double hop_ms = 10.0;
    std::size_t num_mel = 80;
    double log_floor = 1e-10;
};

/// HTK mel scale.
inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Center frequencies (Hz) of the triangular mel filters spanning
/// [0, sample_rate / 2].
inline std::vector<double> mel_center_frequencies(std::size_t num_mel, double sample_rate)
{
    const double top = hz_to_mel(sample_rate / 2.0);
    std::vector<double> centers(num_mel);
    for (std::size_t m = 0; m < num_mel; ++m) {
        centers[m] = mel_to_hz(top * static_cast<double>(m + 1) / static_cast<double>(num_mel + 1));
    }
    return centers;
}

namespace detail {

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
struct FftwPlanDestroy {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};

// The FFTW planner is not thread-safe; execution with new arrays is.
inline std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

} // namespace detail

/// Log-mel front end: Hann-windowed frames, power spectrum, triangular mel
/// filterbank, natural log with a floor. Holds an FFT plan, so construct
/// once and reuse for many waveforms of the same sample rate.
class Featurizer {
public:
    Featurizer(const FeaturizerConfig& config, int sample_rate) : config_(config), sample_rate_(sample_rate)
    {
        if (sample_rate <= 0 || config.window_ms <= 0.0 || config.hop_ms <= 0.0 || config.num_mel < 1) {
            throw InputError("featurizer: invalid configuration");
        }
        window_ = static_cast<std::size_t>(std::lround(config.window_ms * sample_rate / 1000.0));
        hop_ = static_cast<std::size_t>(std::lround(config.hop_ms * sample_rate / 1000.0));
        if (window_ < 2 || hop_ < 1) {
            throw InputError("featurizer: window or hop shorter than one sample");
        }
        fft_size_ = 1;
        while (fft_size_ < window_) {
            fft_size_ <<= 1;
        }
        hann_.resize(window_);
        for (std::size_t n = 0; n < window_; ++n) {
            hann_[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                             static_cast<double>(window_));
        }
        build_filterbank();

        in_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * fft_size_)));
        out_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (fft_size_ / 2 + 1))));
        std::lock_guard lock(detail::fftw_planner_mutex());
        plan_.reset(fftw_plan_dft_r2c_1d(static_cast<int>(fft_size_), in_.get(), out_.get(), FFTW_ESTIMATE));
    }

    Featurizer(const Featurizer&) = delete;
    Featurizer& operator=(const Featurizer&) = delete;
    Featurizer(Featurizer&&) = default;
    Featurizer& operator=(Featurizer&&) = default;

    std::size_t window_samples() const { return window_; }
    std::size_t hop_samples() const { return hop_; }
    std::size_t fft_size() const { return fft_size_; }
    int sample_rate() const { return sample_rate_; }

    /// Number of frames produced for a waveform of `length` samples.
    std::size_t num_frames(std::size_t length) const
    {
        if (length < window_) {
            return 1;
        }
        return 1 + (length - window_) / hop_;
    }

    /// Not safe to call concurrently on the same object (scratch buffers).
    FeatureMatrix operator()(const Waveform& x)
    {
        x.validate();
        if (x.sample_rate != sample_rate_) {
            throw InputError("featurizer: sample rate mismatch");
        }
        const std::size_t frames = num_frames(x.size());
        const std::size_t n_bins = fft_size_ / 2 + 1;
        FeatureMatrix out(frames, config_.num_mel);
        out.frame_hop_ms = config_.hop_ms;
        out.frame_len_ms = config_.window_ms;
        std::vector<double> power(n_bins);
        for (std::size_t t = 0; t < frames; ++t) {
            const std::size_t offset = t * hop_;
            for (std::size_t n = 0; n < fft_size_; ++n) {
                const std::size_t src = offset + n;
                in_.get()[n] = (n < window_ && src < x.size()) ? hann_[n] * x.samples[src] : 0.0;
            }
            fftw_execute_dft_r2c(plan_.get(), in_.get(), out_.get());
            for (std::size_t k = 0; k < n_bins; ++k) {
                const double re = out_.get()[k][0];
                const double im = out_.get()[k][1];
                power[k] = re * re + im * im;
            }
            for (std::size_t m = 0; m < config_.num_mel; ++m) {
                const auto& filt = filters_[m];
                double energy = 0.0;
                for (std::size_t j = 0; j < filt.weights.size(); ++j) {
                    energy += filt.weights[j] * power[filt.first_bin + j];
                }
                out(t, m) = static_cast<float>(std::log(std::max(energy, config_.log_floor)));
            }
        }
        return out;
    }

private:
    struct MelFilter {
        std::size_t first_bin = 0;
        std::vector<double> weights;
    };

    void build_filterbank()
    {
        const double top = hz_to_mel(sample_rate_ / 2.0);
        const std::size_t n_bins = fft_size_ / 2 + 1;
        std::vector<double> edges(config_.num_mel + 2);
        for (std::size_t i = 0; i < edges.size(); ++i) {
            edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(config_.num_mel + 1));
        }
        filters_.resize(config_.num_mel);
        const double bin_hz = static_cast<double>(sample_rate_) / static_cast<double>(fft_size_);
        for (std::size_t m = 0; m < config_.num_mel; ++m) {
            const double lo = edges[m];
            const double mid = edges[m + 1];
            const double hi = edges[m + 2];
            auto& filt = filters_[m];
            bool started = false;
            for (std::size_t k = 0; k < n_bins; ++k) {
                const double f = static_cast<double>(k) * bin_hz;
                double w = 0.0;
                if (f > lo && f <= mid) {
                    w = (f - lo) / (mid - lo);
                } else if (f > mid && f < hi) {
                    w = (hi - f) / (hi - mid);
                }
                if (w > 0.0) {
                    if (!started) {
                        filt.first_bin = k;
                        started = true;
                    }
                    filt.weights.resize(k - filt.first_bin + 1, 0.0);
                    filt.weights.back() = w;
                }
            }
        }
    }

    FeaturizerConfig config_;
    int sample_rate_;
    std::size_t window_ = 0;
    std::size_t hop_ = 0;
    std::size_t fft_size_ = 0;
    std::vector<double> hann_;
    std::vector<MelFilter> filters_;
    std::unique_ptr<double, detail::FftwFree> in_;
    std::unique_ptr<fftw_complex, detail::FftwFree> out_;
    std::unique_ptr<fftw_plan_s, detail::FftwPlanDestroy> plan_;
};

/// One-shot convenience wrapper around Featurizer.
inline FeatureMatrix featurize(const Waveform& x, const FeaturizerConfig& config = {})
{
    Featurizer f(config, x.sample_rate);
    return f(x);
}

} // namespace sapaug
