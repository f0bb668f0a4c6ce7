// Copyright 2026 The sapaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "augment.hpp"
#include "errors.hpp"
#include "featurize.hpp"
#include "kinds.hpp"
#include "pipeline.hpp"
#include "policy.hpp"
#include "random.hpp"
#include "search.hpp"

namespace sapaug::harness {

// --- synthetic data --------------------------------------------------------------

struct DatasetConfig {
    std::size_t train_size = 512;
    std::size_t validation_size = 256;
    std::size_t num_classes = 4;
    int sample_rate = 16000;
    double duration_s = 1.0;
    /// Relative jitter of each utterance's fundamental frequency.
    double pitch_jitter = 0.18;
    /// Standard deviation of the additive white noise.
    double noise_stddev = 0.08;
};

struct LabeledWaveform {
    Waveform waveform;
    int label = 0;
};

struct SyntheticDataset {
    DatasetConfig config;
    std::uint64_t seed = 0;
    std::vector<LabeledWaveform> train;
    std::vector<LabeledWaveform> validation;
};

/// Fundamental frequency (Hz) of class k's template.
inline double class_fundamental(std::size_t k) { return 260.0 * std::pow(1.45, static_cast<double>(k)); }

namespace detail {

/// One utterance of class `label`: a harmonic tone gliding upwards, with
/// per-utterance pitch, gain, onset and noise.
inline Waveform synthesize(std::size_t label, const DatasetConfig& cfg, Rng& rng)
{
    const auto n = static_cast<std::size_t>(std::lround(cfg.duration_s * cfg.sample_rate));
    Waveform w{std::vector<float>(n), cfg.sample_rate};
    const double f0 = class_fundamental(label) * (1.0 + cfg.pitch_jitter * (2.0 * rng.uniform() - 1.0));
    const double glide = 0.15 * rng.uniform();
    const double gain = 0.25 + 0.2 * rng.uniform();
    const std::array<double, 3> harmonics = {1.0, 0.5 + 0.3 * rng.uniform(), 0.25 + 0.2 * rng.uniform()};
    const double onset = 0.1 * rng.uniform();
    const double offset = 0.85 + 0.15 * rng.uniform();
    std::array<double, 3> phase{};
    for (auto& p : phase) {
        p = 2.0 * std::numbers::pi * rng.uniform();
    }
    const double sr = cfg.sample_rate;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sr;
        const double rel = t / cfg.duration_s;
        double v = 0.0;
        if (rel >= onset && rel <= offset) {
            // instantaneous frequency f0 * (1 + glide * rel)
            const double base_phase = 2.0 * std::numbers::pi * f0 * (t + 0.5 * glide * t * t / cfg.duration_s);
            for (std::size_t h = 0; h < harmonics.size(); ++h) {
                v += harmonics[h] * std::sin(static_cast<double>(h + 1) * base_phase + phase[h]);
            }
            v *= gain / 1.75;
        }
        v += cfg.noise_stddev * rng.normal();
        w.samples[i] = static_cast<float>(std::clamp(v, -1.0, 1.0));
    }
    return w;
}

inline std::vector<LabeledWaveform> make_split(std::size_t size, const DatasetConfig& cfg, std::uint64_t seed,
                                               std::uint64_t split)
{
    std::vector<LabeledWaveform> out;
    out.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        const std::size_t label = i % cfg.num_classes;
        Rng rng(derive_seed(seed, {split, i}));
        out.push_back({synthesize(label, cfg, rng), static_cast<int>(label)});
    }
    return out;
}

} // namespace detail

/// Class-balanced synthetic tone dataset; deterministic in `seed`.
inline SyntheticDataset generate_dataset(const DatasetConfig& cfg, std::uint64_t seed)
{
    if (cfg.train_size == 0 || cfg.validation_size == 0) {
        throw InputError("generate_dataset: split sizes must be positive");
    }
    if (cfg.num_classes < 2 || cfg.sample_rate <= 0 || !(cfg.duration_s > 0.0)) {
        throw InputError("generate_dataset: invalid configuration");
    }
    SyntheticDataset ds;
    ds.config = cfg;
    ds.seed = seed;
    ds.train = detail::make_split(cfg.train_size, cfg, seed, 1);
    ds.validation = detail::make_split(cfg.validation_size, cfg, seed, 2);
    return ds;
}

// --- model -----------------------------------------------------------------------

/// Multinomial logistic regression over time-averaged, standardized log-mel
/// features.
class TinyModel {
public:
    TinyModel(std::size_t inputs, std::size_t classes)
        : inputs_(inputs), classes_(classes), weights_(inputs * classes, 0.0), bias_(classes, 0.0)
    {
    }

    std::size_t inputs() const { return inputs_; }
    std::size_t classes() const { return classes_; }
    std::vector<double>& weights() { return weights_; }
    const std::vector<double>& weights() const { return weights_; }
    std::vector<double>& bias() { return bias_; }
    const std::vector<double>& bias() const { return bias_; }

    void init_random(Rng& rng, double scale)
    {
        for (auto& w : weights_) {
            w = scale * rng.normal();
        }
    }

    std::vector<double> logits(std::span<const double> x) const
    {
        std::vector<double> z(bias_);
        for (std::size_t k = 0; k < classes_; ++k) {
            const double* wk = weights_.data() + k * inputs_;
            for (std::size_t i = 0; i < inputs_; ++i) {
                z[k] += wk[i] * x[i];
            }
        }
        return z;
    }

    std::vector<double> probabilities(std::span<const double> x) const { return softmax(logits(x)); }

    /// Cross-entropy of one sample.
    double loss(std::span<const double> x, int label) const
    {
        const auto z = logits(x);
        const double m = *std::ranges::max_element(z);
        double s = 0.0;
        for (double v : z) {
            s += std::exp(v - m);
        }
        return m + std::log(s) - z[static_cast<std::size_t>(label)];
    }

    int predict(std::span<const double> x) const
    {
        const auto z = logits(x);
        return static_cast<int>(std::ranges::max_element(z) - z.begin());
    }

    /// Accumulate d loss / d params of one sample, scaled by `scale`.
    void accumulate_gradient(std::span<const double> x, int label, double scale, std::vector<double>& grad_w,
                             std::vector<double>& grad_b) const
    {
        auto p = probabilities(x);
        p[static_cast<std::size_t>(label)] -= 1.0;
        for (std::size_t k = 0; k < classes_; ++k) {
            grad_b[k] += scale * p[k];
            double* gk = grad_w.data() + k * inputs_;
            for (std::size_t i = 0; i < inputs_; ++i) {
                gk[i] += scale * p[k] * x[i];
            }
        }
    }

    bool finite() const
    {
        return std::ranges::all_of(weights_, [](double v) { return std::isfinite(v); }) &&
               std::ranges::all_of(bias_, [](double v) { return std::isfinite(v); });
    }

    static std::vector<double> softmax(std::vector<double> z)
    {
        const double m = *std::ranges::max_element(z);
        double s = 0.0;
        for (auto& v : z) {
            v = std::exp(v - m);
            s += v;
        }
        for (auto& v : z) {
            v /= s;
        }
        return z;
    }

private:
    std::size_t inputs_;
    std::size_t classes_;
    std::vector<double> weights_;
    std::vector<double> bias_;
};

// --- training --------------------------------------------------------------------

struct TrainConfig {
    std::size_t epochs = 5;
    std::size_t batch_size = 32;
    double learning_rate = 0.5;
    double init_scale = 0.01;
    std::size_t num_masks = 4;
    std::size_t n_cm = 6;
    FeaturizerConfig features;
};

struct TrainReport {
    double accuracy = 0.0;
    bool diverged = false;
    double final_mean_loss = 0.0;
    /// How often each augmentation was applied over the whole run.
    std::array<std::size_t, kNumAugmentations> applications{};
};

/// Mean over frames of every bin.
inline std::vector<double> pool_frames(const FeatureMatrix& m) { return m.bin_means(); }

/// Synthetic dataset with clean features precomputed. The training routine
/// is const and may run concurrently for different seeds or policies.
class Harness {
public:
    Harness(SyntheticDataset dataset, TrainConfig config) : dataset_(std::move(dataset)), config_(std::move(config))
    {
        Featurizer featurizer(config_.features, dataset_.config.sample_rate);
        for (const auto& s : dataset_.train) {
            train_features_.push_back(featurizer(s.waveform));
        }
        for (const auto& s : dataset_.validation) {
            validation_pooled_.push_back(pool_frames(featurizer(s.waveform)));
        }
        // Standardize with statistics of the clean training set.
        const std::size_t f = config_.features.num_mel;
        mean_.assign(f, 0.0);
        inv_std_.assign(f, 0.0);
        std::vector<std::vector<double>> pooled;
        for (const auto& m : train_features_) {
            pooled.push_back(pool_frames(m));
        }
        for (const auto& x : pooled) {
            for (std::size_t i = 0; i < f; ++i) {
                mean_[i] += x[i];
            }
        }
        for (auto& m : mean_) {
            m /= static_cast<double>(pooled.size());
        }
        std::vector<double> var(f, 0.0);
        for (const auto& x : pooled) {
            for (std::size_t i = 0; i < f; ++i) {
                var[i] += (x[i] - mean_[i]) * (x[i] - mean_[i]);
            }
        }
        for (std::size_t i = 0; i < f; ++i) {
            const double sd = std::sqrt(var[i] / static_cast<double>(pooled.size()));
            inv_std_[i] = sd > 1e-9 ? 1.0 / sd : 0.0;
        }
        for (auto& x : pooled) {
            normalize(x);
        }
        train_inputs_ = std::move(pooled);
        for (auto& x : validation_pooled_) {
            normalize(x);
        }
    }

    const SyntheticDataset& dataset() const { return dataset_; }
    const TrainConfig& config() const { return config_; }

    /// Mini-batch SGD under `policies`; returns final validation accuracy.
    /// Each step ranks the batch by clean loss, plans and applies the
    /// augmentations, then takes a gradient step on the augmented features.
    TrainReport train_and_evaluate(const PolicySet& policies, std::uint64_t seed) const
    {
        policies.validate();
        const std::size_t n_train = dataset_.train.size();
        const std::size_t f = config_.features.num_mel;
        const std::size_t k = dataset_.config.num_classes;
        TinyModel model(f, k);
        Rng init_rng(derive_seed(seed, {0x1417u}));
        model.init_random(init_rng, config_.init_scale);
        Featurizer featurizer(config_.features, dataset_.config.sample_rate);

        TrainReport report;
        std::vector<std::size_t> order(n_train);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::vector<double> grad_w(f * k);
        std::vector<double> grad_b(k);
        std::vector<BatchSample> batch;
        for (std::size_t epoch = 0; epoch < config_.epochs; ++epoch) {
            Rng shuffle_rng(derive_seed(seed, {0x5eedu, epoch}));
            for (std::size_t i = n_train; i > 1; --i) {
                const auto j = static_cast<std::size_t>(shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
                std::swap(order[i - 1], order[j]);
            }
            double epoch_loss = 0.0;
            for (std::size_t start = 0, step = 0; start < n_train; start += config_.batch_size, ++step) {
                const std::size_t end = std::min(n_train, start + config_.batch_size);
                batch.clear();
                for (std::size_t b = start; b < end; ++b) {
                    const auto idx = order[b];
                    const double l = model.loss(train_inputs_[idx], dataset_.train[idx].label);
                    if (!std::isfinite(l)) {
                        report.diverged = true;
                        return report;
                    }
                    batch.push_back({dataset_.train[idx].waveform, dataset_.train[idx].label, l, idx});
                    epoch_loss += l;
                }
                const PipelineConfig pcfg{config_.num_masks, config_.n_cm, derive_seed(seed, {epoch, step})};
                const auto plan = plan_batch(batch, policies, pcfg);

                std::ranges::fill(grad_w, 0.0);
                std::ranges::fill(grad_b, 0.0);
                const double scale = 1.0 / static_cast<double>(batch.size());
                for (std::size_t b = 0; b < batch.size(); ++b) {
                    const auto& sp = plan.samples[b];
                    const auto idx = static_cast<std::size_t>(batch[b].id);
                    std::vector<double> x;
                    if (sp.any_selected()) {
                        const auto* pair = pipeline_partner(batch, sp[AugmentationKind::SamplePairing].partner);
                        const auto* cut = pipeline_partner(batch, sp[AugmentationKind::CutMix].partner);
                        const auto aug = apply_sample(batch[b].waveform, sp, pair, cut, pcfg, featurizer,
                                                      &train_features_[idx]);
                        x = pool_frames(aug.features);
                        normalize(x);
                        for (auto kind : kAllAugmentations) {
                            report.applications[index_of(kind)] += sp[kind].selected ? 1 : 0;
                        }
                    } else {
                        x = train_inputs_[idx];
                    }
                    model.accumulate_gradient(x, batch[b].label, scale, grad_w, grad_b);
                }
                for (std::size_t i = 0; i < grad_w.size(); ++i) {
                    model.weights()[i] -= config_.learning_rate * grad_w[i];
                }
                for (std::size_t i = 0; i < grad_b.size(); ++i) {
                    model.bias()[i] -= config_.learning_rate * grad_b[i];
                }
                if (!model.finite()) {
                    report.diverged = true;
                    return report;
                }
            }
            report.final_mean_loss = epoch_loss / static_cast<double>(n_train);
        }
        std::size_t correct = 0;
        for (std::size_t i = 0; i < validation_pooled_.size(); ++i) {
            correct += model.predict(validation_pooled_[i]) == dataset_.validation[i].label ? 1 : 0;
        }
        report.accuracy = static_cast<double>(correct) / static_cast<double>(validation_pooled_.size());
        return report;
    }

    /// Validation accuracy; 0 when training diverged.
    double objective(const PolicySet& policies, std::uint64_t seed) const
    {
        const auto r = train_and_evaluate(policies, seed);
        return r.diverged ? 0.0 : r.accuracy;
    }

    /// Median objective over `seeds.size()` training runs.
    double median_objective(const PolicySet& policies, std::span<const std::uint64_t> seeds) const
    {
        std::vector<double> acc;
        for (auto s : seeds) {
            acc.push_back(objective(policies, s));
        }
        std::ranges::sort(acc);
        const std::size_t m = acc.size() / 2;
        return acc.size() % 2 == 1 ? acc[m] : 0.5 * (acc[m - 1] + acc[m]);
    }

private:
    static const Waveform* pipeline_partner(const std::vector<BatchSample>& batch, std::optional<std::uint64_t> id)
    {
        if (!id) {
            return nullptr;
        }
        for (const auto& s : batch) {
            if (s.id == *id) {
                return &s.waveform;
            }
        }
        return nullptr;
    }

    void normalize(std::vector<double>& x) const
    {
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = (x[i] - mean_[i]) * inv_std_[i];
        }
    }

    SyntheticDataset dataset_;
    TrainConfig config_;
    std::vector<FeatureMatrix> train_features_;
    std::vector<std::vector<double>> train_inputs_;
    std::vector<std::vector<double>> validation_pooled_;
    std::vector<double> mean_;
    std::vector<double> inv_std_;
};

// --- search-space adapter ----------------------------------------------------------

/// Build a PolicySet from a point of a space whose dimensions are named
/// s_<kind>, a_<kind> and p_<kind>.
inline PolicySet decode_policies(const search::SearchSpace& space, const search::Point& point)
{
    if (!space.contains(point)) {
        throw InputError("decode_policies: point outside the search space");
    }
    PolicySet set;
    for (auto kind : kAllAugmentations) {
        const auto name = std::string(to_string(kind));
        auto read = [&](const std::string& prefix) {
            const auto i = space.index_of(prefix + name);
            if (!i) {
                throw InputError("decode_policies: search space lacks '" + prefix + name + "'");
            }
            return point[*i];
        };
        set[kind] = PolicyParams{read("s_"), read("a_"), read("p_")};
    }
    set.validate();
    return set;
}

inline search::Point encode_policies(const search::SearchSpace& space, const PolicySet& set)
{
    search::Point point(space.size(), 0.0);
    for (auto kind : kAllAugmentations) {
        const auto name = std::string(to_string(kind));
        const auto& p = set[kind];
        for (auto [prefix, value] : {std::pair{"s_", p.s}, std::pair{"a_", p.a}, std::pair{"p_", p.p}}) {
            const auto i = space.index_of(prefix + name);
            if (!i) {
                throw InputError("encode_policies: search space lacks '" + std::string(prefix) + name + "'");
            }
            point[*i] = value;
        }
    }
    return point;
}

/// Search objective: median validation accuracy over three training seeds
/// derived from `base_seed`.
inline search::Objective make_objective(const Harness& harness, const search::SearchSpace& space,
                                        std::uint64_t base_seed)
{
    return [&harness, space, base_seed](const search::Point& point) {
        const auto policies = decode_policies(space, point);
        const std::array<std::uint64_t, 3> seeds = {base_seed, base_seed + 1, base_seed + 2};
        return harness.median_objective(policies, seeds);
    };
}

} // namespace sapaug::harness
