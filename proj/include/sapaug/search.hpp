// Copyright 2026 The sapaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <chrono>
#include <functional>
#include <future>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "kinds.hpp"
#include "random.hpp"

namespace sapaug::search {

using Point = std::vector<double>;

enum class Scale { Linear, Log };

/// One box-bounded search dimension. Log-scale dimensions are searched
/// uniformly in log space.
struct Dimension {
    std::string name;
    double low = 0.0;
    double high = 1.0;
    Scale scale = Scale::Linear;

    void validate() const
    {
        if (!(low < high) || !std::isfinite(low) || !std::isfinite(high)) {
            throw InputError("search space: dimension '" + name + "' needs low < high");
        }
        if (scale == Scale::Log && !(low > 0.0)) {
            throw InputError("search space: log-scale dimension '" + name + "' must be strictly positive");
        }
    }

    double to_unit(double v) const
    {
        if (scale == Scale::Log) {
            return (std::log(v) - std::log(low)) / (std::log(high) - std::log(low));
        }
        return (v - low) / (high - low);
    }

    double from_unit(double u) const
    {
        u = std::clamp(u, 0.0, 1.0);
        if (scale == Scale::Log) {
            const double v = std::exp(std::log(low) + u * (std::log(high) - std::log(low)));
            return std::clamp(v, low, high);
        }
        return std::clamp(low + u * (high - low), low, high);
    }

    bool contains(double v) const { return v >= low && v <= high; }
};

class SearchSpace {
public:
    SearchSpace() = default;
    explicit SearchSpace(std::vector<Dimension> dims) : dims_(std::move(dims))
    {
        if (dims_.empty()) {
            throw InputError("search space: no dimensions");
        }
        for (std::size_t i = 0; i < dims_.size(); ++i) {
            dims_[i].validate();
            for (std::size_t j = 0; j < i; ++j) {
                if (dims_[j].name == dims_[i].name) {
                    throw InputError("search space: duplicate dimension '" + dims_[i].name + "'");
                }
            }
        }
    }

    std::size_t size() const { return dims_.size(); }
    const Dimension& operator[](std::size_t i) const { return dims_[i]; }
    const std::vector<Dimension>& dims() const { return dims_; }

    std::optional<std::size_t> index_of(std::string_view name) const
    {
        for (std::size_t i = 0; i < dims_.size(); ++i) {
            if (dims_[i].name == name) {
                return i;
            }
        }
        return std::nullopt;
    }

    bool contains(const Point& p) const
    {
        if (p.size() != dims_.size()) {
            return false;
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!dims_[i].contains(p[i])) {
                return false;
            }
        }
        return true;
    }

    Point to_unit(const Point& p) const
    {
        check_size(p);
        Point u(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            u[i] = dims_[i].to_unit(p[i]);
        }
        return u;
    }

    Point from_unit(const Point& u) const
    {
        check_size(u);
        Point p(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            p[i] = dims_[i].from_unit(u[i]);
        }
        return p;
    }

    /// Fifteen dimensions: s and a for every augmentation, then every p.
    /// s is log-scaled over [1, 200], a spans [0.05, 0.95], p spans [0, 1].
    static SearchSpace policy_space()
    {
        std::vector<Dimension> dims;
        for (auto kind : kAllAugmentations) {
            const auto name = std::string(to_string(kind));
            dims.push_back({"s_" + name, 1.0, 200.0, Scale::Log});
            dims.push_back({"a_" + name, 0.05, 0.95, Scale::Linear});
        }
        for (auto kind : kAllAugmentations) {
            dims.push_back({"p_" + std::string(to_string(kind)), 0.0, 1.0, Scale::Linear});
        }
        return SearchSpace(std::move(dims));
    }

    static SearchSpace from_json(const nlohmann::json& j)
    {
        try {
            std::vector<Dimension> dims;
            for (const auto& d : j.at("dims")) {
                Dimension dim;
                dim.name = d.at("name").get<std::string>();
                dim.low = d.at("low").get<double>();
                dim.high = d.at("high").get<double>();
                const auto scale = d.value("scale", std::string("linear"));
                if (scale == "log") {
                    dim.scale = Scale::Log;
                } else if (scale == "linear") {
                    dim.scale = Scale::Linear;
                } else {
                    throw InputError("search space: unknown scale '" + scale + "'");
                }
                dims.push_back(std::move(dim));
            }
            return SearchSpace(std::move(dims));
        } catch (const nlohmann::json::exception& e) {
            throw InputError(std::string("search space: ") + e.what());
        }
    }

    nlohmann::ordered_json to_json() const
    {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& d : dims_) {
            arr.push_back({{"name", d.name},
                           {"low", d.low},
                           {"high", d.high},
                           {"scale", d.scale == Scale::Log ? "log" : "linear"}});
        }
        return {{"dims", arr}};
    }

private:
    void check_size(const Point& p) const
    {
        if (p.size() != dims_.size()) {
            throw InputError("search space: point has " + std::to_string(p.size()) + " coordinates, expected " +
                             std::to_string(dims_.size()));
        }
    }

    std::vector<Dimension> dims_;
};

// --- trials --------------------------------------------------------------------

enum class TrialStatus { Suggested, Running, Completed };

struct Trial {
    std::uint64_t id = 0;
    Point point;
    std::optional<double> objective;
    TrialStatus status = TrialStatus::Suggested;

    bool completed() const { return status == TrialStatus::Completed; }
};

/// All trials of a search in id order. Ids are assigned densely from 0.
class TrialHistory {
public:
    std::uint64_t add_suggested(Point point)
    {
        const auto id = static_cast<std::uint64_t>(trials_.size());
        trials_.push_back({id, std::move(point), std::nullopt, TrialStatus::Suggested});
        return id;
    }

    void mark_running(std::uint64_t id)
    {
        auto& t = mutable_at(id);
        if (t.status == TrialStatus::Completed) {
            throw InputError("trial " + std::to_string(id) + " already completed");
        }
        t.status = TrialStatus::Running;
    }

    /// Record a result. Repeating an identical observation is a no-op.
    void observe(std::uint64_t id, double objective)
    {
        if (!std::isfinite(objective)) {
            throw InputError("observe: objective must be finite");
        }
        auto& t = mutable_at(id);
        if (t.status == TrialStatus::Completed) {
            if (t.objective != objective) {
                throw InputError("observe: trial " + std::to_string(id) + " already has a different objective");
            }
            return;
        }
        t.objective = objective;
        t.status = TrialStatus::Completed;
    }

    /// Completed trial with the largest objective; ties go to the lowest id.
    const Trial& best() const
    {
        const Trial* best = nullptr;
        for (const auto& t : trials_) {
            if (t.completed() && (best == nullptr || *t.objective > *best->objective)) {
                best = &t;
            }
        }
        if (best == nullptr) {
            throw StateError("best: no completed trials");
        }
        return *best;
    }

    std::vector<const Trial*> completed() const
    {
        std::vector<const Trial*> out;
        for (const auto& t : trials_) {
            if (t.completed()) {
                out.push_back(&t);
            }
        }
        return out;
    }

    std::vector<const Trial*> pending() const
    {
        std::vector<const Trial*> out;
        for (const auto& t : trials_) {
            if (!t.completed()) {
                out.push_back(&t);
            }
        }
        return out;
    }

    std::size_t size() const { return trials_.size(); }
    const std::vector<Trial>& trials() const { return trials_; }

    const Trial& at(std::uint64_t id) const
    {
        if (id >= trials_.size()) {
            throw InputError("unknown trial id " + std::to_string(id));
        }
        return trials_[id];
    }

private:
    Trial& mutable_at(std::uint64_t id)
    {
        if (id >= trials_.size()) {
            throw InputError("unknown trial id " + std::to_string(id));
        }
        return trials_[id];
    }

    std::vector<Trial> trials_;
};

// --- Gaussian process ----------------------------------------------------------

/// Kernel hyper-parameters, all in log space.
struct GpHyperparameters {
    std::vector<double> log_lengthscales;
    double log_signal_variance = 0.0;
    double log_noise_variance = std::log(1e-4);
};

struct GpFitOptions {
    std::size_t restarts = 3;
    double min_lengthscale = 0.01;
    double max_lengthscale = 10.0;
    double min_signal_variance = 0.01;
    double max_signal_variance = 100.0;
    double min_noise_variance = 1e-8;
    double max_noise_variance = 2.0;
    /// Log-space step below which the local search stops.
    double min_step = 1e-3;
    std::size_t max_evaluations = 1500;
};

struct GpPrediction {
    double mean = 0.0;
    double stddev = 0.0;
};

inline constexpr std::array<double, 8> kJitterLadder = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4};

/// Gaussian-process regression with a squared-exponential ARD kernel on
/// unit-cube inputs and standardized targets.
class GpModel {
public:
    /// Posterior for fixed hyper-parameters.
    static GpModel condition(const std::vector<Point>& unit_inputs, const std::vector<double>& targets,
                             const GpHyperparameters& hyper)
    {
        GpModel m;
        m.init_data(unit_inputs, targets);
        if (hyper.log_lengthscales.size() != m.dim_) {
            throw InputError("GpModel: lengthscale count does not match input dimension");
        }
        m.hyper_ = hyper;
        if (!m.factorize()) {
            throw NumericalError(m.failure_diagnostics());
        }
        return m;
    }

    /// Hyper-parameters chosen by maximizing the log marginal likelihood with
    /// a multi-start pattern search.
    static GpModel fit(const std::vector<Point>& unit_inputs, const std::vector<double>& targets,
                       const GpFitOptions& options, Rng& rng)
    {
        GpModel m;
        m.init_data(unit_inputs, targets);
        m.optimize(options, rng);
        if (!m.factorize()) {
            throw NumericalError(m.failure_diagnostics());
        }
        return m;
    }

    /// Posterior of the latent function, in original target units.
    GpPrediction predict(const Point& unit_point) const
    {
        if (unit_point.size() != dim_) {
            throw InputError("GpModel: point dimension mismatch");
        }
        Eigen::VectorXd k(n());
        const double sf2 = std::exp(hyper_.log_signal_variance);
        for (Eigen::Index i = 0; i < n(); ++i) {
            k(i) = kernel(inputs_.row(i), unit_point, sf2);
        }
        const double mean_std = k.dot(alpha_);
        const Eigen::VectorXd v = chol_.matrixL().solve(k);
        const double var_std = std::max(0.0, sf2 - v.squaredNorm());
        return {target_mean_ + target_scale_ * mean_std, target_scale_ * std::sqrt(var_std)};
    }

    double log_marginal_likelihood() const { return lml_; }
    const GpHyperparameters& hyperparameters() const { return hyper_; }
    double noise_variance() const { return std::exp(hyper_.log_noise_variance); }
    /// Observation noise standard deviation in original target units.
    double noise_stddev() const { return target_scale_ * std::sqrt(noise_variance() + jitter_); }
    double target_mean() const { return target_mean_; }
    double target_scale() const { return target_scale_; }
    double jitter() const { return jitter_; }
    std::size_t dimension() const { return dim_; }
    Eigen::Index n() const { return inputs_.rows(); }

private:
    void init_data(const std::vector<Point>& unit_inputs, const std::vector<double>& targets)
    {
        if (unit_inputs.empty() || unit_inputs.size() != targets.size()) {
            throw InputError("GpModel: need at least one input with a matching target");
        }
        dim_ = unit_inputs.front().size();
        if (dim_ == 0) {
            throw InputError("GpModel: zero-dimensional inputs");
        }
        const auto count = static_cast<Eigen::Index>(unit_inputs.size());
        inputs_.resize(count, static_cast<Eigen::Index>(dim_));
        for (Eigen::Index i = 0; i < count; ++i) {
            if (unit_inputs[static_cast<std::size_t>(i)].size() != dim_) {
                throw InputError("GpModel: inconsistent input dimensions");
            }
            for (std::size_t d = 0; d < dim_; ++d) {
                inputs_(i, static_cast<Eigen::Index>(d)) = unit_inputs[static_cast<std::size_t>(i)][d];
            }
        }
        double mean = 0.0;
        for (double y : targets) {
            if (!std::isfinite(y)) {
                throw InputError("GpModel: non-finite target");
            }
            mean += y;
        }
        mean /= static_cast<double>(targets.size());
        double var = 0.0;
        for (double y : targets) {
            var += (y - mean) * (y - mean);
        }
        var /= static_cast<double>(targets.size());
        target_mean_ = mean;
        target_scale_ = var > 1e-24 ? std::sqrt(var) : 1.0;
        y_.resize(count);
        for (Eigen::Index i = 0; i < count; ++i) {
            y_(i) = (targets[static_cast<std::size_t>(i)] - target_mean_) / target_scale_;
        }
        hyper_.log_lengthscales.assign(dim_, std::log(0.3));
    }

    template <typename RowA, typename RowB>
    double kernel(const RowA& a, const RowB& b, double sf2) const
    {
        double r2 = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) {
            const double diff = (a(static_cast<Eigen::Index>(d)) - b[d]) * inv_ls_[d];
            r2 += diff * diff;
        }
        return sf2 * std::exp(-0.5 * r2);
    }

    double kernel_rows(Eigen::Index i, Eigen::Index j, double sf2) const
    {
        double r2 = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) {
            const auto dd = static_cast<Eigen::Index>(d);
            const double diff = (inputs_(i, dd) - inputs_(j, dd)) * inv_ls_[d];
            r2 += diff * diff;
        }
        return sf2 * std::exp(-0.5 * r2);
    }

    /// Cholesky of K + (noise + jitter) I, climbing the jitter ladder on
    /// failure. Updates alpha and the log marginal likelihood.
    bool factorize()
    {
        inv_ls_.resize(dim_);
        for (std::size_t d = 0; d < dim_; ++d) {
            inv_ls_[d] = std::exp(-hyper_.log_lengthscales[d]);
        }
        const double sf2 = std::exp(hyper_.log_signal_variance);
        const double sn2 = std::exp(hyper_.log_noise_variance);
        Eigen::MatrixXd k(n(), n());
        for (Eigen::Index i = 0; i < n(); ++i) {
            k(i, i) = sf2;
            for (Eigen::Index j = 0; j < i; ++j) {
                k(i, j) = k(j, i) = kernel_rows(i, j, sf2);
            }
        }
        for (double jitter : kJitterLadder) {
            Eigen::MatrixXd kn = k;
            kn.diagonal().array() += sn2 + jitter;
            chol_.compute(kn);
            if (chol_.info() == Eigen::Success) {
                jitter_ = jitter;
                alpha_ = chol_.solve(y_);
                const auto& l = chol_.matrixLLT();
                double log_det = 0.0;
                for (Eigen::Index i = 0; i < n(); ++i) {
                    log_det += std::log(l(i, i));
                }
                lml_ = -0.5 * y_.dot(alpha_) - log_det - 0.5 * static_cast<double>(n()) * std::log(2.0 * std::numbers::pi);
                return true;
            }
        }
        lml_ = -std::numeric_limits<double>::infinity();
        return false;
    }

    std::string failure_diagnostics() const
    {
        std::ostringstream os;
        os << "GP covariance not positive definite after jitter " << kJitterLadder.back() << " (n=" << n()
           << ", dim=" << dim_ << ", log signal var=" << hyper_.log_signal_variance
           << ", log noise var=" << hyper_.log_noise_variance << ")";
        return os.str();
    }

    std::vector<double> pack() const
    {
        std::vector<double> theta = hyper_.log_lengthscales;
        theta.push_back(hyper_.log_signal_variance);
        theta.push_back(hyper_.log_noise_variance);
        return theta;
    }

    void unpack(const std::vector<double>& theta)
    {
        std::copy_n(theta.begin(), dim_, hyper_.log_lengthscales.begin());
        hyper_.log_signal_variance = theta[dim_];
        hyper_.log_noise_variance = theta[dim_ + 1];
    }

    double evaluate(const std::vector<double>& theta)
    {
        unpack(theta);
        return factorize() ? lml_ : -std::numeric_limits<double>::infinity();
    }

    void optimize(const GpFitOptions& opt, Rng& rng)
    {
        const std::size_t p = dim_ + 2;
        std::vector<double> lo(p);
        std::vector<double> hi(p);
        for (std::size_t d = 0; d < dim_; ++d) {
            lo[d] = std::log(opt.min_lengthscale);
            hi[d] = std::log(opt.max_lengthscale);
        }
        lo[dim_] = std::log(opt.min_signal_variance);
        hi[dim_] = std::log(opt.max_signal_variance);
        lo[dim_ + 1] = std::log(opt.min_noise_variance);
        hi[dim_ + 1] = std::log(opt.max_noise_variance);

        std::vector<std::vector<double>> starts;
        {
            std::vector<double> s(p, std::log(0.3));
            s[dim_] = 0.0;
            s[dim_ + 1] = std::log(1e-4);
            starts.push_back(s);
        }
        for (std::size_t r = 0; r < opt.restarts; ++r) {
            std::vector<double> s(p);
            for (std::size_t i = 0; i < p; ++i) {
                s[i] = rng.uniform(lo[i], hi[i]);
            }
            starts.push_back(s);
        }

        std::vector<double> best_theta = starts.front();
        double best_val = -std::numeric_limits<double>::infinity();
        for (auto theta : starts) {
            for (std::size_t i = 0; i < p; ++i) {
                theta[i] = std::clamp(theta[i], lo[i], hi[i]);
            }
            double val = evaluate(theta);
            double step = 1.0;
            std::size_t evals = 1;
            // Coordinate pattern search: accept improving moves, halve the
            // step when a full sweep makes no progress.
            while (step >= opt.min_step && evals < opt.max_evaluations) {
                bool improved = false;
                for (std::size_t i = 0; i < p && evals < opt.max_evaluations; ++i) {
                    for (double dir : {1.0, -1.0}) {
                        auto trial = theta;
                        trial[i] = std::clamp(theta[i] + dir * step, lo[i], hi[i]);
                        if (trial[i] == theta[i]) {
                            continue;
                        }
                        const double v = evaluate(trial);
                        ++evals;
                        if (v > val) {
                            val = v;
                            theta = trial;
                            improved = true;
                            break;
                        }
                    }
                }
                if (!improved) {
                    step *= 0.5;
                }
            }
            if (val > best_val) {
                best_val = val;
                best_theta = theta;
            }
        }
        unpack(best_theta);
    }

    std::size_t dim_ = 0;
    Eigen::MatrixXd inputs_;
    Eigen::VectorXd y_;
    double target_mean_ = 0.0;
    double target_scale_ = 1.0;
    GpHyperparameters hyper_;
    std::vector<double> inv_ls_;
    Eigen::LLT<Eigen::MatrixXd> chol_;
    Eigen::VectorXd alpha_;
    double jitter_ = 0.0;
    double lml_ = 0.0;
};

/// Fit a GP to the completed trials of a history.
inline GpModel fit_gp(const TrialHistory& history, const SearchSpace& space, const GpFitOptions& options, Rng& rng)
{
    std::vector<Point> xs;
    std::vector<double> ys;
    for (const auto* t : history.completed()) {
        xs.push_back(space.to_unit(t->point));
        ys.push_back(*t->objective);
    }
    if (xs.empty()) {
        throw StateError("fit_gp: no completed trials");
    }
    return GpModel::fit(xs, ys, options, rng);
}

// --- acquisition -----------------------------------------------------------------

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// E[max(0, f - best)] for f ~ N(mean, stddev^2).
inline double expected_improvement(double mean, double stddev, double best_so_far)
{
    const double gain = mean - best_so_far;
    if (!(stddev > 1e-12)) {
        return std::max(0.0, gain);
    }
    const double z = gain / stddev;
    return std::max(0.0, gain * normal_cdf(z) + stddev * normal_pdf(z));
}

inline double expected_improvement(const GpModel& model, const Point& unit_point, double best_so_far)
{
    const auto pred = model.predict(unit_point);
    return expected_improvement(pred.mean, pred.stddev, best_so_far);
}

// --- suggestion ------------------------------------------------------------------

/// Value assigned to pending points while a parallel batch is built.
enum class LieStrategy { Max, Min, Mean };

struct OptimizerOptions {
    std::size_t n_init = 10;
    std::size_t max_batch = 64;
    LieStrategy lie = LieStrategy::Max;
    std::size_t ei_probes = 2048;
    std::size_t ei_refine_starts = 8;
    /// Minimum normalized distance between a suggestion and any known point.
    double min_separation = 1e-6;
    /// Seed of the random shift applied to the initial Halton design.
    std::uint64_t init_sequence_seed = 0;
    GpFitOptions gp;
};

namespace detail {

inline constexpr std::array<int, 32> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,  37,  41,  43,  47,  53,
                                                59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

inline double radical_inverse(std::uint64_t index, int base)
{
    double result = 0.0;
    double f = 1.0 / base;
    while (index > 0) {
        result += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
        index /= static_cast<std::uint64_t>(base);
        f /= base;
    }
    return result;
}

/// Halton point `index` with a random Cranley-Patterson shift per axis.
inline Point shifted_halton(std::uint64_t index, const std::vector<double>& shift)
{
    Point u(shift.size());
    for (std::size_t d = 0; d < shift.size(); ++d) {
        const int base = d < kPrimes.size() ? kPrimes[d] : kPrimes[d % kPrimes.size()] + 2 * static_cast<int>(d);
        double v = radical_inverse(index + 1, base) + shift[d];
        u[d] = v - std::floor(v);
    }
    return u;
}

inline double sq_distance(const Point& a, const Point& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return s;
}

inline bool far_from_all(const Point& p, const std::vector<Point>& known, double min_sep)
{
    return std::ranges::all_of(known, [&](const Point& k) { return sq_distance(p, k) > min_sep * min_sep; });
}

struct Scored {
    Point u;
    double ei = 0.0;
    double stddev = 0.0;

    bool better_than(const Scored& o) const { return ei > o.ei || (ei == o.ei && stddev > o.stddev); }
};

inline Scored score(const GpModel& model, Point u, double best)
{
    const auto pred = model.predict(u);
    return {std::move(u), expected_improvement(pred.mean, pred.stddev, best), pred.stddev};
}

/// Maximize EI over the unit cube: random probes, then coordinate search
/// from the best few. Points within `min_sep` of `known` are never returned.
inline Point maximize_ei(const GpModel& model, double best, const std::vector<Point>& known,
                         const OptimizerOptions& opt, Rng& rng)
{
    const std::size_t dim = model.dimension();
    std::vector<Scored> probes;
    probes.reserve(opt.ei_probes);
    for (std::size_t k = 0; k < opt.ei_probes; ++k) {
        Point u(dim);
        for (auto& c : u) {
            c = rng.uniform();
        }
        if (far_from_all(u, known, opt.min_separation)) {
            probes.push_back(score(model, std::move(u), best));
        }
    }
    if (probes.empty()) {
        throw NumericalError("maximize_ei: no admissible probe points");
    }
    const std::size_t n_refine = std::min(opt.ei_refine_starts, probes.size());
    std::partial_sort(probes.begin(), probes.begin() + static_cast<std::ptrdiff_t>(n_refine), probes.end(),
                      [](const Scored& a, const Scored& b) { return a.better_than(b); });

    Scored overall = probes.front();
    for (std::size_t s = 0; s < n_refine; ++s) {
        Scored cur = probes[s];
        double step = 0.05;
        std::size_t iters = 0;
        while (step > 1e-4 && iters < 200) {
            ++iters;
            bool improved = false;
            for (std::size_t d = 0; d < dim; ++d) {
                for (double dir : {1.0, -1.0}) {
                    Point u = cur.u;
                    u[d] = std::clamp(u[d] + dir * step, 0.0, 1.0);
                    if (u[d] == cur.u[d] || !far_from_all(u, known, opt.min_separation)) {
                        continue;
                    }
                    auto cand = score(model, std::move(u), best);
                    if (cand.better_than(cur)) {
                        cur = std::move(cand);
                        improved = true;
                        break;
                    }
                }
            }
            if (!improved) {
                step *= 0.5;
            }
        }
        if (cur.better_than(overall)) {
            overall = std::move(cur);
        }
    }
    return overall.u;
}

inline double lie_value(const std::vector<double>& ys, LieStrategy lie)
{
    switch (lie) {
    case LieStrategy::Max:
        return *std::ranges::max_element(ys);
    case LieStrategy::Min:
        return *std::ranges::min_element(ys);
    case LieStrategy::Mean: {
        double s = 0.0;
        for (double y : ys) {
            s += y;
        }
        return s / static_cast<double>(ys.size());
    }
    }
    return ys.front();
}

} // namespace detail

/// Propose `q` new points (in search-space coordinates) without registering
/// them. Until `n_init` trials have completed the points come from a
/// shifted Halton sequence. Afterwards each point maximizes expected
/// improvement of a GP fitted to the completed trials, where pending
/// trials and the points already chosen for this batch carry a constant
/// lie value.
inline std::vector<Point> suggest(const TrialHistory& history, const SearchSpace& space, std::size_t q,
                                  const OptimizerOptions& options, Rng& rng)
{
    if (q < 1 || q > options.max_batch) {
        throw InputError("suggest: batch size must lie in 1.." + std::to_string(options.max_batch));
    }
    const auto completed = history.completed();
    std::vector<Point> out;
    out.reserve(q);

    if (completed.size() < options.n_init) {
        std::vector<double> shift(space.size());
        // Fixed per run so that consecutive calls walk one sequence.
        Rng shift_rng(options.init_sequence_seed);
        for (auto& s : shift) {
            s = shift_rng.uniform();
        }
        for (std::size_t k = 0; k < q; ++k) {
            out.push_back(space.from_unit(detail::shifted_halton(history.size() + k, shift)));
        }
        return out;
    }

    std::vector<Point> xs;
    std::vector<double> ys;
    for (const auto* t : completed) {
        xs.push_back(space.to_unit(t->point));
        ys.push_back(*t->objective);
    }
    const double lie = detail::lie_value(ys, options.lie);
    for (const auto* t : history.pending()) {
        xs.push_back(space.to_unit(t->point));
        ys.push_back(lie);
    }

    const std::size_t n_completed = completed.size();
    std::vector<Point> fit_x(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(n_completed));
    std::vector<double> fit_y(ys.begin(), ys.begin() + static_cast<std::ptrdiff_t>(n_completed));
    const auto hyper = GpModel::fit(fit_x, fit_y, options.gp, rng).hyperparameters();

    for (std::size_t k = 0; k < q; ++k) {
        const auto model = GpModel::condition(xs, ys, hyper);
        const double best = *std::ranges::max_element(ys);
        auto u = detail::maximize_ei(model, best, xs, options, rng);
        out.push_back(space.from_unit(u));
        xs.push_back(std::move(u));
        ys.push_back(lie);
    }
    return out;
}

/// Suggest/observe loop over a TrialHistory. Not thread-safe: suggestion
/// and observation must be serialized by the caller, while evaluations of
/// suggested trials may run in parallel.
class BayesianOptimizer {
public:
    BayesianOptimizer(SearchSpace space, OptimizerOptions options, std::uint64_t seed)
        : space_(std::move(space)), options_(options), seed_(seed)
    {
        options_.init_sequence_seed = derive_seed(seed, {0x4a17u});
    }

    /// Suggest and register `q` trials. The random stream for a call is
    /// derived from the seed and the history size, so a history replayed
    /// from a log continues with the same suggestions.
    std::vector<std::uint64_t> suggest(std::size_t q)
    {
        Rng rng(derive_seed(seed_, {history_.size()}));
        auto points = search::suggest(history_, space_, q, options_, rng);
        std::vector<std::uint64_t> ids;
        for (auto& p : points) {
            ids.push_back(history_.add_suggested(std::move(p)));
        }
        return ids;
    }

    void observe(std::uint64_t id, double objective) { history_.observe(id, objective); }
    const Trial& best() const { return history_.best(); }

    const TrialHistory& history() const { return history_; }
    TrialHistory& history() { return history_; }
    const SearchSpace& space() const { return space_; }
    const OptimizerOptions& options() const { return options_; }

private:
    SearchSpace space_;
    OptimizerOptions options_;
    std::uint64_t seed_;
    TrialHistory history_;
};

// --- trial log -------------------------------------------------------------------

inline double unix_time_now()
{
    using namespace std::chrono;
    return duration_cast<duration<double>>(system_clock::now().time_since_epoch()).count();
}

/// One JSON object per line: {"event","id","point","objective","timestamp"}.
inline std::string log_line(const SearchSpace& space, const Trial& trial, std::string_view event, double timestamp)
{
    nlohmann::ordered_json point = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < space.size(); ++i) {
        point[space[i].name] = trial.point[i];
    }
    nlohmann::ordered_json j;
    j["event"] = event;
    j["id"] = trial.id;
    j["point"] = point;
    if (event == "observe") {
        j["objective"] = *trial.objective;
    }
    j["timestamp"] = timestamp;
    return j.dump();
}

/// Rebuild a history from log lines. Suggest events must appear in id order.
inline TrialHistory replay_log(std::string_view text, const SearchSpace& space)
{
    TrialHistory history;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        const auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(line);
            const auto event = j.at("event").get<std::string>();
            const auto id = j.at("id").get<std::uint64_t>();
            if (event == "suggest") {
                if (id != history.size()) {
                    throw InputError("suggest ids out of order");
                }
                Point p(space.size());
                for (std::size_t i = 0; i < space.size(); ++i) {
                    p[i] = j.at("point").at(space[i].name).get<double>();
                }
                history.add_suggested(std::move(p));
            } else if (event == "observe") {
                history.observe(id, j.at("objective").get<double>());
            } else {
                throw InputError("unknown event '" + event + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw InputError("trial log line " + std::to_string(line_no) + ": " + e.what());
        } catch (const InputError& e) {
            throw InputError("trial log line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return history;
}

// --- driver --------------------------------------------------------------------

using Objective = std::function<double(const Point&)>;
using LogSink = std::function<void(const std::string&)>;
using Clock = std::function<double()>;

/// Evaluate `ids` (concurrently when more than one) and observe the results
/// in id order.
inline void evaluate_batch(BayesianOptimizer& opt, const std::vector<std::uint64_t>& ids, const Objective& objective,
                           const LogSink& sink, const Clock& clock)
{
    std::vector<double> values(ids.size());
    if (ids.size() == 1) {
        opt.history().mark_running(ids.front());
        values.front() = objective(opt.history().at(ids.front()).point);
    } else {
        std::vector<std::future<double>> futures;
        for (auto id : ids) {
            opt.history().mark_running(id);
            futures.push_back(
                std::async(std::launch::async, [&objective, p = opt.history().at(id).point] { return objective(p); }));
        }
        for (std::size_t i = 0; i < ids.size(); ++i) {
            values[i] = futures[i].get();
        }
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
        opt.observe(ids[i], values[i]);
        if (sink) {
            sink(log_line(opt.space(), opt.history().at(ids[i]), "observe", clock()));
        }
    }
}

/// Run suggest/evaluate/observe rounds of up to `parallel` trials until the
/// history holds `budget` trials. Pending trials in a resumed history are
/// evaluated first.
inline const Trial& run_search(BayesianOptimizer& opt, const Objective& objective, std::size_t budget,
                               std::size_t parallel, const LogSink& sink = {}, const Clock& clock = unix_time_now)
{
    if (parallel < 1) {
        throw InputError("run_search: parallelism must be at least 1");
    }
    std::vector<std::uint64_t> pending;
    for (const auto* t : opt.history().pending()) {
        pending.push_back(t->id);
    }
    for (std::size_t i = 0; i < pending.size(); i += parallel) {
        const auto last = std::min(pending.size(), i + parallel);
        evaluate_batch(opt, {pending.begin() + static_cast<std::ptrdiff_t>(i), pending.begin() + static_cast<std::ptrdiff_t>(last)},
                       objective, sink, clock);
    }
    while (opt.history().size() < budget) {
        const std::size_t q = std::min(parallel, budget - opt.history().size());
        const auto ids = opt.suggest(q);
        if (sink) {
            for (auto id : ids) {
                sink(log_line(opt.space(), opt.history().at(id), "suggest", clock()));
            }
        }
        evaluate_batch(opt, ids, objective, sink, clock);
    }
    return opt.best();
}

} // namespace sapaug::search
