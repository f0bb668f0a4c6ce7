// Copyright 2026 The sapaug Authors
// SPDX-License-Identifier: Apache-2.0

// sapaug command-line front end.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sapaug/betafn.hpp"
#include "sapaug/config.hpp"
#include "sapaug/errors.hpp"
#include "sapaug/featurize.hpp"
#include "sapaug/harness.hpp"
#include "sapaug/io.hpp"
#include "sapaug/pipeline.hpp"
#include "sapaug/policy.hpp"
#include "sapaug/search.hpp"

namespace {

using namespace sapaug;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

/// --seed, else SAPAUG_SEED, else `fallback`.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback = 0)
{
    if (flag) {
        return *flag;
    }
    if (const char* env = std::getenv("SAPAUG_SEED"); env != nullptr && *env != '\0') {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used == std::string(env).size()) {
                return v;
            }
        } catch (const std::exception&) {
        }
        throw InputError(std::string("SAPAUG_SEED is not an unsigned integer: ") + env);
    }
    return fallback;
}

std::string fmt9(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

struct Options {
    int verbosity = 0;
    std::optional<std::uint64_t> seed;

    // ibeta
    double alpha = 1.0;
    double beta = 1.0;
    double x = 0.0;

    // policy-curve
    double s = 2.0;
    double a = 0.5;
    std::size_t batch = 32;
    std::string out;

    // augment
    std::string in_wav;
    std::string pair_wav;
    std::string policy_path;
    std::size_t rank = 1;
    std::string out_wav;
    std::string out_feat;

    // search / harness
    std::string space_path;
    std::size_t budget = 100;
    std::size_t parallel = 1;
    std::string log_path;
    bool resume = false;
    std::size_t train_size = 512;
    std::size_t validation_size = 256;
    std::size_t epochs = 5;
    std::uint64_t data_seed = 0;
};

int run_ibeta(const Options& o)
{
    std::printf("%.15g\n", inc_beta(o.alpha, o.beta, o.x));
    return kExitOk;
}

int run_policy_curve(const Options& o)
{
    const PolicyParams params{o.s, o.a, 1.0};
    params.validate();
    if (o.batch < 1) {
        throw InputError("policy-curve: --batch must be at least 1");
    }
    std::string csv = "l_rank,x,lambda\n";
    for (std::size_t r = 1; r <= o.batch; ++r) {
        const double x = static_cast<double>(r) / static_cast<double>(o.batch);
        csv += std::to_string(r) + "," + fmt9(x) + "," + fmt9(lambda_of_rank(params, r, o.batch)) + "\n";
    }
    if (o.out.empty()) {
        std::cout << csv;
    } else {
        io::write_file_atomic(o.out, csv);
    }
    return kExitOk;
}

int run_augment(const Options& o)
{
    if (o.out_wav.empty() && o.out_feat.empty()) {
        throw InputError("augment: give --out-wav and/or --out-feat");
    }
    auto cfg = load_policy_config(o.policy_path);
    cfg.pipeline.seed = resolve_seed(o.seed, cfg.pipeline.seed);
    if (o.batch < 1 || o.rank < 1 || o.rank > o.batch) {
        throw InputError("augment: need 1 <= --rank <= --batch");
    }
    const auto x = io::read_wav(o.in_wav);
    const auto partner = o.pair_wav.empty() ? x : io::read_wav(o.pair_wav);
    if (partner.sample_rate != x.sample_rate) {
        throw InputError("augment: input and partner sample rates differ");
    }
    // The input is sample 0; the partner stands in for the rest of the batch.
    // Without a partner the input pairs with itself and mixing is skipped.
    const std::uint64_t self_id = 0;
    std::vector<std::uint64_t> others;
    if (!o.pair_wav.empty()) {
        others.push_back(1);
    }
    const auto plan = plan_sample(self_id, o.rank, o.batch, cfg.policies, cfg.pipeline.seed, others);
    Featurizer featurizer(FeaturizerConfig{}, x.sample_rate);
    const auto result = apply_sample(x, plan, &partner, &partner, cfg.pipeline, featurizer);

    if (!o.out_wav.empty()) {
        io::write_wav(o.out_wav, result.waveform);
    }
    if (!o.out_feat.empty()) {
        io::write_features(o.out_feat, result.features);
    }

    nlohmann::ordered_json summary;
    summary["seed"] = cfg.pipeline.seed;
    summary["rank"] = o.rank;
    summary["batch"] = o.batch;
    nlohmann::ordered_json kinds = nlohmann::ordered_json::object();
    for (auto kind : kAllAugmentations) {
        const auto& d = plan[kind];
        kinds[std::string(to_string(kind))] = {{"selected", d.selected}, {"lambda", d.lambda}, {"strength", d.strength.value}};
    }
    summary["augmentations"] = kinds;
    if (result.trace.stretch_ratio) {
        summary["stretch_ratio"] = *result.trace.stretch_ratio;
    }
    summary["frames"] = result.features.frames();
    summary["bins"] = result.features.bins();
    std::cout << summary.dump() << "\n";
    return kExitOk;
}

harness::Harness make_harness(const Options& o)
{
    harness::DatasetConfig dc;
    dc.train_size = o.train_size;
    dc.validation_size = o.validation_size;
    harness::TrainConfig tc;
    tc.epochs = o.epochs;
    return harness::Harness(harness::generate_dataset(dc, o.data_seed), tc);
}

int run_search(const Options& o)
{
    const std::uint64_t seed = resolve_seed(o.seed);
    search::SearchSpace space = search::SearchSpace::policy_space();
    if (!o.space_path.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(io::read_file(o.space_path));
        } catch (const nlohmann::json::exception& e) {
            throw InputError("search space " + o.space_path + ": " + e.what());
        }
        space = search::SearchSpace::from_json(j);
    }
    if (o.budget < 1) {
        throw InputError("search: --budget must be at least 1");
    }

    search::BayesianOptimizer opt(space, search::OptimizerOptions{}, seed);
    std::string log_text;
    if (o.resume && std::filesystem::exists(o.log_path)) {
        log_text = io::read_file(o.log_path);
        opt.history() = search::replay_log(log_text, space);
        if (!log_text.empty() && log_text.back() != '\n') {
            log_text.push_back('\n');
        }
        if (o.verbosity > 0) {
            std::cerr << "resumed " << opt.history().size() << " trials from " << o.log_path << "\n";
        }
    }

    const auto h = make_harness(o);
    const auto objective = harness::make_objective(h, space, seed);
    auto sink = [&](const std::string& line) {
        log_text += line;
        log_text.push_back('\n');
        io::write_file_atomic(o.log_path, log_text);
        if (o.verbosity > 0) {
            std::cerr << line << "\n";
        }
    };
    const auto& best = search::run_search(opt, objective, o.budget, o.parallel, sink);

    nlohmann::ordered_json out;
    out["best_id"] = best.id;
    out["objective"] = *best.objective;
    nlohmann::ordered_json point = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < space.size(); ++i) {
        point[space[i].name] = best.point[i];
    }
    out["point"] = point;
    out["trials"] = opt.history().size();
    std::cout << out.dump() << "\n";
    return kExitOk;
}

int run_harness(const Options& o)
{
    const auto cfg = load_policy_config(o.policy_path);
    const std::uint64_t seed = resolve_seed(o.seed, cfg.pipeline.seed);
    auto h = make_harness(o);
    const auto base = h.train_and_evaluate(PolicySet::disabled(), seed);
    const auto pol = h.train_and_evaluate(cfg.policies, seed);
    nlohmann::ordered_json out;
    out["seed"] = seed;
    out["baseline_accuracy"] = base.diverged ? 0.0 : base.accuracy;
    out["policy_accuracy"] = pol.diverged ? 0.0 : pol.accuracy;
    out["policy_diverged"] = pol.diverged;
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    for (auto kind : kAllAugmentations) {
        counts[std::string(to_string(kind))] = pol.applications[index_of(kind)];
    }
    out["applications"] = counts;
    std::cout << out.dump() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sample-adaptive augmentation policies: policy evaluation, augmentation and policy search"};
    app.require_subcommand(1);
    Options o;
    app.add_flag("-v,--verbose", o.verbosity, "More diagnostics on stderr");

    auto* ibeta = app.add_subcommand("ibeta", "Evaluate the regularized incomplete beta function I_x(alpha, beta)");
    ibeta->add_option("--alpha", o.alpha, "First shape parameter")->required();
    ibeta->add_option("--beta", o.beta, "Second shape parameter")->required();
    ibeta->add_option("--x", o.x, "Upper integration limit in [0, 1]")->required();

    auto* curve = app.add_subcommand("policy-curve", "Print lambda for every loss rank of a batch as CSV");
    curve->add_option("--s", o.s, "Shape scale s")->required();
    curve->add_option("--a", o.a, "Shape location a in (0, 1)")->required();
    curve->add_option("--batch", o.batch, "Batch size B")->required();
    curve->add_option("--out", o.out, "Output CSV (default: stdout)");

    auto* augment = app.add_subcommand("augment", "Augment one utterance as a sample of given loss rank");
    augment->add_option("--in", o.in_wav, "Input WAV (16-bit PCM mono)")->required();
    augment->add_option("--pair", o.pair_wav, "Partner WAV for SamplePairing and CutMix (default: input)");
    augment->add_option("--policy", o.policy_path, "Policy JSON")->required();
    augment->add_option("--rank", o.rank, "Loss rank of the sample (1 = lowest loss)")->required();
    augment->add_option("--batch", o.batch, "Batch size")->required();
    augment->add_option("--seed", o.seed, "Random seed (overrides the policy file)");
    augment->add_option("--out-wav", o.out_wav, "Augmented waveform output");
    augment->add_option("--out-feat", o.out_feat, "Augmented features (.csv or binary)");

    auto* search = app.add_subcommand("search", "Bayesian-optimization policy search on the synthetic task");
    search->add_option("--space", o.space_path, "Search-space JSON (default: 15-d policy space)");
    search->add_option("--budget", o.budget, "Total number of trials")->required();
    search->add_option("--parallel", o.parallel, "Trials suggested and evaluated per round");
    search->add_option("--log", o.log_path, "Trial log (JSON lines)")->required();
    search->add_flag("--resume", o.resume, "Continue from an existing trial log");
    search->add_option("--seed", o.seed, "Random seed");

    auto* harness = app.add_subcommand("harness", "Train the synthetic task with and without a policy");
    harness->add_option("--policy", o.policy_path, "Policy JSON")->required();
    harness->add_option("--seed", o.seed, "Training seed (default: the policy file's seed)");

    for (auto* sub : {search, harness}) {
        sub->add_option("--train-size", o.train_size, "Training utterances");
        sub->add_option("--val-size", o.validation_size, "Validation utterances");
        sub->add_option("--epochs", o.epochs, "Training epochs");
        sub->add_option("--data-seed", o.data_seed, "Synthetic dataset seed");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitInput;
    }

    try {
        if (ibeta->parsed()) {
            return run_ibeta(o);
        }
        if (curve->parsed()) {
            return run_policy_curve(o);
        }
        if (augment->parsed()) {
            return run_augment(o);
        }
        if (search->parsed()) {
            return run_search(o);
        }
        if (harness->parsed()) {
            return run_harness(o);
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const StateError& e) {
        std::cerr << "state error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    std::cerr << app.help();
    return kExitInput;
}
