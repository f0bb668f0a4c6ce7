// Copyright 2026 The sapaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "errors.hpp"
#include "io.hpp"
#include "kinds.hpp"
#include "pipeline.hpp"
#include "policy.hpp"

namespace sapaug {

/// Contents of a policy configuration file.
struct PolicyConfig {
    PolicySet policies;
    PipelineConfig pipeline;
};

inline PolicyConfig policy_config_from_json(const nlohmann::json& j)
{
    try {
        PolicyConfig cfg;
        const auto& pol = j.at("policies");
        if (!pol.is_object() || pol.size() != kNumAugmentations) {
            throw InputError("policy config: 'policies' must name exactly the five augmentations");
        }
        for (auto kind : kAllAugmentations) {
            const auto key = std::string(to_string(kind));
            if (!pol.contains(key)) {
                throw InputError("policy config: missing policy '" + key + "'");
            }
            const auto& e = pol.at(key);
            cfg.policies[kind] = PolicyParams{e.at("s").get<double>(), e.at("a").get<double>(), e.at("p").get<double>()};
        }
        cfg.policies.validate();
        cfg.pipeline.num_masks = j.value("num_masks", std::size_t{4});
        cfg.pipeline.n_cm = j.value("n_cm", std::size_t{6});
        cfg.pipeline.seed = j.value("seed", std::uint64_t{0});
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("policy config: ") + e.what());
    }
}

inline nlohmann::ordered_json policy_config_to_json(const PolicyConfig& cfg)
{
    nlohmann::ordered_json pol = nlohmann::ordered_json::object();
    for (auto kind : kAllAugmentations) {
        const auto& p = cfg.policies[kind];
        pol[std::string(to_string(kind))] = {{"s", p.s}, {"a", p.a}, {"p", p.p}};
    }
    return {{"policies", pol},
            {"num_masks", cfg.pipeline.num_masks},
            {"n_cm", cfg.pipeline.n_cm},
            {"seed", cfg.pipeline.seed}};
}

inline PolicyConfig load_policy_config(const std::filesystem::path& path)
{
    const auto text = io::read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("policy config " + path.string() + ": " + e.what());
    }
    return policy_config_from_json(j);
}

} // namespace sapaug
