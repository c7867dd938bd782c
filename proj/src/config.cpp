#include "gridwm/config.hpp"

#include <fstream>
#include <sstream>

#include "gridwm/errors.hpp"

namespace gridwm {

namespace {

template <class T>
T get_or(const json& j, const json::json_pointer& ptr, T fallback) {
    if (!j.contains(ptr)) return fallback;
    try {
        return j.at(ptr).get<T>();
    } catch (const json::exception& e) {
        throw InvalidConfig("config key " + ptr.to_string() + ": " + e.what());
    }
}

json::json_pointer key(const char* dotted) {
    std::string p = "/";
    for (const char* c = dotted; *c; ++c) p += *c == '.' ? '/' : *c;
    return json::json_pointer(p);
}

PolicySpec policy_from(const json& config) {
    if (!config.contains("policy")) return RandomPolicySpec{get_or<std::uint64_t>(config, key("seed"), 0)};
    try {
        return policy_spec_from_json(config.at("policy"));
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("policy: ") + e.what());
    }
}

}  // namespace

json load_config(const std::filesystem::path& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot read config " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidConfig("config " + path.string() + ": " + e.what());
    }
}

void apply_override(json& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0)
        throw InvalidConfig("override must look like key=value: " + std::string(assignment));
    const std::string dotted(assignment.substr(0, eq));
    const std::string raw(assignment.substr(eq + 1));
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    try {
        config[key(dotted.c_str())] = value;
    } catch (const json::exception& e) {
        throw InvalidConfig("override " + dotted + ": " + e.what());
    }
}

std::vector<EnvConfig> env_configs_from(const json& config) {
    std::vector<EnvConfig> out;
    try {
        if (config.contains("envs")) {
            for (const auto& e : config.at("envs")) out.push_back(env_config_from_json(e));
        } else if (config.contains("env")) {
            out.push_back(env_config_from_json(config.at("env")));
        } else {
            out.push_back(EnvConfig::defaults(EnvKind::Sokoban));
        }
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("env config: ") + e.what());
    }
    for (const auto& c : out) validate(c);
    if (out.empty()) throw InvalidConfig("envs is empty");
    return out;
}

DatasetSpec dataset_spec_from(const json& config) {
    DatasetSpec spec;
    spec.configs = env_configs_from(config);
    spec.seed_start = get_or<std::uint64_t>(config, key("seed"), 0);
    spec.jobs = get_or<int>(config, key("jobs"), 1);
    spec.policy = policy_from(config);
    spec.target_count = get_or<std::size_t>(config, key("dataset.target_count"), spec.target_count);
    spec.max_episodes = get_or<std::size_t>(config, key("dataset.max_episodes"), spec.max_episodes);
    spec.mode = mask_mode_from_string(get_or<std::string>(config, key("dataset.mode"), "world_model"));
    spec.template_mode = prompt_mode_from_string(
        get_or<std::string>(config, key("dataset.template_mode"), std::string(to_string(spec.template_mode))));
    spec.filter_options.strict = get_or<bool>(config, key("dataset.strict"), false);
    if (spec.target_count < 1) throw InvalidConfig("dataset.target_count must be at least 1");
    return spec;
}

EvalSuite eval_suite_from(const json& config) {
    EvalSuite suite;
    const auto envs = env_configs_from(config);
    const auto seed = get_or<std::uint64_t>(config, key("seed"), 0);
    const auto n = get_or<std::uint64_t>(config, key("eval.num_instances"), 10);
    for (const auto& env : envs)
        for (std::uint64_t s = 0; s < n; ++s) suite.instances.push_back({env, seed + s});
    suite.rollouts_per_instance = get_or<int>(config, key("eval.rollouts"), suite.rollouts_per_instance);
    suite.k_values = get_or<std::vector<int>>(config, key("eval.k"), suite.k_values);
    suite.rollout_seed = get_or<std::uint64_t>(config, key("eval.rollout_seed"), seed);
    suite.template_mode = prompt_mode_from_string(
        get_or<std::string>(config, key("eval.template_mode"), std::string(to_string(suite.template_mode))));
    suite.policy = policy_from(config);
    suite.jobs = get_or<int>(config, key("jobs"), 1);
    validate(suite);
    return suite;
}

LiftOptions lift_options_from(const json& config) {
    LiftOptions o;
    o.seed_start = get_or<std::uint64_t>(config, key("seed"), 0);
    o.jobs = get_or<int>(config, key("jobs"), 1);
    o.num_instances = get_or<int>(config, key("lift.num_instances"), o.num_instances);
    o.horizon = get_or<int>(config, key("lift.horizon"), o.horizon);
    o.random_rollouts = get_or<int>(config, key("lift.rollouts"), o.random_rollouts);
    o.k = get_or<int>(config, key("lift.k"), o.k);
    o.rollout_seed = get_or<std::uint64_t>(config, key("lift.rollout_seed"), o.seed_start);
    o.explore_patience = get_or<int>(config, key("lift.patience"), o.explore_patience);
    o.config.grid_size = get_or<int>(config, key("lift.grid_size"), o.config.grid_size);
    o.config.num_boxes = get_or<int>(config, key("lift.num_boxes"), o.config.num_boxes);
    if (o.k < 1 || o.k > o.random_rollouts) throw InvalidConfig("lift.k must be in [1, lift.rollouts]");
    return o;
}

}  // namespace gridwm
