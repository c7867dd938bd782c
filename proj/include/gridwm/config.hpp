#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridwm/evaluation.hpp"
#include "gridwm/lift.hpp"
#include "gridwm/pipeline.hpp"
#include "gridwm/serialize.hpp"

namespace gridwm {

inline constexpr std::string_view kVersion = "0.1.0";

/// Reads a JSON run config; an empty path gives an empty object.
json load_config(const std::filesystem::path& path);

/// Applies "dotted.key=value". The value is parsed as JSON when possible
/// and taken as a string otherwise. Throws InvalidConfig.
void apply_override(json& config, std::string_view assignment);

/// "envs" (array) or "env" (object); Sokoban defaults when neither is set.
std::vector<EnvConfig> env_configs_from(const json& config);

/// Keys: seed, jobs, envs/env, policy, dataset.{target_count, max_episodes,
/// mode, template_mode, strict}.
DatasetSpec dataset_spec_from(const json& config);

/// Keys: seed, jobs, envs/env, policy, eval.{num_instances, rollouts, k,
/// rollout_seed, template_mode}. Instances are seeds seed..seed+N-1 for
/// every env config.
EvalSuite eval_suite_from(const json& config);

/// Keys: seed, jobs, lift.{num_instances, horizon, rollouts, k,
/// rollout_seed, patience, grid_size, num_boxes}.
LiftOptions lift_options_from(const json& config);

}  // namespace gridwm
