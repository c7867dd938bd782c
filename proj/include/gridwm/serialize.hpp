#pragma once

#include <json.hpp>

#include "gridwm/env.hpp"
#include "gridwm/pipeline.hpp"
#include "gridwm/policy.hpp"

namespace gridwm {

using json = nlohmann::json;

json to_json(const RewardScheme& r);
RewardScheme reward_scheme_from_json(const json& j, RewardScheme base = {});

json to_json(const EnvConfig& c);
/// Fields not present keep the per-kind defaults.
EnvConfig env_config_from_json(const json& j);

json to_json(const Action& a);
Action action_from_json(const json& j);

json to_json(const EpisodeState& s);
EpisodeState episode_state_from_json(const json& j);

json to_json(const StepResult& r);
StepResult step_result_from_json(const json& j);

json to_json(const PolicySpec& p);
/// Planner specs carry a table that is not serialized; they need one
/// supplied separately.
PolicySpec policy_spec_from_json(const json& j);

json to_json(const FormatVerdict& v);
FormatVerdict format_verdict_from_json(const json& j);

json to_json(const Trajectory& t);
Trajectory trajectory_from_json(const json& j);

/// {prompt, completion, mask_spans:[[s,e],...], mode, meta:{...}}
json to_json(const SftRecord& r);
SftRecord sft_record_from_json(const json& j);

}  // namespace gridwm
