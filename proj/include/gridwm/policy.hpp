#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "gridwm/env.hpp"
#include "gridwm/lm_client.hpp"
#include "gridwm/solver.hpp"
#include "gridwm/world_model.hpp"

namespace gridwm {

/// Reasoning string used by the uniform-random action generator.
inline constexpr std::string_view kRandomReasoning = "I will push the box to the target.";

struct RandomPolicySpec {
    std::uint64_t seed = 0;
};

struct OraclePolicySpec {
    SolveOptions solve{};
    /// Actions emitted per turn; 0 = the whole plan for deterministic
    /// dynamics and one action for slippery FrozenLake.
    int actions_per_turn = 0;
};

/// Acts by planning over a learned transition table.
struct PlannerPolicySpec {
    std::shared_ptr<const TransitionTable> table;
    PlanOptions plan{};
};

using PolicySpec = std::variant<RandomPolicySpec, OraclePolicySpec, RemoteLmSpec, PlannerPolicySpec>;

std::string_view policy_name(const PolicySpec& spec);

struct PolicyOutput {
    std::string raw_text;
    std::chrono::duration<double> latency{0.0};
    std::optional<int> prompt_tokens;
    std::optional<int> completion_tokens;
};

class RandomPolicy {
public:
    RandomPolicy(const RandomPolicySpec& spec, std::uint64_t episode_seed);
    PolicyOutput act(const EpisodeState& view);

private:
    Rng rng_;
};

/// Wraps an exact plan in a format-valid observation/prediction output whose
/// observation is the true state and whose prediction is the state reached
/// by the emitted actions under intended (non-slipping) dynamics.
class OraclePolicy {
public:
    explicit OraclePolicy(OraclePolicySpec spec) : spec_(std::move(spec)) {}
    PolicyOutput act(const EpisodeState& view) const;

private:
    OraclePolicySpec spec_;
};

class PlannerPolicy {
public:
    explicit PlannerPolicy(PlannerPolicySpec spec);
    PolicyOutput act(const EpisodeState& view) const;

private:
    PlannerPolicySpec spec_;
};

/// Sees only the prompt text.
class RemoteLmPolicy {
public:
    explicit RemoteLmPolicy(std::shared_ptr<LmClient> client) : client_(std::move(client)) {}
    PolicyOutput act(std::string_view prompt) const;

private:
    std::shared_ptr<LmClient> client_;
};

/// A policy instance owned by one collection context.
class Policy {
public:
    /// `client` is shared across contexts for RemoteLM; created on demand
    /// when null.
    static Policy make(const PolicySpec& spec, std::uint64_t episode_seed, std::shared_ptr<LmClient> client = nullptr);

    /// The environment view is only forwarded to policies that are allowed
    /// to read it; RemoteLM receives the prompt alone.
    PolicyOutput act(std::string_view prompt, const EpisodeState& view);

    std::string_view name() const;

private:
    using Impl = std::variant<RandomPolicy, OraclePolicy, RemoteLmPolicy, PlannerPolicy>;
    explicit Policy(Impl impl) : impl_(std::move(impl)) {}
    Impl impl_;
};

}  // namespace gridwm
