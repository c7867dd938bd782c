#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "gridwm/env.hpp"
#include "gridwm/lm_client.hpp"
#include "gridwm/pipeline.hpp"
#include "gridwm/policy.hpp"
#include "gridwm/protocol.hpp"

namespace gridwm {

/// Probability that a uniformly drawn k-subset of n rollouts, c of them
/// successful, contains at least one success: 1 - C(n-c, k) / C(n, k),
/// evaluated as a product of ratios. Throws DomainError.
double pass_at_k(int n, int c, int k);

struct EvalInstance {
    EnvConfig config;
    std::uint64_t seed = 0;
};

struct EvalSuite {
    std::vector<EvalInstance> instances;
    int rollouts_per_instance = 8;
    std::vector<int> k_values{1, 8};
    PolicySpec policy = RandomPolicySpec{};
    PromptMode template_mode = PromptMode::ObservationThenPrediction;
    /// Rollout r of instance i seeds both the policy and the environment's
    /// dynamics generator with mix_seed(mix_seed(rollout_seed, i), r).
    std::uint64_t rollout_seed = 0;
    int jobs = 1;
    bool keep_trajectories = false;
};

/// Throws InvalidConfig.
void validate(const EvalSuite& suite);

struct ActionStats {
    std::size_t episodes = 0;
    std::size_t turns = 0;
    std::uint64_t actions_executed = 0;
    std::uint64_t actions_effective = 0;
    std::uint64_t response_chars = 0;
    std::uint64_t completion_tokens = 0;
    std::size_t turns_with_tokens = 0;

    void add(const Trajectory& t);
    void merge(const ActionStats& other);

    double mean_actions_per_episode() const;
    /// Executed primitive actions that changed the environment payload, as a
    /// fraction of all executed actions (0 when nothing was executed).
    double effectiveness() const;
    /// Mean raw-output length in Unicode code points per turn.
    double mean_response_chars() const;
    /// Mean completion tokens per turn, when the provider reported usage.
    std::optional<double> mean_response_tokens() const;
};

/// Throws EmptyInput.
ActionStats action_stats(std::span<const Trajectory> trajectories);

struct FailedRollout {
    std::size_t instance = 0;
    int rollout = 0;
    std::string cause;
};

struct InstanceResult {
    EvalInstance instance;
    int n = 0;
    int c = 0;
    std::map<int, double> pass_at;  // k -> estimate
};

struct EvalReport {
    std::string policy;
    std::vector<InstanceResult> instances;
    double pass_at_1 = 0.0;
    std::map<int, double> pass_at;  // k -> mean over instances
    ActionStats stats;
    std::vector<FailedRollout> failed;
    /// Rollouts in (instance, rollout) order; filled when keep_trajectories.
    std::vector<Trajectory> trajectories;
};

EvalReport run_eval(const EvalSuite& suite, std::shared_ptr<LmClient> client = nullptr);

std::string report_json(const EvalReport& report);
/// instance,env,seed,n,c,pass@k...
std::string report_instances_csv(const EvalReport& report);
/// k,pass_at_k
std::string report_pass_at_k_csv(const EvalReport& report);

/// Log probabilities are carried in extended precision so uniform providers
/// reproduce their vocabulary size as perplexity exactly.
using LogProb = long double;

struct UniformProvider {
    int vocab_size = 1;
};

struct RemoteProvider {
    std::shared_ptr<LmClient> client;
};

using LogProbProvider = std::variant<UniformProvider, RemoteProvider>;

enum class PplUnit { Symbol, ProviderToken };

std::string_view to_string(PplUnit unit);
PplUnit ppl_unit_from_string(std::string_view name);

/// Grid symbols of a rendering: code points other than whitespace and the
/// Sudoku box separator '|'.
std::vector<std::string> symbol_units(std::string_view text);

/// Per-unit log probabilities. Uniform scores symbol units; Remote scores
/// provider tokens. Throws ProviderError.
std::vector<LogProb> unit_logprobs(std::string_view text, const LogProbProvider& provider);

/// exp(-mean log p). With PplUnit::Symbol and a remote provider the total
/// token log probability is averaged over symbol units instead. Throws
/// EmptyInput or ProviderError.
double perplexity(std::string_view text, const LogProbProvider& provider, PplUnit unit = PplUnit::Symbol);

}  // namespace gridwm
