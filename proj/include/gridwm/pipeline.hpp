#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gridwm/env.hpp"
#include "gridwm/policy.hpp"
#include "gridwm/protocol.hpp"
#include "gridwm/state_rep.hpp"

namespace gridwm {

struct TurnRecord {
    EpisodeState state_before;
    StateText state_text;
    std::string raw_output;
    std::optional<ParsedTurn> parsed;  // empty when the output failed to parse
    FormatVerdict verdict;             // in the trajectory's prompt mode
    double reward = 0.0;
    std::optional<StepResult> step;    // empty for failed turns
    std::optional<int> prompt_tokens;
    std::optional<int> completion_tokens;
    // Set by rewrite_with_ground_truth.
    bool rewritten = false;
    std::optional<std::string> belief_observation;
    std::optional<std::string> belief_prediction;

    const EpisodeState& state_after() const { return step ? step->next_state : state_before; }
};

struct Trajectory {
    EnvConfig config;
    std::uint64_t seed = 0;
    std::string policy;
    PromptMode template_mode = PromptMode::ObservationThenPrediction;
    std::vector<TurnRecord> turns;
    bool final_success = false;
    bool truncated = false;
    /// "max_turns", "parse_failure", "endpoint_error", "timeout" or
    /// "policy_error"; empty when the episode ended on its own.
    std::string truncation_cause;
    bool rewritten = false;
};

struct CollectOptions {
    /// Seed for the policy's generator; defaults to the episode seed.
    std::optional<std::uint64_t> policy_seed;
    /// Reseeds the episode's dynamics generator after generation.
    std::optional<std::uint64_t> dynamics_seed;
    std::shared_ptr<LmClient> client;
};

/// build_prompt -> act -> parse -> step until terminal, a failed turn, or
/// max_turns. A failed turn is recorded and ends the trajectory.
Trajectory collect_trajectory(const EnvConfig& config, std::uint64_t seed, const PolicySpec& policy,
                              const PromptTemplate& tmpl, const CollectOptions& options = {});

/// Replaces observation/prediction contents with the true s_t and s_{t+1}
/// (composed state text), inserting the blocks when absent. Answer and free
/// reasoning are left untouched; the original beliefs are kept on the turn.
Trajectory rewrite_with_ground_truth(const Trajectory& trajectory);

enum class MaskMode { WorldModel, MaskedAblation, SelfBelief };

std::string_view to_string(MaskMode mode);
MaskMode mask_mode_from_string(std::string_view name);

inline constexpr std::string_view kMaskedToken = "[MASKED]";

struct RecordMeta {
    EnvKind env = EnvKind::Sokoban;
    std::uint64_t seed = 0;
    int turn = 0;
    std::string policy;
    RewardScheme reward_scheme;
    PromptMode template_mode = PromptMode::ObservationThenPrediction;
};

/// One training example. Loss applies to the characters of `completion`
/// covered by `mask_spans` (sorted, disjoint, half-open).
struct SftRecord {
    std::string prompt;
    std::string completion;
    std::vector<Span> mask_spans;
    MaskMode mode = MaskMode::WorldModel;
    RecordMeta meta;
};

/// One record per successfully executed turn. WorldModel and
/// MaskedAblation need a rewritten trajectory, SelfBelief a raw one.
std::vector<SftRecord> emit_sft_records(const Trajectory& trajectory, MaskMode mode);

struct Rejection {
    SftRecord record;
    FormatVerdict verdict;
};

struct FilterResult {
    std::vector<SftRecord> kept;
    std::vector<Rejection> rejected;
};

/// Keeps records whose completion is format-valid in `mode`.
FilterResult filter_records(std::vector<SftRecord> records, PromptMode mode, const ParseOptions& options = {});

struct DatasetSpec {
    std::vector<EnvConfig> configs{EnvConfig::defaults(EnvKind::Sokoban)};
    std::uint64_t seed_start = 0;
    std::size_t max_episodes = 100'000;
    PolicySpec policy = RandomPolicySpec{};
    MaskMode mode = MaskMode::WorldModel;
    PromptMode template_mode = PromptMode::ObservationThenPrediction;
    std::size_t target_count = 1280;
    int jobs = 1;
    ParseOptions filter_options{};
};

struct DatasetResult {
    std::vector<SftRecord> records;
    std::vector<Trajectory> trajectories;  // as collected, in episode order
    std::size_t episodes_used = 0;
    std::size_t rejected = 0;
    std::map<std::string, std::size_t> rejection_counts;
    double duplicate_rate = 0.0;  // repeated (state, answer) pairs among kept records
};

/// Episode j uses configs[j % C] with seed seed_start + j / C. Episodes run
/// in parallel; records are reduced in episode order so `jobs` never changes
/// the output. Throws SourceExhausted.
DatasetResult build_dataset(const DatasetSpec& spec, std::shared_ptr<LmClient> client = nullptr);

/// Writes dataset.jsonl, trajectories.jsonl and manifest.json into `out_dir`.
void write_dataset(const DatasetResult& result, const DatasetSpec& spec, const std::filesystem::path& out_dir,
                   const std::string& manifest_extra_json = "{}");

}  // namespace gridwm
