#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gridwm/env.hpp"
#include "gridwm/state_rep.hpp"

namespace gridwm {

enum class PromptMode { Base, ObservationThenPrediction };

std::string_view to_string(PromptMode mode);
PromptMode prompt_mode_from_string(std::string_view name);

struct PromptTemplate {
    EnvKind env_kind = EnvKind::Sokoban;
    PromptMode mode = PromptMode::Base;
    std::string system_text;
    /// "{n}" is replaced by the 1-based turn number.
    std::string turn_header = "Turn {n}:\nState:\n";
};

/// The system prompt for (kind, mode). For Sokoban the coordinate range
/// sentence is adjusted to `grid_size`; at size 6 the text is unchanged.
PromptTemplate make_template(EnvKind kind, PromptMode mode, int grid_size = 6);

/// Half-open character range [begin, end) into the raw output.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
    bool operator==(const Span&) const = default;
};

enum class FormatRule {
    MissingThink,
    MissingAnswer,
    TagOrder,
    EmptyAnswer,
    UnparseableAction,
    TrailingJunk,
    DuplicateTag,
    MissingObservation,
    MissingPrediction,
    EmptyObservation,
    EmptyPrediction,
};

std::string_view to_string(FormatRule rule);

struct FormatVerdict {
    bool valid = true;
    std::vector<FormatRule> violations;

    void add(FormatRule rule);
    bool has(FormatRule rule) const;
};

struct ParsedTurn {
    std::string raw;
    Span think;                       // "<think>...</think>" inclusive of tags
    std::optional<Span> observation;  // content between the observation tags
    std::optional<Span> prediction;   // content between the prediction tags
    Span answer;                      // "<answer>...</answer>" inclusive of tags
    std::optional<std::string> observation_text;  // trimmed belief about s_t
    std::optional<std::string> prediction_text;   // trimmed belief about s_{t+1}
    /// Think content outside the observation/prediction blocks; trimmed
    /// pieces joined with "\n".
    std::string free_reasoning;
    std::string answer_text;
    std::vector<Action> actions;
    /// Structural problems that do not prevent parsing (duplicate tags,
    /// text outside the tags, prediction before observation).
    std::vector<FormatRule> flags;
};

struct ParseOptions {
    /// Treat text outside <think>/<answer> as a violation.
    bool strict = false;
};

class ParseFailure : public std::runtime_error {
public:
    explicit ParseFailure(FormatVerdict verdict);
    const FormatVerdict& verdict() const noexcept { return verdict_; }

private:
    FormatVerdict verdict_;
};

std::optional<Action> parse_action(std::string_view token, EnvKind kind);

/// Extracts the first well-formed <think>...</think><answer>...</answer>
/// structure. Throws ParseFailure when think or answer is missing or
/// misordered, the answer is empty, or an action does not parse.
ParsedTurn parse_agent_output(std::string_view text, EnvKind kind);

FormatVerdict validate_format(const ParsedTurn& turn, PromptMode mode, const ParseOptions& options = {});

/// parse + validate without throwing.
FormatVerdict check_format(std::string_view text, EnvKind kind, PromptMode mode, const ParseOptions& options = {});

/// Canonical serialization; parse_agent_output(render_turn(t)) reproduces
/// the structured fields of t.
std::string render_turn(const ParsedTurn& turn);

std::string render_answer(std::span<const Action> actions);

struct HistoryTurn {
    StateText state;
    ParsedTurn output;  // rendered into the prompt verbatim via output.raw
    double reward = 0.0;
};

/// System text, then one block per past turn (state, output, reward), then
/// the current state block.
std::string build_prompt(const PromptTemplate& tmpl, std::span<const HistoryTurn> history, const StateText& current);

}  // namespace gridwm
