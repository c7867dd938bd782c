#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gridwm/env.hpp"
#include "gridwm/solver.hpp"

namespace gridwm {

/// Canonical text key of a state: its symbol rendering.
using StateKey = std::string;

StateKey state_key(const EpisodeState& state);

/// One observed (s, a, s') experience triple. The action is kept in its
/// canonical text form so the table is kind-agnostic.
struct Triple {
    StateKey state;
    std::string action;
    StateKey next;
    bool operator==(const Triple&) const = default;
};

Triple make_triple(const EpisodeState& before, const Action& action, const EpisodeState& after);

/// Empirical transition counts p(s' | s, a).
class TransitionTable {
public:
    using Successors = std::map<StateKey, std::uint64_t>;
    using ByAction = std::map<std::string, Successors>;

    void add(const StateKey& state, const std::string& action, const StateKey& next, std::uint64_t count = 1);
    void add(const Triple& t) { add(t.state, t.action, t.next); }
    /// Count addition; merge order does not affect the result.
    void merge(const TransitionTable& other);

    const std::map<StateKey, ByAction>& entries() const { return entries_; }
    const Successors* successors(const StateKey& state, const std::string& action) const;
    std::uint64_t total(const StateKey& state, const std::string& action) const;

    /// Number of distinct (state, action) pairs.
    std::size_t pair_count() const;
    bool empty() const { return entries_.empty(); }
    /// Every (state, action) pair has exactly one successor.
    bool is_deterministic() const;

    /// Sorted line-oriented text: state, action, successor, count separated
    /// by tabs; backslash, newline and tab escaped.
    std::string export_text() const;
    static TransitionTable import_text(std::string_view text);

    bool operator==(const TransitionTable&) const = default;

private:
    std::map<StateKey, ByAction> entries_;
};

TransitionTable fit(std::span<const Triple> triples);

/// Maximum-likelihood distribution, sorted by successor key.
using Distribution = std::vector<std::pair<StateKey, double>>;

/// nullopt means Unknown: the pair was never observed.
std::optional<Distribution> predict(const TransitionTable& table, const StateKey& state, const Action& action);

/// Most likely successor; ties go to the lexicographically smallest key.
std::optional<StateKey> predict_argmax(const TransitionTable& table, const StateKey& state, const std::string& action);

/// Fraction of held-out triples whose successor is the argmax prediction.
/// Throws EmptyHeldout.
double eval_accuracy(const TransitionTable& table, std::span<const Triple> heldout);

struct PlanOptions {
    int horizon = 10;
    std::size_t node_budget = 1'000'000;
};

struct ModelPlan {
    std::vector<std::string> actions;
    StateKey predicted_end;
    double probability = 1.0;  // model probability of reaching predicted_end
};

/// Searches the table only. Deterministic tables use BFS over argmax
/// successors; otherwise a best-first search maximizing path probability.
/// Unobserved transitions are treated as absent. Returns nullopt when no
/// plan within the horizon exists; throws BudgetExceeded.
std::optional<ModelPlan> plan(const TransitionTable& table, const StateKey& start,
                              const std::function<bool(const StateKey&)>& success, const PlanOptions& options = {});

/// Success test on keys for environments of `config`'s kind.
std::function<bool(const StateKey&)> success_predicate(const EnvConfig& config);

/// Random-action self-play from `start`: episodes of up to `steps` single
/// actions, restarting from `start`. Stops after `patience` consecutive
/// episodes without a new (state, action) pair, or after `max_episodes`.
std::vector<Triple> explore_random(const EpisodeState& start, int steps, std::uint64_t seed, int patience = 200,
                                   int max_episodes = 100'000);

/// Random self-play that restarts each walk from a uniformly chosen
/// already-visited state (at its shortest seen depth) rather than always
/// from `start`, so deep states are revisited often. Walks never go past
/// `horizon` actions from `start`. Stopping rule as for explore_random.
std::vector<Triple> explore_restarts(const EpisodeState& start, int horizon, std::uint64_t seed, int patience = 200,
                                     int max_episodes = 1'000'000);

/// Uniform-random single-action walks of `episode_length` steps, cycling
/// over instances seed_start..seed_start+num_instances-1, until
/// `total_steps` triples are logged.
std::vector<Triple> random_log(const EnvConfig& config, std::uint64_t seed_start, int num_instances, int total_steps,
                               int episode_length, std::uint64_t walk_seed);

std::vector<Action> action_space(const EpisodeState& state);

}  // namespace gridwm
