#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "gridwm/env.hpp"
#include "gridwm/evaluation.hpp"
#include "gridwm/world_model.hpp"

namespace gridwm {

/// Planner-versus-random comparison on deterministic Sokoban.
struct LiftOptions {
    EnvConfig config = EnvConfig::defaults(EnvKind::Sokoban);
    int num_instances = 100;
    /// Planning horizon, also the random policy's turn budget.
    int horizon = 10;
    std::uint64_t seed_start = 0;
    /// Generated seeds scanned for instances solvable within the horizon.
    std::uint64_t max_seed_scan = 100'000;
    int random_rollouts = 64;
    int k = 8;
    std::uint64_t rollout_seed = 0;
    /// Exploration stops after this many consecutive walks find nothing new.
    int explore_patience = 2000;
    int jobs = 1;
};

struct LiftInstance {
    std::uint64_t seed = 0;
    int optimal_length = 0;        // BFS plan length
    std::size_t explored_pairs = 0;  // distinct (state, action) pairs seen
};

struct LiftReport {
    std::vector<LiftInstance> instances;
    std::shared_ptr<const TransitionTable> table;
    EvalReport planner;
    EvalReport random;
    double planner_pass_at_1 = 0.0;
    double random_pass_at_k = 0.0;
    bool lift = false;
};

/// First `num_instances` seeds from seed_start whose shortest solution has
/// 1..horizon moves. Throws SourceExhausted.
std::vector<LiftInstance> lift_suite_instances(const LiftOptions& options);

/// Fits a table on random self-play from each instance start, then evaluates
/// the planner (1 rollout) and the random policy (random_rollouts).
LiftReport run_lift_suite(const LiftOptions& options);

std::string lift_report_json(const LiftReport& report, const LiftOptions& options);

}  // namespace gridwm
