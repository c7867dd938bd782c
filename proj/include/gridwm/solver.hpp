#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "gridwm/env.hpp"

namespace gridwm {

using ActionList = std::vector<Action>;

struct SolveOptions {
    /// Maximum number of expanded search nodes before BudgetExceeded.
    std::size_t node_budget = 1'000'000;
    /// Upper bound on plan length for slippery FrozenLake greedy extraction.
    int horizon = 100;
};

/// Exact solvers used as oracles.
///
/// Sokoban: BFS over (player, boxes) configurations, shortest in primitive
/// moves. FrozenLake: BFS over safe cells when deterministic; when slippery,
/// value iteration for the success-maximizing policy followed by greedy
/// extraction along intended moves. Sudoku: backtracking completion, fills
/// emitted in row-major order.
///
/// Returns an empty plan for already-solved states and nullopt when no plan
/// exists. Throws BudgetExceeded when the node budget runs out.
std::optional<ActionList> solve(const EpisodeState& state, const SolveOptions& options = {});

/// Success-probability values for slippery FrozenLake.
struct FrozenLakeValues {
    int size = 0;
    std::vector<double> value;  // row-major
    double residual = 0.0;      // final Bellman residual (max-norm)
    int iterations = 0;
};

FrozenLakeValues frozen_lake_value_iteration(const FrozenLakeBoard& board, double intended_prob,
                                             double tolerance = 1e-12, int max_iterations = 1'000'000);

/// One-step expected success value of taking `dir` from `from`.
double frozen_lake_q_value(const FrozenLakeBoard& board, const FrozenLakeValues& values, Pos from, Direction dir,
                           double intended_prob);

}  // namespace gridwm
