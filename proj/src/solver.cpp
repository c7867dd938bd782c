#include "gridwm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <unordered_map>

#include "gridwm/errors.hpp"

namespace gridwm {

namespace {

struct SearchNode {
    int parent = -1;
    Direction via = Direction::Up;
};

std::string sokoban_key(const SokobanBoard& b) {
    std::string key;
    key.reserve(b.boxes.size() + 1);
    key.push_back(static_cast<char>(b.player.row * b.size + b.player.col));
    for (Pos p : b.boxes) key.push_back(static_cast<char>(p.row * b.size + p.col));
    return key;
}

bool all_on_target(const SokobanBoard& b) { return b.boxes_on_target() == static_cast<int>(b.targets.size()); }

ActionList backtrack(const std::vector<SearchNode>& nodes, int leaf) {
    ActionList plan;
    for (int i = leaf; nodes[static_cast<std::size_t>(i)].parent >= 0; i = nodes[static_cast<std::size_t>(i)].parent)
        plan.push_back(nodes[static_cast<std::size_t>(i)].via);
    std::reverse(plan.begin(), plan.end());
    return plan;
}

std::optional<ActionList> solve_sokoban(const SokobanBoard& start, std::size_t budget) {
    if (all_on_target(start)) return ActionList{};
    std::vector<SearchNode> nodes{{-1, Direction::Up}};
    std::vector<SokobanBoard> boards{start};
    std::unordered_map<std::string, int> seen{{sokoban_key(start), 0}};
    std::size_t expanded = 0;
    for (std::size_t head = 0; head < boards.size(); ++head) {
        if (++expanded > budget) throw BudgetExceeded("Sokoban BFS exceeded node budget");
        for (Direction d : kDirections) {
            SokobanBoard next = boards[head];
            if (!apply_sokoban_move(next, d)) continue;
            auto [it, inserted] = seen.emplace(sokoban_key(next), static_cast<int>(boards.size()));
            if (!inserted) continue;
            nodes.push_back({static_cast<int>(head), d});
            if (all_on_target(next)) return backtrack(nodes, static_cast<int>(nodes.size()) - 1);
            boards.push_back(std::move(next));
        }
    }
    return std::nullopt;
}

// Shortest safe-path distance from every cell to the goal (-1 if unreachable).
std::vector<int> goal_distances(const FrozenLakeBoard& board) {
    const int n = board.size;
    std::vector<int> dist(static_cast<std::size_t>(n * n), -1);
    std::deque<Pos> queue{board.goal};
    dist[static_cast<std::size_t>(board.goal.row * n + board.goal.col)] = 0;
    while (!queue.empty()) {
        Pos p = queue.front();
        queue.pop_front();
        for (Direction d : kDirections) {
            Pos q = offset(p, d);
            if (!board.in_bounds(q) || board.is_hole(q)) continue;
            auto& dq = dist[static_cast<std::size_t>(q.row * n + q.col)];
            if (dq >= 0) continue;
            dq = dist[static_cast<std::size_t>(p.row * n + p.col)] + 1;
            queue.push_back(q);
        }
    }
    return dist;
}

std::optional<ActionList> solve_frozen_lake_deterministic(const FrozenLakeBoard& board, std::size_t budget) {
    if (board.player == board.goal) return ActionList{};
    if (board.is_hole(board.player)) return std::nullopt;
    const int n = board.size;
    std::vector<SearchNode> nodes{{-1, Direction::Up}};
    std::vector<Pos> cells{board.player};
    std::vector<int> index(static_cast<std::size_t>(n * n), -1);
    index[static_cast<std::size_t>(board.player.row * n + board.player.col)] = 0;
    std::size_t expanded = 0;
    for (std::size_t head = 0; head < cells.size(); ++head) {
        if (++expanded > budget) throw BudgetExceeded("FrozenLake BFS exceeded node budget");
        for (Direction d : kDirections) {
            Pos q = offset(cells[head], d);
            if (!board.in_bounds(q) || board.is_hole(q)) continue;
            auto& slot = index[static_cast<std::size_t>(q.row * n + q.col)];
            if (slot >= 0) continue;
            slot = static_cast<int>(cells.size());
            nodes.push_back({static_cast<int>(head), d});
            if (q == board.goal) return backtrack(nodes, slot);
            cells.push_back(q);
        }
    }
    return std::nullopt;
}

std::optional<ActionList> solve_frozen_lake_slippery(const FrozenLakeBoard& board, double intended_prob,
                                                     const SolveOptions& options) {
    if (board.player == board.goal) return ActionList{};
    if (board.is_hole(board.player)) return std::nullopt;
    const auto values = frozen_lake_value_iteration(board, intended_prob);
    const auto dist = goal_distances(board);
    const int n = board.size;
    auto distance = [&](Pos p) {
        const int d = dist[static_cast<std::size_t>(p.row * n + p.col)];
        return d < 0 ? std::numeric_limits<int>::max() : d;
    };
    if (values.value[static_cast<std::size_t>(board.player.row * n + board.player.col)] <= 0.0) return std::nullopt;

    ActionList plan;
    Pos at = board.player;
    while (at != board.goal && static_cast<int>(plan.size()) < options.horizon) {
        if (plan.size() >= options.node_budget) throw BudgetExceeded("FrozenLake greedy extraction exceeded budget");
        double best_q = -1.0;
        for (Direction d : kDirections) best_q = std::max(best_q, frozen_lake_q_value(board, values, at, d, intended_prob));
        Direction chosen = Direction::Up;
        int chosen_dist = std::numeric_limits<int>::max();
        for (Direction d : kDirections) {
            if (frozen_lake_q_value(board, values, at, d, intended_prob) < best_q - 1e-12) continue;
            const int dd = distance(frozen_lake_destination(board, at, d));
            if (dd < chosen_dist) {
                chosen = d;
                chosen_dist = dd;
            }
        }
        plan.push_back(chosen);
        at = frozen_lake_destination(board, at, chosen);
        if (board.is_hole(at)) break;
    }
    return plan;
}

bool sudoku_backtrack(std::array<int, 16>& cells, std::size_t& nodes, std::size_t budget) {
    auto it = std::find(cells.begin(), cells.end(), 0);
    if (it == cells.end()) return true;
    if (++nodes > budget) throw BudgetExceeded("Sudoku backtracking exceeded node budget");
    const int idx = static_cast<int>(it - cells.begin());
    for (int v = 1; v <= 4; ++v) {
        if (!sudoku_can_place(cells, idx / 4 + 1, idx % 4 + 1, v)) continue;
        *it = v;
        if (sudoku_backtrack(cells, nodes, budget)) return true;
        *it = 0;
    }
    return false;
}

std::optional<ActionList> solve_sudoku(const SudokuBoard& board, std::size_t budget) {
    if (!sudoku_consistent(board.cells)) return std::nullopt;
    std::array<int, 16> cells = board.cells;
    std::size_t nodes = 0;
    if (!sudoku_backtrack(cells, nodes, budget)) return std::nullopt;
    ActionList plan;
    for (int i = 0; i < 16; ++i) {
        if (board.cells[static_cast<std::size_t>(i)] == 0)
            plan.push_back(SudokuMove{i / 4 + 1, i % 4 + 1, cells[static_cast<std::size_t>(i)]});
    }
    return plan;
}

}  // namespace

FrozenLakeValues frozen_lake_value_iteration(const FrozenLakeBoard& board, double intended_prob, double tolerance,
                                             int max_iterations) {
    const int n = board.size;
    FrozenLakeValues out;
    out.size = n;
    out.value.assign(static_cast<std::size_t>(n * n), 0.0);
    out.value[static_cast<std::size_t>(board.goal.row * n + board.goal.col)] = 1.0;
    for (out.iterations = 0; out.iterations < max_iterations; ++out.iterations) {
        double residual = 0.0;
        std::vector<double> next = out.value;
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) {
                const Pos p{r, c};
                if (p == board.goal || board.is_hole(p)) continue;
                double best = 0.0;
                for (Direction d : kDirections)
                    best = std::max(best, frozen_lake_q_value(board, out, p, d, intended_prob));
                const auto i = static_cast<std::size_t>(r * n + c);
                residual = std::max(residual, std::abs(best - out.value[i]));
                next[i] = best;
            }
        }
        out.value = std::move(next);
        out.residual = residual;
        if (residual < tolerance) break;
    }
    return out;
}

double frozen_lake_q_value(const FrozenLakeBoard& board, const FrozenLakeValues& values, Pos from, Direction dir,
                           double intended_prob) {
    auto v = [&](Direction d) {
        const Pos q = frozen_lake_destination(board, from, d);
        return values.value[static_cast<std::size_t>(q.row * board.size + q.col)];
    };
    const auto side = perpendicular(dir);
    const double slip = (1.0 - intended_prob) / 2.0;
    return intended_prob * v(dir) + slip * v(side[0]) + slip * v(side[1]);
}

std::optional<ActionList> solve(const EpisodeState& state, const SolveOptions& options) {
    switch (state.kind()) {
        case EnvKind::Sokoban: return solve_sokoban(state.sokoban(), options.node_budget);
        case EnvKind::FrozenLake:
            if (state.config.slippery && state.config.slip_intended_prob < 1.0)
                return solve_frozen_lake_slippery(state.frozen_lake(), state.config.slip_intended_prob, options);
            return solve_frozen_lake_deterministic(state.frozen_lake(), options.node_budget);
        case EnvKind::Sudoku: return solve_sudoku(state.sudoku(), options.node_budget);
    }
    return std::nullopt;
}

}  // namespace gridwm
