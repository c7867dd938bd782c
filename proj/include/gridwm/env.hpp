#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gridwm/rng.hpp"

namespace gridwm {

enum class EnvKind { Sokoban, FrozenLake, Sudoku };

std::string_view to_string(EnvKind kind);
EnvKind env_kind_from_string(std::string_view name);

/// Grid coordinate. Zero-indexed (row, col) from the top-left for Sokoban and
/// FrozenLake; Sudoku moves carry their own 1-indexed coordinates.
struct Pos {
    int row = 0;
    int col = 0;
    auto operator<=>(const Pos&) const = default;
};

enum class Direction { Up, Down, Left, Right };

inline constexpr std::array<Direction, 4> kDirections = {Direction::Up, Direction::Down,
                                                         Direction::Left, Direction::Right};

std::string_view to_string(Direction dir);
Pos offset(Pos p, Direction dir);
Direction opposite(Direction dir);
/// The two directions at right angles to `dir`, in a fixed order.
std::array<Direction, 2> perpendicular(Direction dir);

/// Sudoku fill, 1-indexed row/col, value in 1..4.
struct SudokuMove {
    int row = 1;
    int col = 1;
    int value = 1;
    auto operator<=>(const SudokuMove&) const = default;
};

using Action = std::variant<Direction, SudokuMove>;

/// Canonical text form: "Up" / "Down" / ... or "row,col,value".
std::string format_action(const Action& action);

struct RewardScheme {
    double step_penalty = -0.1;
    double progress_bonus = 1.0;
    double success_bonus = 10.0;
    bool operator==(const RewardScheme&) const = default;
};

struct EnvConfig {
    EnvKind kind = EnvKind::Sokoban;
    int grid_size = 6;
    int num_boxes = 1;
    double hole_density = 0.2;
    bool slippery = true;
    /// Probability the intended direction is taken when slippery; the rest
    /// is split evenly between the two perpendicular directions.
    double slip_intended_prob = 1.0 / 3.0;
    int num_empty_cells = 6;
    int max_turns = 10;
    /// Random reverse moves applied when generating Sokoban rooms.
    int reverse_steps = 40;
    RewardScheme rewards{};

    static EnvConfig defaults(EnvKind kind);
    bool operator==(const EnvConfig&) const = default;
};

/// Throws InvalidConfig when `config` violates its invariants.
void validate(const EnvConfig& config);

struct SokobanBoard {
    int size = 0;
    std::vector<std::uint8_t> walls;  // row-major, size*size
    Pos player;
    std::vector<Pos> boxes;    // sorted
    std::vector<Pos> targets;  // sorted

    bool in_bounds(Pos p) const { return p.row >= 0 && p.col >= 0 && p.row < size && p.col < size; }
    bool is_wall(Pos p) const { return !in_bounds(p) || walls[static_cast<std::size_t>(p.row * size + p.col)] != 0; }
    bool has_box(Pos p) const;
    bool is_target(Pos p) const;
    int boxes_on_target() const;
    bool operator==(const SokobanBoard&) const = default;
};

struct FrozenLakeBoard {
    int size = 0;
    std::vector<Pos> holes;  // sorted
    Pos goal;
    Pos player;

    bool in_bounds(Pos p) const { return p.row >= 0 && p.col >= 0 && p.row < size && p.col < size; }
    bool is_hole(Pos p) const;
    bool operator==(const FrozenLakeBoard&) const = default;
};

struct SudokuBoard {
    static constexpr int kSide = 4;
    std::array<int, 16> cells{};     // 0 = empty
    std::array<int, 16> solution{};  // witness completion, all zero if unknown

    int at(int row1, int col1) const { return cells[static_cast<std::size_t>((row1 - 1) * kSide + (col1 - 1))]; }
    bool operator==(const SudokuBoard&) const = default;
};

using Payload = std::variant<SokobanBoard, FrozenLakeBoard, SudokuBoard>;

struct EpisodeState {
    EnvConfig config;
    Rng rng;
    int turn = 0;
    bool terminal = false;
    bool success = false;
    Payload payload;

    EnvKind kind() const { return config.kind; }
    const SokobanBoard& sokoban() const { return std::get<SokobanBoard>(payload); }
    const FrozenLakeBoard& frozen_lake() const { return std::get<FrozenLakeBoard>(payload); }
    const SudokuBoard& sudoku() const { return std::get<SudokuBoard>(payload); }

    void reseed(std::uint64_t seed) { rng = Rng(seed); }
    bool operator==(const EpisodeState&) const = default;
};

struct StepResult {
    EpisodeState next_state;
    double reward = 0.0;
    bool done = false;
    int actions_executed = 0;
    int actions_effective = 0;
    /// Direction actually taken for each executed action (differs from the
    /// request only under slippery FrozenLake).
    std::vector<Action> resolved;
};

EpisodeState generate(const EnvConfig& config, std::uint64_t seed);

/// Applies `actions` in order as one agent turn. Throws SteppedTerminal.
StepResult step(const EpisodeState& state, std::span<const Action> actions);

/// Newline-joined symbol grid (no trailing newline).
std::string render_symbols(const EpisodeState& state);

bool is_success(const EpisodeState& state);

/// Rebuilds a state from its symbol rendering. The inverse of render_symbols
/// on the kind-specific payload; `base` supplies the remaining config.
EpisodeState parse_symbols(std::string_view text, const EnvConfig& base);

// Primitive dynamics, shared with the solvers.

/// Moves the player once with push semantics. Returns whether anything changed.
bool apply_sokoban_move(SokobanBoard& board, Direction dir);
/// Destination of a FrozenLake move; off-grid moves stay in place.
Pos frozen_lake_destination(const FrozenLakeBoard& board, Pos from, Direction dir);
bool sudoku_can_place(const std::array<int, 16>& cells, int row1, int col1, int value);
/// No duplicate among the filled cells of any row, column or 2x2 box.
bool sudoku_consistent(const std::array<int, 16>& cells);

}  // namespace gridwm
