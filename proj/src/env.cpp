#include "gridwm/env.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "gridwm/errors.hpp"
#include "text_util.hpp"

namespace gridwm {

namespace {

constexpr int kRetryBudget = 1000;
constexpr std::string_view kBoxOnTarget = "\xE2\x88\x9A";  // √

std::size_t cell_index(int size, Pos p) { return static_cast<std::size_t>(p.row * size + p.col); }

bool contains_sorted(const std::vector<Pos>& v, Pos p) { return std::binary_search(v.begin(), v.end(), p); }

int sudoku_box(int row0, int col0) { return (row0 / 2) * 2 + col0 / 2; }

// Backtracking completion in row-major order. With an rng, candidate values
// are tried in shuffled order (random complete grids); otherwise ascending.
bool sudoku_complete(std::array<int, 16>& cells, Rng* rng) {
    auto it = std::find(cells.begin(), cells.end(), 0);
    if (it == cells.end()) return true;
    const int idx = static_cast<int>(it - cells.begin());
    std::array<int, 4> values = {1, 2, 3, 4};
    if (rng != nullptr) rng->shuffle(values.begin(), values.end());
    for (int v : values) {
        if (sudoku_can_place(cells, idx / 4 + 1, idx % 4 + 1, v)) {
            cells[static_cast<std::size_t>(idx)] = v;
            if (sudoku_complete(cells, rng)) return true;
            cells[static_cast<std::size_t>(idx)] = 0;
        }
    }
    return false;
}

bool frozen_lake_reachable(const FrozenLakeBoard& board) {
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(board.size * board.size), 0);
    std::deque<Pos> queue{board.player};
    seen[cell_index(board.size, board.player)] = 1;
    while (!queue.empty()) {
        Pos p = queue.front();
        queue.pop_front();
        if (p == board.goal) return true;
        for (Direction d : kDirections) {
            Pos q = offset(p, d);
            if (!board.in_bounds(q) || board.is_hole(q)) continue;
            auto& s = seen[cell_index(board.size, q)];
            if (s != 0) continue;
            s = 1;
            queue.push_back(q);
        }
    }
    return false;
}

SokobanBoard carve_sokoban_room(const EnvConfig& config, Rng& rng) {
    const int n = config.grid_size;
    const int interior = (n - 2) * (n - 2);
    SokobanBoard board;
    board.size = n;
    board.walls.assign(static_cast<std::size_t>(n * n), 1);

    auto inside = [n](Pos p) { return p.row >= 1 && p.col >= 1 && p.row <= n - 2 && p.col <= n - 2; };
    Pos cursor{1 + rng.below_int(n - 2), 1 + rng.below_int(n - 2)};
    Direction dir = kDirections[static_cast<std::size_t>(rng.below_int(4))];
    const int wanted = std::max(config.num_boxes * 3 + 3, (interior * 3 + 4) / 5);
    int floor_count = 0;
    for (int walk = 0; walk < interior * 12 && floor_count < std::min(wanted, interior); ++walk) {
        auto& cell = board.walls[cell_index(n, cursor)];
        if (cell != 0) {
            cell = 0;
            ++floor_count;
        }
        if (rng.bernoulli(0.35)) dir = kDirections[static_cast<std::size_t>(rng.below_int(4))];
        Pos next = offset(cursor, dir);
        if (inside(next)) cursor = next;
        else dir = kDirections[static_cast<std::size_t>(rng.below_int(4))];
    }
    return board;
}

int box_displacement(const SokobanBoard& board) {
    int total = 0;
    for (Pos b : board.boxes) {
        int best = 1 << 20;
        for (Pos t : board.targets) best = std::min(best, std::abs(b.row - t.row) + std::abs(b.col - t.col));
        total += best;
    }
    return total;
}

// Reverse play: start solved, walk the player around and pull boxes. Every
// reverse move is undone by a forward move, so the result stays solvable.
bool generate_sokoban(const EnvConfig& config, Rng& rng, SokobanBoard& out) {
    SokobanBoard board = carve_sokoban_room(config, rng);
    std::vector<Pos> floor;
    for (int r = 0; r < board.size; ++r)
        for (int c = 0; c < board.size; ++c)
            if (!board.is_wall({r, c})) floor.push_back({r, c});
    if (static_cast<int>(floor.size()) < config.num_boxes + 2) return false;

    rng.shuffle(floor.begin(), floor.end());
    board.targets.assign(floor.begin(), floor.begin() + config.num_boxes);
    std::sort(board.targets.begin(), board.targets.end());
    board.boxes = board.targets;
    board.player = floor[static_cast<std::size_t>(config.num_boxes)];

    SokobanBoard best = board;
    int best_score = 0;
    for (int i = 0; i < config.reverse_steps; ++i) {
        Direction d = kDirections[static_cast<std::size_t>(rng.below_int(4))];
        Pos next = offset(board.player, d);
        if (board.is_wall(next) || board.has_box(next)) continue;
        Pos behind = offset(board.player, opposite(d));
        if (board.has_box(behind) && rng.bernoulli(0.75)) {
            auto it = std::find(board.boxes.begin(), board.boxes.end(), behind);
            *it = board.player;
            std::sort(board.boxes.begin(), board.boxes.end());
        }
        board.player = next;
        const int off_target = config.num_boxes - board.boxes_on_target();
        const int score = off_target == 0 ? 0 : off_target * 100 + box_displacement(board);
        if (score >= best_score && score > 0) {
            best_score = score;
            best = board;
        }
    }
    if (best_score == 0) return false;
    out = std::move(best);
    return true;
}

bool generate_frozen_lake(const EnvConfig& config, Rng& rng, FrozenLakeBoard& out) {
    const int n = config.grid_size;
    std::vector<Pos> cells;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) cells.push_back({r, c});
    rng.shuffle(cells.begin(), cells.end());
    FrozenLakeBoard board;
    board.size = n;
    board.player = cells[0];
    board.goal = cells[1];
    const auto holes = static_cast<std::size_t>(std::lround(config.hole_density * (n * n - 2)));
    board.holes.assign(cells.begin() + 2, cells.begin() + 2 + static_cast<std::ptrdiff_t>(holes));
    std::sort(board.holes.begin(), board.holes.end());
    if (!frozen_lake_reachable(board)) return false;
    out = std::move(board);
    return true;
}

SudokuBoard generate_sudoku(const EnvConfig& config, Rng& rng) {
    SudokuBoard board;
    sudoku_complete(board.solution, &rng);
    board.cells = board.solution;
    std::array<int, 16> order{};
    for (int i = 0; i < 16; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order.begin(), order.end());
    for (int i = 0; i < config.num_empty_cells; ++i) board.cells[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 0;
    return board;
}

std::vector<std::vector<std::string_view>> grid_units(std::string_view text) {
    std::vector<std::vector<std::string_view>> rows;
    for (auto line : detail::split_lines(text)) rows.push_back(detail::utf8_units(line));
    const auto n = rows.size();
    for (const auto& row : rows)
        if (row.size() != n) throw std::invalid_argument("parse_symbols: grid must be square");
    return rows;
}

}  // namespace

std::string_view to_string(EnvKind kind) {
    switch (kind) {
        case EnvKind::Sokoban: return "sokoban";
        case EnvKind::FrozenLake: return "frozenlake";
        case EnvKind::Sudoku: return "sudoku";
    }
    return "unknown";
}

EnvKind env_kind_from_string(std::string_view name) {
    std::string lower;
    for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "sokoban") return EnvKind::Sokoban;
    if (lower == "frozenlake" || lower == "frozen_lake") return EnvKind::FrozenLake;
    if (lower == "sudoku") return EnvKind::Sudoku;
    throw InvalidConfig("unknown environment kind: " + std::string(name));
}

std::string_view to_string(Direction dir) {
    switch (dir) {
        case Direction::Up: return "Up";
        case Direction::Down: return "Down";
        case Direction::Left: return "Left";
        case Direction::Right: return "Right";
    }
    return "?";
}

Pos offset(Pos p, Direction dir) {
    switch (dir) {
        case Direction::Up: return {p.row - 1, p.col};
        case Direction::Down: return {p.row + 1, p.col};
        case Direction::Left: return {p.row, p.col - 1};
        case Direction::Right: return {p.row, p.col + 1};
    }
    return p;
}

Direction opposite(Direction dir) {
    switch (dir) {
        case Direction::Up: return Direction::Down;
        case Direction::Down: return Direction::Up;
        case Direction::Left: return Direction::Right;
        case Direction::Right: return Direction::Left;
    }
    return dir;
}

std::array<Direction, 2> perpendicular(Direction dir) {
    if (dir == Direction::Up || dir == Direction::Down) return {Direction::Left, Direction::Right};
    return {Direction::Up, Direction::Down};
}

std::string format_action(const Action& action) {
    if (const auto* d = std::get_if<Direction>(&action)) return std::string(to_string(*d));
    const auto& m = std::get<SudokuMove>(action);
    return std::to_string(m.row) + "," + std::to_string(m.col) + "," + std::to_string(m.value);
}

bool SokobanBoard::has_box(Pos p) const { return contains_sorted(boxes, p); }
bool SokobanBoard::is_target(Pos p) const { return contains_sorted(targets, p); }

int SokobanBoard::boxes_on_target() const {
    int n = 0;
    for (Pos b : boxes) n += is_target(b) ? 1 : 0;
    return n;
}

bool FrozenLakeBoard::is_hole(Pos p) const { return contains_sorted(holes, p); }

EnvConfig EnvConfig::defaults(EnvKind kind) {
    EnvConfig c;
    c.kind = kind;
    switch (kind) {
        case EnvKind::Sokoban:
            c.grid_size = 6;
            c.max_turns = 10;
            break;
        case EnvKind::FrozenLake:
            c.grid_size = 4;
            c.max_turns = 10;
            break;
        case EnvKind::Sudoku:
            c.grid_size = 4;
            c.max_turns = 5;
            break;
    }
    return c;
}

void validate(const EnvConfig& c) {
    auto fail = [](const std::string& msg) { throw InvalidConfig("invalid EnvConfig: " + msg); };
    if (c.grid_size < 4) fail("grid_size must be >= 4");
    if (c.max_turns < 1) fail("max_turns must be >= 1");
    if (!std::isfinite(c.rewards.step_penalty) || !std::isfinite(c.rewards.progress_bonus) ||
        !std::isfinite(c.rewards.success_bonus))
        fail("reward values must be finite");
    switch (c.kind) {
        case EnvKind::Sokoban: {
            const int interior = (c.grid_size - 2) * (c.grid_size - 2);
            if (c.num_boxes < 1) fail("num_boxes must be >= 1");
            if (c.num_boxes + 1 > interior) fail("num_boxes does not fit in the interior");
            if (c.reverse_steps < 1) fail("reverse_steps must be >= 1");
            break;
        }
        case EnvKind::FrozenLake:
            if (!(c.hole_density >= 0.0 && c.hole_density <= 1.0)) fail("hole_density must be in [0,1]");
            if (!(c.slip_intended_prob >= 0.0 && c.slip_intended_prob <= 1.0))
                fail("slip_intended_prob must be in [0,1]");
            break;
        case EnvKind::Sudoku:
            if (c.grid_size != SudokuBoard::kSide) fail("Sudoku grid_size must be 4");
            if (c.num_empty_cells < 0 || c.num_empty_cells > 16) fail("num_empty_cells must be in [0,16]");
            break;
    }
}

EpisodeState generate(const EnvConfig& config, std::uint64_t seed) {
    validate(config);
    EpisodeState state{config, Rng(seed), 0, false, false, SokobanBoard{}};
    bool ok = false;
    for (int attempt = 0; attempt < kRetryBudget && !ok; ++attempt) {
        switch (config.kind) {
            case EnvKind::Sokoban: {
                SokobanBoard board;
                ok = generate_sokoban(config, state.rng, board);
                if (ok) state.payload = std::move(board);
                break;
            }
            case EnvKind::FrozenLake: {
                FrozenLakeBoard board;
                ok = generate_frozen_lake(config, state.rng, board);
                if (ok) state.payload = std::move(board);
                break;
            }
            case EnvKind::Sudoku:
                state.payload = generate_sudoku(config, state.rng);
                ok = true;
                break;
        }
    }
    if (!ok) {
        throw GenerationExhausted("no solvable " + std::string(to_string(config.kind)) + " instance within " +
                                  std::to_string(kRetryBudget) + " attempts for seed " + std::to_string(seed));
    }
    state.success = is_success(state);
    state.terminal = state.success;
    return state;
}

bool apply_sokoban_move(SokobanBoard& board, Direction dir) {
    Pos next = offset(board.player, dir);
    if (board.is_wall(next)) return false;
    if (board.has_box(next)) {
        Pos beyond = offset(next, dir);
        if (board.is_wall(beyond) || board.has_box(beyond)) return false;
        auto it = std::find(board.boxes.begin(), board.boxes.end(), next);
        *it = beyond;
        std::sort(board.boxes.begin(), board.boxes.end());
    }
    board.player = next;
    return true;
}

Pos frozen_lake_destination(const FrozenLakeBoard& board, Pos from, Direction dir) {
    Pos next = offset(from, dir);
    return board.in_bounds(next) ? next : from;
}

bool sudoku_can_place(const std::array<int, 16>& cells, int row1, int col1, int value) {
    if (row1 < 1 || row1 > 4 || col1 < 1 || col1 > 4 || value < 1 || value > 4) return false;
    const int r = row1 - 1;
    const int c = col1 - 1;
    if (cells[static_cast<std::size_t>(r * 4 + c)] != 0) return false;
    for (int i = 0; i < 4; ++i) {
        if (cells[static_cast<std::size_t>(r * 4 + i)] == value) return false;
        if (cells[static_cast<std::size_t>(i * 4 + c)] == value) return false;
    }
    const int box = sudoku_box(r, c);
    for (int i = 0; i < 16; ++i)
        if (sudoku_box(i / 4, i % 4) == box && cells[static_cast<std::size_t>(i)] == value) return false;
    return true;
}

bool sudoku_consistent(const std::array<int, 16>& cells) {
    for (int i = 0; i < 16; ++i) {
        const int v = cells[static_cast<std::size_t>(i)];
        if (v == 0) continue;
        if (v < 1 || v > 4) return false;
        for (int j = i + 1; j < 16; ++j) {
            if (cells[static_cast<std::size_t>(j)] != v) continue;
            const bool same_row = i / 4 == j / 4;
            const bool same_col = i % 4 == j % 4;
            const bool same_box = sudoku_box(i / 4, i % 4) == sudoku_box(j / 4, j % 4);
            if (same_row || same_col || same_box) return false;
        }
    }
    return true;
}

StepResult step(const EpisodeState& state, std::span<const Action> actions) {
    if (state.terminal) throw SteppedTerminal();
    StepResult result{state, 0.0, false, 0, 0, {}};
    EpisodeState& s = result.next_state;
    const RewardScheme& rw = s.config.rewards;

    for (const Action& action : actions) {
        if (s.terminal) break;
        ++result.actions_executed;
        result.reward += rw.step_penalty;
        std::visit(
            [&](auto& board) {
                using Board = std::decay_t<decltype(board)>;
                if constexpr (std::is_same_v<Board, SudokuBoard>) {
                    const auto* move = std::get_if<SudokuMove>(&action);
                    if (move == nullptr) throw std::invalid_argument("Sudoku step expects row,col,value moves");
                    result.resolved.push_back(*move);
                    if (sudoku_can_place(board.cells, move->row, move->col, move->value)) {
                        board.cells[static_cast<std::size_t>((move->row - 1) * 4 + (move->col - 1))] = move->value;
                        ++result.actions_effective;
                        result.reward += rw.progress_bonus;
                    }
                } else {
                    const auto* dir = std::get_if<Direction>(&action);
                    if (dir == nullptr) throw std::invalid_argument("grid step expects a direction");
                    if constexpr (std::is_same_v<Board, SokobanBoard>) {
                        result.resolved.push_back(*dir);
                        const int before = board.boxes_on_target();
                        if (apply_sokoban_move(board, *dir)) ++result.actions_effective;
                        const int after = board.boxes_on_target();
                        if (after > before) result.reward += rw.progress_bonus * (after - before);
                    } else {
                        Direction taken = *dir;
                        if (s.config.slippery) {
                            const double u = s.rng.uniform01();
                            const double p = s.config.slip_intended_prob;
                            const auto side = perpendicular(*dir);
                            if (u >= p) taken = u < p + (1.0 - p) / 2.0 ? side[0] : side[1];
                        }
                        result.resolved.push_back(taken);
                        Pos dest = frozen_lake_destination(board, board.player, taken);
                        if (dest != board.player) ++result.actions_effective;
                        board.player = dest;
                        if (board.is_hole(dest)) s.terminal = true;
                    }
                }
            },
            s.payload);
        if (is_success(s)) {
            s.success = true;
            s.terminal = true;
            result.reward += rw.success_bonus;
        }
    }
    s.turn += 1;
    result.done = s.terminal;
    return result;
}

std::string render_symbols(const EpisodeState& state) {
    return std::visit(
        [](const auto& board) -> std::string {
            using Board = std::decay_t<decltype(board)>;
            std::string out;
            if constexpr (std::is_same_v<Board, SokobanBoard>) {
                for (int r = 0; r < board.size; ++r) {
                    if (r > 0) out += '\n';
                    for (int c = 0; c < board.size; ++c) {
                        const Pos p{r, c};
                        const bool target = board.is_target(p);
                        if (board.is_wall(p)) out += '#';
                        else if (board.player == p) out += target ? 'S' : 'P';
                        else if (board.has_box(p)) out += target ? std::string(kBoxOnTarget) : std::string("X");
                        else out += target ? 'O' : '_';
                    }
                }
            } else if constexpr (std::is_same_v<Board, FrozenLakeBoard>) {
                for (int r = 0; r < board.size; ++r) {
                    if (r > 0) out += '\n';
                    for (int c = 0; c < board.size; ++c) {
                        const Pos p{r, c};
                        if (board.player == p) {
                            if (p == board.goal) out += kBoxOnTarget;
                            else out += board.is_hole(p) ? 'X' : 'P';
                        } else if (p == board.goal) out += 'G';
                        else out += board.is_hole(p) ? 'O' : '_';
                    }
                }
            } else {
                for (int r = 0; r < SudokuBoard::kSide; ++r) {
                    out += r == 0 ? "|" : " |";
                    for (int c = 0; c < SudokuBoard::kSide; ++c) {
                        const int v = board.cells[static_cast<std::size_t>(r * 4 + c)];
                        out += ' ';
                        out += v == 0 ? '.' : static_cast<char>('0' + v);
                    }
                }
            }
            return out;
        },
        state.payload);
}

bool is_success(const EpisodeState& state) {
    return std::visit(
        [](const auto& board) {
            using Board = std::decay_t<decltype(board)>;
            if constexpr (std::is_same_v<Board, SokobanBoard>) {
                for (Pos t : board.targets)
                    if (!board.has_box(t)) return false;
                return true;
            } else if constexpr (std::is_same_v<Board, FrozenLakeBoard>) {
                return board.player == board.goal;
            } else {
                return std::find(board.cells.begin(), board.cells.end(), 0) == board.cells.end() &&
                       sudoku_consistent(board.cells);
            }
        },
        state.payload);
}

EpisodeState parse_symbols(std::string_view text, const EnvConfig& base) {
    EpisodeState state{base, Rng(0), 0, false, false, SokobanBoard{}};
    switch (base.kind) {
        case EnvKind::Sokoban: {
            auto rows = grid_units(text);
            SokobanBoard board;
            board.size = static_cast<int>(rows.size());
            board.walls.assign(static_cast<std::size_t>(board.size * board.size), 0);
            int players = 0;
            for (int r = 0; r < board.size; ++r) {
                for (int c = 0; c < board.size; ++c) {
                    const auto sym = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
                    const Pos p{r, c};
                    if (sym == "#") board.walls[cell_index(board.size, p)] = 1;
                    else if (sym == "O") board.targets.push_back(p);
                    else if (sym == "X") board.boxes.push_back(p);
                    else if (sym == kBoxOnTarget) {
                        board.boxes.push_back(p);
                        board.targets.push_back(p);
                    } else if (sym == "P" || sym == "S") {
                        board.player = p;
                        ++players;
                        if (sym == "S") board.targets.push_back(p);
                    } else if (sym != "_") {
                        throw std::invalid_argument("parse_symbols: unknown Sokoban symbol '" + std::string(sym) + "'");
                    }
                }
            }
            if (players != 1) throw std::invalid_argument("parse_symbols: Sokoban grid needs exactly one player");
            std::sort(board.boxes.begin(), board.boxes.end());
            std::sort(board.targets.begin(), board.targets.end());
            state.config.grid_size = board.size;
            state.config.num_boxes = static_cast<int>(board.boxes.size());
            state.payload = std::move(board);
            break;
        }
        case EnvKind::FrozenLake: {
            auto rows = grid_units(text);
            FrozenLakeBoard board;
            board.size = static_cast<int>(rows.size());
            int players = 0;
            int goals = 0;
            for (int r = 0; r < board.size; ++r) {
                for (int c = 0; c < board.size; ++c) {
                    const auto sym = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
                    const Pos p{r, c};
                    if (sym == "O") board.holes.push_back(p);
                    else if (sym == "G") {
                        board.goal = p;
                        ++goals;
                    } else if (sym == "P") {
                        board.player = p;
                        ++players;
                    } else if (sym == kBoxOnTarget) {
                        board.player = board.goal = p;
                        ++players;
                        ++goals;
                    } else if (sym == "X") {
                        board.player = p;
                        board.holes.push_back(p);
                        ++players;
                    } else if (sym != "_") {
                        throw std::invalid_argument("parse_symbols: unknown FrozenLake symbol '" + std::string(sym) + "'");
                    }
                }
            }
            if (players != 1 || goals != 1)
                throw std::invalid_argument("parse_symbols: FrozenLake grid needs one player and one goal");
            std::sort(board.holes.begin(), board.holes.end());
            state.config.grid_size = board.size;
            state.payload = std::move(board);
            break;
        }
        case EnvKind::Sudoku: {
            SudokuBoard board;
            int filled = 0;
            for (auto unit : detail::utf8_units(text)) {
                if (unit == "|" || unit == " " || unit == "\n") continue;
                if (filled >= 16) throw std::invalid_argument("parse_symbols: too many Sudoku cells");
                int v = 0;
                if (unit == ".") v = 0;
                else if (unit.size() == 1 && unit[0] >= '1' && unit[0] <= '4') v = unit[0] - '0';
                else throw std::invalid_argument("parse_symbols: unknown Sudoku symbol '" + std::string(unit) + "'");
                board.cells[static_cast<std::size_t>(filled++)] = v;
            }
            if (filled != 16) throw std::invalid_argument("parse_symbols: Sudoku grid needs 16 cells");
            board.solution = board.cells;
            if (!sudoku_consistent(board.cells) || !sudoku_complete(board.solution, nullptr)) board.solution.fill(0);
            state.config.grid_size = SudokuBoard::kSide;
            state.config.num_empty_cells = static_cast<int>(std::count(board.cells.begin(), board.cells.end(), 0));
            state.payload = board;
            break;
        }
    }
    state.success = is_success(state);
    state.terminal = state.success;
    if (const auto* fl = std::get_if<FrozenLakeBoard>(&state.payload); fl != nullptr && fl->is_hole(fl->player))
        state.terminal = true;
    return state;
}

}  // namespace gridwm
