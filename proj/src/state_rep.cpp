#include "gridwm/state_rep.hpp"

#include <algorithm>
#include <stdexcept>

#include "text_util.hpp"

namespace gridwm {

namespace {

std::string coord(const Entity& e) { return "(" + std::to_string(e.row) + "," + std::to_string(e.col) + ")"; }

std::vector<Entity> with_label(const std::vector<Entity>& entities, std::string_view label) {
    std::vector<Entity> out;
    for (const auto& e : entities)
        if (e.label == label) out.push_back(e);
    return out;
}

// "A", "A and B", "A, B and C"
std::string and_list(const std::vector<Entity>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += i + 1 == items.size() ? " and " : ", ";
        out += coord(items[i]);
    }
    return out;
}

std::string sokoban_sentence(const std::vector<Entity>& entities) {
    std::vector<std::string> clauses;
    for (const auto& p : with_label(entities, "player")) clauses.push_back("Player (P) is at " + coord(p));
    auto numbered = [&](std::string_view label, std::string_view symbol) {
        const auto items = with_label(entities, label);
        for (std::size_t i = 0; i < items.size(); ++i) {
            std::string name(label);
            if (items.size() > 1) name += " " + std::to_string(i + 1);
            clauses.push_back(name + " (" + std::string(symbol) + ") is at " + coord(items[i]));
        }
    };
    numbered("box", "X");
    numbered("target", "O");
    return detail::join(clauses, "; ") + ".";
}

std::string frozen_lake_sentence(const std::vector<Entity>& entities) {
    std::vector<std::string> clauses;
    for (const auto& p : with_label(entities, "player")) clauses.push_back("Player at " + coord(p));
    const auto holes = with_label(entities, "hole");
    if (holes.empty()) clauses.push_back("no holes");
    else if (holes.size() == 1) clauses.push_back("hole at " + coord(holes[0]));
    else clauses.push_back("holes at " + and_list(holes));
    for (const auto& g : with_label(entities, "goal")) clauses.push_back("goal at " + coord(g));
    return detail::join(clauses, "; ") + ".";
}

std::string sudoku_sentence(const std::vector<Entity>& entities) {
    std::vector<std::string> parts;
    for (const auto& e : entities) parts.push_back(coord(e));
    return "Empty positions to be filled are at " + (parts.empty() ? std::string("none") : detail::join(parts, ", "));
}

bool in_grid_alphabet(EnvKind kind, std::string_view unit) {
    switch (kind) {
        case EnvKind::Sokoban:
            return unit == "#" || unit == "_" || unit == "O" || unit == "X" || unit == "P" || unit == "S" ||
                   unit == "\xE2\x88\x9A";
        case EnvKind::FrozenLake:
            return unit == "_" || unit == "O" || unit == "G" || unit == "P" || unit == "X" || unit == "\xE2\x88\x9A";
        case EnvKind::Sudoku:
            return unit == "|" || unit == " " || unit == "." || unit == "1" || unit == "2" || unit == "3" ||
                   unit == "4";
    }
    return false;
}

}  // namespace

std::string abstraction_text(EnvKind kind, const std::vector<Entity>& entities) {
    switch (kind) {
        case EnvKind::Sokoban: return sokoban_sentence(entities);
        case EnvKind::FrozenLake: return frozen_lake_sentence(entities);
        case EnvKind::Sudoku: return sudoku_sentence(entities);
    }
    return {};
}

CoordinateAbstraction abstract_state(const EpisodeState& state) {
    CoordinateAbstraction out;
    out.kind = state.kind();
    std::visit(
        [&](const auto& board) {
            using Board = std::decay_t<decltype(board)>;
            if constexpr (std::is_same_v<Board, SokobanBoard>) {
                out.entities.push_back({"player", board.player.row, board.player.col});
                for (Pos b : board.boxes) out.entities.push_back({"box", b.row, b.col});
                for (Pos t : board.targets) out.entities.push_back({"target", t.row, t.col});
            } else if constexpr (std::is_same_v<Board, FrozenLakeBoard>) {
                out.entities.push_back({"player", board.player.row, board.player.col});
                for (Pos h : board.holes) out.entities.push_back({"hole", h.row, h.col});
                out.entities.push_back({"goal", board.goal.row, board.goal.col});
            } else {
                for (int i = 0; i < 16; ++i)
                    if (board.cells[static_cast<std::size_t>(i)] == 0) out.entities.push_back({"empty", i / 4 + 1, i % 4 + 1});
            }
        },
        state.payload);
    out.text = abstraction_text(out.kind, out.entities);
    return out;
}

StateText compose_state(const EpisodeState& state) {
    StateText st;
    st.raw = render_symbols(state);
    st.abstraction = abstract_state(state).text;
    st.composed = st.raw + "\n" + st.abstraction;
    return st;
}

CoordinateAbstraction randomize_coordinates(const CoordinateAbstraction& abstraction, std::uint64_t rng_seed,
                                            int grid_size) {
    if (grid_size < 1) throw std::invalid_argument("randomize_coordinates: grid_size must be positive");
    Rng rng(rng_seed);
    const int base = abstraction.kind == EnvKind::Sudoku ? 1 : 0;
    CoordinateAbstraction out = abstraction;
    for (auto& e : out.entities) {
        e.row = base + rng.below_int(grid_size);
        e.col = base + rng.below_int(grid_size);
    }
    out.text = abstraction_text(out.kind, out.entities);
    return out;
}

std::pair<std::string, std::string> split_composed(EnvKind kind, const std::string& composed) {
    const auto lines = detail::split_lines(composed);
    std::size_t offset = 0;
    for (const auto line : lines) {
        const auto units = detail::utf8_units(line);
        const bool grid_line = !units.empty() && std::all_of(units.begin(), units.end(), [kind](auto u) {
            return in_grid_alphabet(kind, u);
        });
        if (!grid_line) {
            if (offset == 0) return {std::string(), composed};
            return {composed.substr(0, offset - 1), composed.substr(offset)};
        }
        offset += line.size() + 1;
    }
    return {composed, std::string()};
}

}  // namespace gridwm
