#include <doctest.h>

#include <regex>
#include <set>

#include "fixtures.hpp"
#include "gridwm/env.hpp"
#include "gridwm/state_rep.hpp"
#include "oracles.hpp"

using namespace gridwm;

namespace {

// Reads (label, row, col) straight off a symbol grid.
std::multiset<std::tuple<std::string, int, int>> grid_entities(EnvKind kind, std::string_view text) {
    std::multiset<std::tuple<std::string, int, int>> out;
    const auto g = oracle::grid(text);
    for (int r = 0; r < static_cast<int>(g.size()); ++r)
        for (int c = 0; c < static_cast<int>(g[static_cast<std::size_t>(r)].size()); ++c) {
            const auto& u = g[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            if (kind == EnvKind::Sokoban) {
                if (u == "P" || u == "S") out.insert({"player", r, c});
                if (u == "X" || u == oracle::kCheck) out.insert({"box", r, c});
                if (u == "O" || u == "S" || u == oracle::kCheck) out.insert({"target", r, c});
            } else {
                if (u == "P" || u == "X" || u == oracle::kCheck) out.insert({"player", r, c});
                if (u == "O" || u == "X") out.insert({"hole", r, c});
                if (u == "G" || u == oracle::kCheck) out.insert({"goal", r, c});
            }
        }
    return out;
}

std::multiset<std::tuple<std::string, int, int>> as_set(const CoordinateAbstraction& a) {
    std::multiset<std::tuple<std::string, int, int>> out;
    for (const auto& e : a.entities) out.insert({e.label, e.row, e.col});
    return out;
}

// Coordinates mentioned in a sentence, in order.
std::vector<std::pair<int, int>> sentence_coords(const std::string& text) {
    std::vector<std::pair<int, int>> out;
    static const std::regex re(R"(\((\d+),(\d+)\))");
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it)
        out.emplace_back(std::stoi((*it)[1]), std::stoi((*it)[2]));
    return out;
}

}  // namespace

TEST_CASE("Sokoban abstraction sentence matches the worked example") {
    const auto s = parse_symbols(fixture::kSection21Grid, EnvConfig::defaults(EnvKind::Sokoban));
    const auto a = abstract_state(s);
    CHECK(a.text == fixture::kSection21Sentence);
    const auto st = compose_state(s);
    CHECK(st.raw == fixture::kSection21Grid);
    CHECK(st.composed == std::string(fixture::kSection21Grid) + "\n" + std::string(fixture::kSection21Sentence));
}

TEST_CASE("FrozenLake and Sudoku sentences") {
    const auto lake = parse_symbols(fixture::kFrozenLakeStart, EnvConfig::defaults(EnvKind::FrozenLake));
    CHECK(abstract_state(lake).text == "Player at (3,2); holes at (0,1) and (1,0); goal at (2,0).");
    const auto one_hole = parse_symbols("P_O_\n____\n____\n___G", EnvConfig::defaults(EnvKind::FrozenLake));
    CHECK(abstract_state(one_hole).text == "Player at (0,0); hole at (0,2); goal at (3,3).");

    const auto sudoku = parse_symbols(fixture::kSudokuStart, EnvConfig::defaults(EnvKind::Sudoku));
    CHECK(abstract_state(sudoku).text ==
          "Empty positions to be filled are at (1,1), (1,2), (2,3), (3,3), (3,4), (4,1)");
    auto full = EnvConfig::defaults(EnvKind::Sudoku);
    full.num_empty_cells = 0;
    CHECK(abstract_state(generate(full, 1)).text == "Empty positions to be filled are at none");
}

TEST_CASE("multi-box sentences number the entities") {
    auto config = EnvConfig::defaults(EnvKind::Sokoban);
    config.num_boxes = 2;
    const auto s = parse_symbols("######\n#P_X_#\n#__X_#\n#____#\n#O_O_#\n######", config);
    CHECK(abstract_state(s).text ==
          "Player (P) is at (1,1); box 1 (X) is at (1,3); box 2 (X) is at (2,3); target 1 (O) is at (4,1); "
          "target 2 (O) is at (4,3).");
}

TEST_CASE("abstractions are faithful to the grid") {
    for (EnvKind kind : {EnvKind::Sokoban, EnvKind::FrozenLake}) {
        const auto config = EnvConfig::defaults(kind);
        for (std::uint64_t seed = 0; seed < 1000; ++seed) {
            auto s = generate(config, seed);
            // Include some non-initial states.
            Rng walk(seed);
            for (int i = 0; i < 3 && !s.terminal; ++i) {
                std::vector<Action> a{kDirections[static_cast<std::size_t>(walk.below_int(4))]};
                s = step(s, a).next_state;
            }
            const auto a = abstract_state(s);
            REQUIRE(as_set(a) == grid_entities(kind, render_symbols(s)));
            std::vector<std::pair<int, int>> expected;
            for (const auto& e : a.entities) expected.emplace_back(e.row, e.col);
            CHECK(sentence_coords(a.text) == expected);
        }
    }
    const auto config = EnvConfig::defaults(EnvKind::Sudoku);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto s = generate(config, seed);
        std::vector<std::pair<int, int>> blanks;
        for (int i = 0; i < 16; ++i)
            if (s.sudoku().cells[static_cast<std::size_t>(i)] == 0) blanks.emplace_back(i / 4 + 1, i % 4 + 1);
        CHECK(sentence_coords(abstract_state(s).text) == blanks);
    }
}

TEST_CASE("randomize_coordinates keeps labels and draws within the grid") {
    const auto s = parse_symbols(fixture::kSection21Grid, EnvConfig::defaults(EnvKind::Sokoban));
    const auto a = abstract_state(s);
    const auto r = randomize_coordinates(a, 5, 6);
    REQUIRE(r.entities.size() == a.entities.size());
    for (std::size_t i = 0; i < a.entities.size(); ++i) {
        CHECK(r.entities[i].label == a.entities[i].label);
        CHECK(r.entities[i].row >= 0);
        CHECK(r.entities[i].row < 6);
    }
    CHECK(r == randomize_coordinates(a, 5, 6));
    CHECK(r.text == abstraction_text(EnvKind::Sokoban, r.entities));

    const auto zero = randomize_coordinates(a, 9, 1);
    for (const auto& e : zero.entities) CHECK((e.row == 0 && e.col == 0));
    CHECK(zero.text == "Player (P) is at (0,0); box (X) is at (0,0); target (O) is at (0,0).");

    const auto sudoku = abstract_state(parse_symbols(fixture::kSudokuStart, EnvConfig::defaults(EnvKind::Sudoku)));
    for (const auto& e : randomize_coordinates(sudoku, 3, 4).entities) {
        CHECK(e.row >= 1);
        CHECK(e.row <= 4);
    }
    CHECK_THROWS(randomize_coordinates(a, 1, 0));

    // Draws cover the grid roughly uniformly.
    std::map<int, int> rows;
    for (std::uint64_t seed = 0; seed < 4000; ++seed) rows[randomize_coordinates(a, seed, 4).entities[0].row]++;
    for (auto [row, n] : rows) CHECK(std::abs(n / 4000.0 - 0.25) < 0.03);
}

TEST_CASE("split_composed recovers both parts") {
    for (EnvKind kind : {EnvKind::Sokoban, EnvKind::FrozenLake, EnvKind::Sudoku}) {
        const auto config = EnvConfig::defaults(kind);
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto st = compose_state(generate(config, seed));
            const auto [raw, abstraction] = split_composed(kind, st.composed);
            CHECK(raw == st.raw);
            CHECK(abstraction == st.abstraction);
        }
    }
    CHECK(split_composed(EnvKind::Sokoban, "hello") == std::pair<std::string, std::string>{"", "hello"});
    CHECK(split_composed(EnvKind::Sokoban, "##\n##") == std::pair<std::string, std::string>{"##\n##", ""});
}
