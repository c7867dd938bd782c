#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gridwm/env.hpp"

namespace gridwm {

/// One located entity in a coordinate abstraction. Labels are "player",
/// "box", "target", "hole", "goal" or "empty" (Sudoku blank cell).
struct Entity {
    std::string label;
    int row = 0;
    int col = 0;
    bool operator==(const Entity&) const = default;
};

/// Natural-language coordinate sentence plus the entities it was built from.
/// Sudoku coordinates are 1-indexed, everything else zero-indexed.
struct CoordinateAbstraction {
    EnvKind kind = EnvKind::Sokoban;
    std::vector<Entity> entities;
    std::string text;
    bool operator==(const CoordinateAbstraction&) const = default;
};

struct StateText {
    std::string raw;          // symbol grid
    std::string abstraction;  // coordinate sentence
    std::string composed;     // raw + "\n" + abstraction
    bool operator==(const StateText&) const = default;
};

CoordinateAbstraction abstract_state(const EpisodeState& state);

/// Regenerates the sentence for `entities` using the per-kind template.
std::string abstraction_text(EnvKind kind, const std::vector<Entity>& entities);

StateText compose_state(const EpisodeState& state);

/// Replaces every coordinate with an independent uniform draw over the grid
/// (rows/cols in [0, grid_size), or [1, grid_size] for Sudoku). Labels and
/// entity order are preserved.
CoordinateAbstraction randomize_coordinates(const CoordinateAbstraction& abstraction, std::uint64_t rng_seed,
                                            int grid_size);

/// Splits a composed state back into (raw, abstraction): the raw part ends
/// before the first line containing a character outside the kind's grid
/// alphabet.
std::pair<std::string, std::string> split_composed(EnvKind kind, const std::string& composed);

}  // namespace gridwm
