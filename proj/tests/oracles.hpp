#pragma once

// Brute-force reference implementations used by the tests. They work on
// symbol grids directly and share no code with the library's dynamics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace oracle {

inline std::vector<std::string> units(std::string_view s) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < s.size();) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = c < 0x80 ? 1 : c < 0xE0 ? 2 : c < 0xF0 ? 3 : 4;
        out.emplace_back(s.substr(i, len));
        i += len;
    }
    return out;
}

inline std::vector<std::vector<std::string>> grid(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        rows.push_back(units(text.substr(start, end - start)));
        start = end + 1;
    }
    return rows;
}

inline const std::string kCheck = "\xE2\x88\x9A";  // √

constexpr std::array<std::pair<int, int>, 4> kMoves = {{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};  // Up Down Left Right
inline const std::array<std::string, 4> kMoveNames = {"Up", "Down", "Left", "Right"};

// ---------------------------------------------------------------- Sokoban

struct Soko {
    int n = 0;
    std::vector<std::vector<bool>> wall;
    std::pair<int, int> player;
    std::set<std::pair<int, int>> boxes, targets;

    bool solved() const { return boxes == targets; }
    std::string key() const {
        std::string k = std::to_string(player.first) + "," + std::to_string(player.second) + ":";
        for (auto [r, c] : boxes) k += std::to_string(r) + "," + std::to_string(c) + ";";
        return k;
    }
    bool blocked(int r, int c) const { return r < 0 || c < 0 || r >= n || c >= n || wall[r][c]; }

    // Returns whether anything moved.
    bool move(int m) {
        auto [dr, dc] = kMoves[static_cast<std::size_t>(m)];
        const int r = player.first + dr, c = player.second + dc;
        if (blocked(r, c)) return false;
        if (boxes.count({r, c})) {
            const int r2 = r + dr, c2 = c + dc;
            if (blocked(r2, c2) || boxes.count({r2, c2})) return false;
            boxes.erase({r, c});
            boxes.insert({r2, c2});
        }
        player = {r, c};
        return true;
    }

    std::string render() const {
        std::string out;
        for (int r = 0; r < n; ++r) {
            if (r) out += '\n';
            for (int c = 0; c < n; ++c) {
                const bool b = boxes.count({r, c}), t = targets.count({r, c}), p = player == std::make_pair(r, c);
                if (wall[r][c]) out += '#';
                else if (b && t) out += kCheck;
                else if (b) out += 'X';
                else if (p && t) out += 'S';
                else if (p) out += 'P';
                else if (t) out += 'O';
                else out += '_';
            }
        }
        return out;
    }
};

inline Soko parse_soko(std::string_view text) {
    Soko s;
    const auto g = grid(text);
    s.n = static_cast<int>(g.size());
    s.wall.assign(static_cast<std::size_t>(s.n), std::vector<bool>(static_cast<std::size_t>(s.n), false));
    for (int r = 0; r < s.n; ++r)
        for (int c = 0; c < s.n; ++c) {
            const auto& u = g[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            if (u == "#") s.wall[r][c] = true;
            if (u == "X" || u == kCheck) s.boxes.insert({r, c});
            if (u == "O" || u == kCheck || u == "S") s.targets.insert({r, c});
            if (u == "P" || u == "S") s.player = {r, c};
        }
    return s;
}

/// Shortest solution length by BFS; nullopt when none within `limit` moves.
inline std::optional<int> soko_shortest(std::string_view text, int limit = 1000) {
    Soko start = parse_soko(text);
    if (start.solved()) return 0;
    std::map<std::string, int> dist{{start.key(), 0}};
    std::deque<Soko> q{start};
    while (!q.empty()) {
        Soko s = q.front();
        q.pop_front();
        const int d = dist[s.key()];
        if (d >= limit) continue;
        for (int m = 0; m < 4; ++m) {
            Soko t = s;
            if (!t.move(m)) continue;
            if (!dist.emplace(t.key(), d + 1).second) continue;
            if (t.solved()) return d + 1;
            q.push_back(t);
        }
    }
    return std::nullopt;
}

/// Iterative deepening: is there any plan of length <= depth?
inline bool soko_solvable_within(const Soko& s, int depth) {
    if (s.solved()) return true;
    if (depth == 0) return false;
    for (int m = 0; m < 4; ++m) {
        Soko t = s;
        if (t.move(m) && soko_solvable_within(t, depth - 1)) return true;
    }
    return false;
}

/// Distinct (state render, action) pairs reachable from the start within
/// `horizon` single moves, never expanding solved states.
inline std::set<std::pair<std::string, int>> soko_reachable_pairs(std::string_view text, int horizon) {
    std::set<std::pair<std::string, int>> pairs;
    Soko start = parse_soko(text);
    std::map<std::string, int> depth{{start.render(), 0}};
    std::deque<Soko> q{start};
    while (!q.empty()) {
        Soko s = q.front();
        q.pop_front();
        const auto key = s.render();
        const int d = depth[key];
        if (d >= horizon || s.solved()) continue;
        for (int m = 0; m < 4; ++m) {
            pairs.insert({key, m});
            Soko t = s;
            t.move(m);
            if (depth.emplace(t.render(), d + 1).second) q.push_back(t);
        }
    }
    return pairs;
}

/// Probability that `steps` uniform random moves reach the solved state
/// (absorbing), by exact dynamic programming over the state distribution.
inline double soko_random_success(std::string_view text, int steps) {
    std::map<std::string, std::pair<Soko, double>> dist;
    Soko start = parse_soko(text);
    dist[start.key()] = {start, 1.0};
    double solved = start.solved() ? 1.0 : 0.0;
    if (solved > 0) return 1.0;
    for (int t = 0; t < steps; ++t) {
        std::map<std::string, std::pair<Soko, double>> next;
        for (auto& [k, sp] : dist) {
            for (int m = 0; m < 4; ++m) {
                Soko s = sp.first;
                s.move(m);
                const double p = sp.second / 4.0;
                if (s.solved()) {
                    solved += p;
                    continue;
                }
                auto [it, fresh] = next.emplace(s.key(), std::make_pair(s, 0.0));
                it->second.second += p;
            }
        }
        dist = std::move(next);
    }
    return solved;
}

// ------------------------------------------------------------- FrozenLake

struct Lake {
    int n = 0;
    std::set<std::pair<int, int>> holes;
    std::pair<int, int> goal, player;
};

inline Lake parse_lake(std::string_view text) {
    Lake l;
    const auto g = grid(text);
    l.n = static_cast<int>(g.size());
    for (int r = 0; r < l.n; ++r)
        for (int c = 0; c < l.n; ++c) {
            const auto& u = g[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            if (u == "O" || u == "X") l.holes.insert({r, c});
            if (u == "G" || u == kCheck) l.goal = {r, c};
            if (u == "P" || u == kCheck || u == "X") l.player = {r, c};
        }
    return l;
}

inline std::pair<int, int> lake_move(const Lake& l, std::pair<int, int> from, int m) {
    auto [dr, dc] = kMoves[static_cast<std::size_t>(m)];
    const int r = from.first + dr, c = from.second + dc;
    if (r < 0 || c < 0 || r >= l.n || c >= l.n) return from;
    return {r, c};
}

/// Optimal success probability of slippery FrozenLake by Gauss-Seidel value
/// iteration, an update order different from the library's Jacobi sweep.
inline std::vector<double> lake_optimal_values(const Lake& l, double p_intended, int sweeps = 20000) {
    const double p_side = (1.0 - p_intended) / 2.0;
    auto perp = [](int m) { return m < 2 ? std::array<int, 2>{2, 3} : std::array<int, 2>{0, 1}; };
    std::vector<double> v(static_cast<std::size_t>(l.n * l.n), 0.0);
    auto idx = [&](std::pair<int, int> p) { return static_cast<std::size_t>(p.first * l.n + p.second); };
    v[idx(l.goal)] = 1.0;
    for (int it = 0; it < sweeps; ++it) {
        double delta = 0;
        for (int r = l.n - 1; r >= 0; --r)
            for (int c = l.n - 1; c >= 0; --c) {
                const std::pair<int, int> s{r, c};
                if (s == l.goal || l.holes.count(s)) continue;
                double best = 0;
                for (int m = 0; m < 4; ++m) {
                    double q = p_intended * v[idx(lake_move(l, s, m))];
                    for (int side : perp(m)) q += p_side * v[idx(lake_move(l, s, side))];
                    best = std::max(best, q);
                }
                delta = std::max(delta, std::abs(best - v[idx(s)]));
                v[idx(s)] = best;
            }
        if (delta < 1e-15) break;
    }
    return v;
}

// ----------------------------------------------------------------- Sudoku

inline bool sudoku_ok(const std::array<int, 16>& g) {
    for (int i = 0; i < 4; ++i) {
        std::set<int> row, col, box;
        for (int j = 0; j < 4; ++j) {
            const int a = g[static_cast<std::size_t>(i * 4 + j)], b = g[static_cast<std::size_t>(j * 4 + i)];
            const int br = (i / 2) * 2 + j / 2, bc = (i % 2) * 2 + j % 2;
            const int x = g[static_cast<std::size_t>(br * 4 + bc)];
            if (a && !row.insert(a).second) return false;
            if (b && !col.insert(b).second) return false;
            if (x && !box.insert(x).second) return false;
        }
    }
    return true;
}

/// Every consistent completion, by trying all 4^k fills of the k blanks.
inline std::vector<std::array<int, 16>> sudoku_completions(const std::array<int, 16>& g) {
    std::vector<int> blanks;
    for (int i = 0; i < 16; ++i)
        if (!g[static_cast<std::size_t>(i)]) blanks.push_back(i);
    std::vector<std::array<int, 16>> out;
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < blanks.size(); ++i) total *= 4;
    for (std::uint64_t code = 0; code < total; ++code) {
        auto h = g;
        std::uint64_t x = code;
        for (int b : blanks) {
            h[static_cast<std::size_t>(b)] = static_cast<int>(x % 4) + 1;
            x /= 4;
        }
        if (sudoku_ok(h)) out.push_back(h);
    }
    return out;
}

// ----------------------------------------------------------------- Pass@k

/// (subsets of size k containing a success, all subsets of size k) for n
/// labeled rollouts whose first c are successes.
inline std::pair<std::uint64_t, std::uint64_t> pass_at_k_enumerate(int n, int c, int k) {
    std::uint64_t hit = 0, all = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        ++all;
        if (mask & ((1u << c) - 1u)) ++hit;
    }
    return {hit, all};
}

}  // namespace oracle
