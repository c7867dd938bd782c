#include "gridwm/world_model.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <tuple>

#include "gridwm/errors.hpp"
#include "text_util.hpp"

namespace gridwm {

namespace {

std::string escape_field(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

std::string unescape_field(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\' || i + 1 == s.size()) {
            out += s[i];
            continue;
        }
        const char next = s[++i];
        if (next == 'n') out += '\n';
        else if (next == 't') out += '\t';
        else out += next;
    }
    return out;
}

constexpr std::string_view kTableHeader = "# gridwm transition table v1";

}  // namespace

StateKey state_key(const EpisodeState& state) { return render_symbols(state); }

Triple make_triple(const EpisodeState& before, const Action& action, const EpisodeState& after) {
    return {state_key(before), format_action(action), state_key(after)};
}

void TransitionTable::add(const StateKey& state, const std::string& action, const StateKey& next,
                          std::uint64_t count) {
    entries_[state][action][next] += count;
}

void TransitionTable::merge(const TransitionTable& other) {
    for (const auto& [state, by_action] : other.entries_)
        for (const auto& [action, succ] : by_action)
            for (const auto& [next, count] : succ) add(state, action, next, count);
}

const TransitionTable::Successors* TransitionTable::successors(const StateKey& state, const std::string& action) const {
    auto s = entries_.find(state);
    if (s == entries_.end()) return nullptr;
    auto a = s->second.find(action);
    if (a == s->second.end()) return nullptr;
    return &a->second;
}

std::uint64_t TransitionTable::total(const StateKey& state, const std::string& action) const {
    const auto* succ = successors(state, action);
    if (succ == nullptr) return 0;
    std::uint64_t n = 0;
    for (const auto& [next, count] : *succ) n += count;
    return n;
}

std::size_t TransitionTable::pair_count() const {
    std::size_t n = 0;
    for (const auto& [state, by_action] : entries_) n += by_action.size();
    return n;
}

bool TransitionTable::is_deterministic() const {
    for (const auto& [state, by_action] : entries_)
        for (const auto& [action, succ] : by_action)
            if (succ.size() != 1) return false;
    return true;
}

std::string TransitionTable::export_text() const {
    std::string out(kTableHeader);
    out += '\n';
    for (const auto& [state, by_action] : entries_) {
        for (const auto& [action, succ] : by_action) {
            for (const auto& [next, count] : succ) {
                out += escape_field(state) + '\t' + escape_field(action) + '\t' + escape_field(next) + '\t' +
                       std::to_string(count) + '\n';
            }
        }
    }
    return out;
}

TransitionTable TransitionTable::import_text(std::string_view text) {
    TransitionTable table;
    std::size_t line_no = 0;
    for (auto line : detail::split_lines(text)) {
        ++line_no;
        // Comments start with "# "; Sokoban keys start with a wall row.
        if (line.empty() || line.rfind("# ", 0) == 0) continue;
        const auto fields = detail::split(line, "\t");
        if (fields.size() != 4) throw std::invalid_argument("transition table line " + std::to_string(line_no) + ": expected 4 fields");
        std::uint64_t count = 0;
        const auto f = fields[3];
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), count);
        if (ec != std::errc{} || ptr != f.data() + f.size())
            throw std::invalid_argument("transition table line " + std::to_string(line_no) + ": bad count");
        table.add(unescape_field(fields[0]), unescape_field(fields[1]), unescape_field(fields[2]), count);
    }
    return table;
}

TransitionTable fit(std::span<const Triple> triples) {
    TransitionTable table;
    for (const auto& t : triples) table.add(t);
    return table;
}

std::optional<Distribution> predict(const TransitionTable& table, const StateKey& state, const Action& action) {
    const auto* succ = table.successors(state, format_action(action));
    if (succ == nullptr) return std::nullopt;
    const double total = static_cast<double>(table.total(state, format_action(action)));
    Distribution dist;
    for (const auto& [next, count] : *succ) dist.emplace_back(next, static_cast<double>(count) / total);
    return dist;
}

std::optional<StateKey> predict_argmax(const TransitionTable& table, const StateKey& state, const std::string& action) {
    const auto* succ = table.successors(state, action);
    if (succ == nullptr) return std::nullopt;
    const StateKey* best = nullptr;
    std::uint64_t best_count = 0;
    for (const auto& [next, count] : *succ) {
        if (best == nullptr || count > best_count) {  // map order: first max is the smallest key
            best = &next;
            best_count = count;
        }
    }
    return *best;
}

double eval_accuracy(const TransitionTable& table, std::span<const Triple> heldout) {
    if (heldout.empty()) throw EmptyHeldout();
    std::size_t correct = 0;
    for (const auto& t : heldout) {
        auto guess = predict_argmax(table, t.state, t.action);
        if (guess && *guess == t.next) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(heldout.size());
}

std::optional<ModelPlan> plan(const TransitionTable& table, const StateKey& start,
                              const std::function<bool(const StateKey&)>& success, const PlanOptions& options) {
    if (options.horizon < 1) throw std::invalid_argument("plan: horizon must be >= 1");
    if (success(start)) return ModelPlan{{}, start, 1.0};

    struct Node {
        StateKey key;
        int parent;
        std::string action;
        int depth;
        double prob;
    };
    std::vector<Node> nodes{{start, -1, {}, 0, 1.0}};
    auto finish = [&](int leaf) {
        ModelPlan p;
        p.predicted_end = nodes[static_cast<std::size_t>(leaf)].key;
        p.probability = nodes[static_cast<std::size_t>(leaf)].prob;
        for (int i = leaf; nodes[static_cast<std::size_t>(i)].parent >= 0; i = nodes[static_cast<std::size_t>(i)].parent)
            p.actions.push_back(nodes[static_cast<std::size_t>(i)].action);
        std::reverse(p.actions.begin(), p.actions.end());
        return p;
    };
    std::size_t expanded = 0;

    if (table.is_deterministic()) {
        std::set<StateKey> seen{start};
        for (std::size_t head = 0; head < nodes.size(); ++head) {
            if (nodes[head].depth >= options.horizon) continue;
            if (++expanded > options.node_budget) throw BudgetExceeded("model planner exceeded node budget");
            auto s = table.entries().find(nodes[head].key);
            if (s == table.entries().end()) continue;
            for (const auto& [action, succ] : s->second) {
                auto next = predict_argmax(table, nodes[head].key, action);
                if (!next || !seen.insert(*next).second) continue;
                nodes.push_back({*next, static_cast<int>(head), action, nodes[head].depth + 1, 1.0});
                if (success(*next)) return finish(static_cast<int>(nodes.size()) - 1);
            }
        }
        return std::nullopt;
    }

    // Best-first on path probability over (state, depth) labels. Path
    // probabilities never increase along a path, so the first goal popped
    // is the most probable one within the horizon.
    using Entry = std::tuple<double, int, std::int64_t, int>;  // prob, -depth, -seq, node
    auto cmp = [](const Entry& a, const Entry& b) { return a < b; };
    std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> open(cmp);
    std::int64_t seq = 0;
    open.emplace(1.0, 0, 0, 0);
    std::set<std::pair<StateKey, int>> closed;
    while (!open.empty()) {
        const auto [prob, neg_depth, neg_seq, idx] = open.top();
        open.pop();
        const Node current = nodes[static_cast<std::size_t>(idx)];
        if (!closed.emplace(current.key, current.depth).second) continue;
        if (success(current.key)) return finish(idx);
        if (current.depth >= options.horizon) continue;
        if (++expanded > options.node_budget) throw BudgetExceeded("model planner exceeded node budget");
        auto s = table.entries().find(current.key);
        if (s == table.entries().end()) continue;
        for (const auto& [action, succ] : s->second) {
            const double total = static_cast<double>(table.total(current.key, action));
            for (const auto& [next, count] : succ) {
                const double p = current.prob * static_cast<double>(count) / total;
                nodes.push_back({next, idx, action, current.depth + 1, p});
                ++seq;
                open.emplace(p, -(current.depth + 1), -seq, static_cast<int>(nodes.size()) - 1);
            }
        }
    }
    return std::nullopt;
}

std::function<bool(const StateKey&)> success_predicate(const EnvConfig& config) {
    return [config](const StateKey& key) {
        try {
            return is_success(parse_symbols(key, config));
        } catch (const std::invalid_argument&) {
            return false;
        }
    };
}

std::vector<Action> action_space(const EpisodeState& state) {
    std::vector<Action> out;
    if (state.kind() == EnvKind::Sudoku) {
        for (int r = 1; r <= 4; ++r)
            for (int c = 1; c <= 4; ++c)
                for (int v = 1; v <= 4; ++v) out.emplace_back(SudokuMove{r, c, v});
    } else {
        for (Direction d : kDirections) out.emplace_back(d);
    }
    return out;
}

std::vector<Triple> explore_random(const EpisodeState& start, int steps, std::uint64_t seed, int patience,
                                   int max_episodes) {
    std::vector<Triple> triples;
    if (start.terminal) return triples;
    const auto actions = action_space(start);
    Rng rng(seed);
    std::set<std::pair<StateKey, std::string>> seen;
    int quiet = 0;
    for (int episode = 0; episode < max_episodes && quiet < patience; ++episode) {
        EpisodeState state = start;
        state.reseed(mix_seed(seed, static_cast<std::uint64_t>(episode)));
        bool discovered = false;
        for (int i = 0; i < steps && !state.terminal; ++i) {
            const Action& a = actions[rng.below(actions.size())];
            auto result = step(state, std::span<const Action>(&a, 1));
            triples.push_back(make_triple(state, a, result.next_state));
            discovered |= seen.emplace(triples.back().state, triples.back().action).second;
            state = std::move(result.next_state);
        }
        quiet = discovered ? 0 : quiet + 1;
    }
    return triples;
}

std::vector<Triple> explore_restarts(const EpisodeState& start, int horizon, std::uint64_t seed, int patience,
                                     int max_episodes) {
    std::vector<Triple> triples;
    if (start.terminal || horizon < 1) return triples;
    const auto actions = action_space(start);
    Rng rng(seed);
    struct Visited {
        EpisodeState state;
        int depth;
    };
    std::vector<Visited> visited{{start, 0}};
    std::map<StateKey, std::size_t> index{{state_key(start), 0}};
    std::vector<std::size_t> open{0};  // expandable: depth < horizon, not terminal
    std::set<std::pair<StateKey, std::string>> seen;
    int quiet = 0;
    for (int episode = 0; episode < max_episodes && quiet < patience && !open.empty(); ++episode) {
        const std::size_t from = open[rng.below(open.size())];
        EpisodeState state = visited[from].state;
        int depth = visited[from].depth;
        state.reseed(mix_seed(seed, static_cast<std::uint64_t>(episode)));
        bool discovered = false;
        while (depth < horizon && !state.terminal) {
            const Action& a = actions[rng.below(actions.size())];
            auto result = step(state, std::span<const Action>(&a, 1));
            triples.push_back(make_triple(state, a, result.next_state));
            discovered |= seen.emplace(triples.back().state, triples.back().action).second;
            state = std::move(result.next_state);
            ++depth;
            const auto& key = triples.back().next;
            auto [it, fresh] = index.emplace(key, visited.size());
            if (fresh) {
                visited.push_back({state, depth});
                if (depth < horizon && !state.terminal) open.push_back(it->second);
            } else if (depth < visited[it->second].depth) {
                auto& v = visited[it->second];
                if (v.depth >= horizon && !state.terminal) open.push_back(it->second);
                v = {state, depth};
            }
        }
        quiet = discovered ? 0 : quiet + 1;
    }
    return triples;
}

std::vector<Triple> random_log(const EnvConfig& config, std::uint64_t seed_start, int num_instances, int total_steps,
                               int episode_length, std::uint64_t walk_seed) {
    if (num_instances < 1 || episode_length < 1 || total_steps < 0)
        throw InvalidConfig("random_log needs positive instance count and episode length");
    std::vector<EpisodeState> starts;
    for (int i = 0; i < num_instances; ++i) starts.push_back(generate(config, seed_start + static_cast<std::uint64_t>(i)));
    Rng rng(walk_seed);
    std::vector<Triple> triples;
    bool any_live = false;
    for (const auto& s : starts) any_live |= !s.terminal;
    if (!any_live) return triples;
    for (std::uint64_t episode = 0; static_cast<int>(triples.size()) < total_steps; ++episode) {
        EpisodeState state = starts[episode % starts.size()];
        state.reseed(mix_seed(walk_seed, episode));
        const auto actions = action_space(state);
        for (int i = 0; i < episode_length && !state.terminal && static_cast<int>(triples.size()) < total_steps; ++i) {
            const Action& a = actions[rng.below(actions.size())];
            auto result = step(state, std::span<const Action>(&a, 1));
            triples.push_back(make_triple(state, a, result.next_state));
            state = std::move(result.next_state);
        }
    }
    return triples;
}

}  // namespace gridwm
