#include "gridwm/serialize.hpp"

#include <cstdio>

#include "gridwm/errors.hpp"

namespace gridwm {

namespace {

json pos_json(Pos p) { return json::array({p.row, p.col}); }
Pos pos_from(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

json positions(const std::vector<Pos>& v) {
    json out = json::array();
    for (Pos p : v) out.push_back(pos_json(p));
    return out;
}

std::vector<Pos> positions_from(const json& j) {
    std::vector<Pos> out;
    for (const auto& p : j) out.push_back(pos_from(p));
    return out;
}

// Mask spans are stored as byte offsets and exchanged as code point offsets.
std::size_t byte_to_char(const std::string& text, std::size_t byte) {
    std::size_t chars = 0;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) ++chars;
    return chars;
}

std::size_t char_to_byte(const std::string& text, std::size_t chars) {
    std::size_t i = 0;
    for (std::size_t seen = 0; i < text.size(); ++i) {
        if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
            if (seen == chars) return i;
            ++seen;
        }
    }
    return i;
}

template <class T>
void read_if(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

json to_json(const RewardScheme& r) {
    return {{"step_penalty", r.step_penalty}, {"progress_bonus", r.progress_bonus}, {"success_bonus", r.success_bonus}};
}

RewardScheme reward_scheme_from_json(const json& j, RewardScheme base) {
    read_if(j, "step_penalty", base.step_penalty);
    read_if(j, "progress_bonus", base.progress_bonus);
    read_if(j, "success_bonus", base.success_bonus);
    return base;
}

json to_json(const EnvConfig& c) {
    json j = {{"kind", to_string(c.kind)}, {"grid_size", c.grid_size}, {"max_turns", c.max_turns},
              {"rewards", to_json(c.rewards)}};
    switch (c.kind) {
        case EnvKind::Sokoban:
            j["num_boxes"] = c.num_boxes;
            j["reverse_steps"] = c.reverse_steps;
            break;
        case EnvKind::FrozenLake:
            j["hole_density"] = c.hole_density;
            j["slippery"] = c.slippery;
            j["slip_intended_prob"] = c.slip_intended_prob;
            break;
        case EnvKind::Sudoku: j["num_empty_cells"] = c.num_empty_cells; break;
    }
    return j;
}

EnvConfig env_config_from_json(const json& j) {
    EnvConfig c = EnvConfig::defaults(env_kind_from_string(j.at("kind").get<std::string>()));
    read_if(j, "grid_size", c.grid_size);
    read_if(j, "num_boxes", c.num_boxes);
    read_if(j, "hole_density", c.hole_density);
    read_if(j, "slippery", c.slippery);
    read_if(j, "slip_intended_prob", c.slip_intended_prob);
    read_if(j, "num_empty_cells", c.num_empty_cells);
    read_if(j, "max_turns", c.max_turns);
    read_if(j, "reverse_steps", c.reverse_steps);
    if (auto it = j.find("rewards"); it != j.end()) c.rewards = reward_scheme_from_json(*it, c.rewards);
    return c;
}

json to_json(const Action& a) { return format_action(a); }

Action action_from_json(const json& j) {
    const auto text = j.get<std::string>();
    if (text.find(',') != std::string::npos) {
        SudokuMove m;
        if (std::sscanf(text.c_str(), "%d,%d,%d", &m.row, &m.col, &m.value) != 3)
            throw std::invalid_argument("bad action: " + text);
        return m;
    }
    for (Direction d : kDirections)
        if (to_string(d) == text) return d;
    throw std::invalid_argument("bad action: " + text);
}

json to_json(const EpisodeState& s) {
    json j = {{"config", to_json(s.config)}, {"rng", s.rng.serialize()}, {"turn", s.turn},
              {"terminal", s.terminal},      {"success", s.success},      {"render", render_symbols(s)}};
    std::visit(
        [&](const auto& b) {
            using B = std::decay_t<decltype(b)>;
            json p;
            if constexpr (std::is_same_v<B, SokobanBoard>) {
                std::vector<Pos> walls;
                for (int r = 0; r < b.size; ++r)
                    for (int c = 0; c < b.size; ++c)
                        if (b.is_wall({r, c})) walls.push_back({r, c});
                p = {{"size", b.size}, {"walls", positions(walls)}, {"player", pos_json(b.player)},
                     {"boxes", positions(b.boxes)}, {"targets", positions(b.targets)}};
            } else if constexpr (std::is_same_v<B, FrozenLakeBoard>) {
                p = {{"size", b.size}, {"holes", positions(b.holes)}, {"goal", pos_json(b.goal)},
                     {"player", pos_json(b.player)}};
            } else {
                p = {{"cells", b.cells}, {"solution", b.solution}};
            }
            j["payload"] = std::move(p);
        },
        s.payload);
    return j;
}

EpisodeState episode_state_from_json(const json& j) {
    EpisodeState s;
    s.config = env_config_from_json(j.at("config"));
    s.rng = Rng::deserialize(j.at("rng").get<std::string>());
    s.turn = j.at("turn").get<int>();
    s.terminal = j.at("terminal").get<bool>();
    s.success = j.at("success").get<bool>();
    const auto& p = j.at("payload");
    switch (s.config.kind) {
        case EnvKind::Sokoban: {
            SokobanBoard b;
            b.size = p.at("size").get<int>();
            b.walls.assign(static_cast<std::size_t>(b.size * b.size), 0);
            for (Pos w : positions_from(p.at("walls"))) b.walls[static_cast<std::size_t>(w.row * b.size + w.col)] = 1;
            b.player = pos_from(p.at("player"));
            b.boxes = positions_from(p.at("boxes"));
            b.targets = positions_from(p.at("targets"));
            s.payload = std::move(b);
            break;
        }
        case EnvKind::FrozenLake: {
            FrozenLakeBoard b;
            b.size = p.at("size").get<int>();
            b.holes = positions_from(p.at("holes"));
            b.goal = pos_from(p.at("goal"));
            b.player = pos_from(p.at("player"));
            s.payload = std::move(b);
            break;
        }
        case EnvKind::Sudoku: {
            SudokuBoard b;
            b.cells = p.at("cells").get<std::array<int, 16>>();
            b.solution = p.at("solution").get<std::array<int, 16>>();
            s.payload = b;
            break;
        }
    }
    return s;
}

json to_json(const StepResult& r) {
    json resolved = json::array();
    for (const auto& a : r.resolved) resolved.push_back(to_json(a));
    return {{"next_state", to_json(r.next_state)},
            {"reward", r.reward},
            {"done", r.done},
            {"actions_executed", r.actions_executed},
            {"actions_effective", r.actions_effective},
            {"resolved", resolved}};
}

StepResult step_result_from_json(const json& j) {
    StepResult r{episode_state_from_json(j.at("next_state")), j.at("reward").get<double>(), j.at("done").get<bool>(),
                 j.at("actions_executed").get<int>(), j.at("actions_effective").get<int>(), {}};
    for (const auto& a : j.at("resolved")) r.resolved.push_back(action_from_json(a));
    return r;
}

json to_json(const PolicySpec& p) {
    return std::visit(
        [](const auto& s) -> json {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, RandomPolicySpec>) {
                return {{"type", "random"}, {"seed", s.seed}};
            } else if constexpr (std::is_same_v<S, OraclePolicySpec>) {
                return {{"type", "oracle"},
                        {"node_budget", s.solve.node_budget},
                        {"horizon", s.solve.horizon},
                        {"actions_per_turn", s.actions_per_turn}};
            } else if constexpr (std::is_same_v<S, RemoteLmSpec>) {
                return {{"type", "remote_lm"},          {"base_url", s.base_url},
                        {"model", s.model},             {"temperature", s.temperature},
                        {"top_p", s.top_p},             {"max_new_tokens", s.max_new_tokens},
                        {"timeout_seconds", s.timeout_seconds}, {"max_retries", s.max_retries},
                        {"backoff_seconds", s.backoff_seconds}, {"max_in_flight", s.max_in_flight},
                        {"api_key_env", s.api_key_env}};
            } else {
                return {{"type", "planner"}, {"horizon", s.plan.horizon}, {"node_budget", s.plan.node_budget}};
            }
        },
        p);
}

PolicySpec policy_spec_from_json(const json& j) {
    const auto type = j.value("type", std::string("random"));
    if (type == "random") {
        RandomPolicySpec s;
        read_if(j, "seed", s.seed);
        return s;
    }
    if (type == "oracle") {
        OraclePolicySpec s;
        read_if(j, "node_budget", s.solve.node_budget);
        read_if(j, "horizon", s.solve.horizon);
        read_if(j, "actions_per_turn", s.actions_per_turn);
        return s;
    }
    if (type == "remote_lm") {
        RemoteLmSpec s;
        read_if(j, "base_url", s.base_url);
        read_if(j, "model", s.model);
        read_if(j, "temperature", s.temperature);
        read_if(j, "top_p", s.top_p);
        read_if(j, "max_new_tokens", s.max_new_tokens);
        read_if(j, "timeout_seconds", s.timeout_seconds);
        read_if(j, "max_retries", s.max_retries);
        read_if(j, "backoff_seconds", s.backoff_seconds);
        read_if(j, "max_in_flight", s.max_in_flight);
        read_if(j, "api_key_env", s.api_key_env);
        return s;
    }
    if (type == "planner") {
        PlannerPolicySpec s;
        read_if(j, "horizon", s.plan.horizon);
        read_if(j, "node_budget", s.plan.node_budget);
        return s;
    }
    throw InvalidConfig("unknown policy type: " + type);
}

json to_json(const FormatVerdict& v) {
    json rules = json::array();
    for (auto r : v.violations) rules.push_back(to_string(r));
    return {{"valid", v.valid}, {"violations", rules}};
}

FormatVerdict format_verdict_from_json(const json& j) {
    static const std::vector<FormatRule> all = {
        FormatRule::MissingThink,       FormatRule::MissingAnswer,    FormatRule::TagOrder,
        FormatRule::EmptyAnswer,        FormatRule::UnparseableAction, FormatRule::TrailingJunk,
        FormatRule::DuplicateTag,       FormatRule::MissingObservation, FormatRule::MissingPrediction,
        FormatRule::EmptyObservation,   FormatRule::EmptyPrediction};
    FormatVerdict v;
    for (const auto& name : j.at("violations")) {
        for (auto r : all)
            if (to_string(r) == name.get<std::string>()) v.add(r);
    }
    v.valid = j.at("valid").get<bool>();
    return v;
}

json to_json(const Trajectory& t) {
    json turns = json::array();
    for (const auto& turn : t.turns) {
        json tj = {{"state_before", to_json(turn.state_before)},
                   {"state_text", {{"raw", turn.state_text.raw}, {"abstraction", turn.state_text.abstraction}}},
                   {"raw_output", turn.raw_output},
                   {"parsed", turn.parsed.has_value()},
                   {"verdict", to_json(turn.verdict)},
                   {"reward", turn.reward},
                   {"rewritten", turn.rewritten}};
        if (turn.step) tj["step"] = to_json(*turn.step);
        if (turn.belief_observation) tj["belief_observation"] = *turn.belief_observation;
        if (turn.belief_prediction) tj["belief_prediction"] = *turn.belief_prediction;
        if (turn.prompt_tokens) tj["prompt_tokens"] = *turn.prompt_tokens;
        if (turn.completion_tokens) tj["completion_tokens"] = *turn.completion_tokens;
        turns.push_back(std::move(tj));
    }
    return {{"config", to_json(t.config)},
            {"seed", t.seed},
            {"policy", t.policy},
            {"template_mode", to_string(t.template_mode)},
            {"turns", std::move(turns)},
            {"final_success", t.final_success},
            {"truncated", t.truncated},
            {"truncation_cause", t.truncation_cause},
            {"rewritten", t.rewritten}};
}

Trajectory trajectory_from_json(const json& j) {
    Trajectory t;
    t.config = env_config_from_json(j.at("config"));
    t.seed = j.at("seed").get<std::uint64_t>();
    t.policy = j.at("policy").get<std::string>();
    t.template_mode = prompt_mode_from_string(j.at("template_mode").get<std::string>());
    t.final_success = j.at("final_success").get<bool>();
    t.truncated = j.at("truncated").get<bool>();
    t.truncation_cause = j.at("truncation_cause").get<std::string>();
    t.rewritten = j.value("rewritten", false);
    for (const auto& tj : j.at("turns")) {
        TurnRecord turn;
        turn.state_before = episode_state_from_json(tj.at("state_before"));
        turn.state_text.raw = tj.at("state_text").at("raw").get<std::string>();
        turn.state_text.abstraction = tj.at("state_text").at("abstraction").get<std::string>();
        turn.state_text.composed = turn.state_text.raw + "\n" + turn.state_text.abstraction;
        turn.raw_output = tj.at("raw_output").get<std::string>();
        if (tj.at("parsed").get<bool>()) turn.parsed = parse_agent_output(turn.raw_output, t.config.kind);
        turn.verdict = format_verdict_from_json(tj.at("verdict"));
        turn.reward = tj.at("reward").get<double>();
        if (auto it = tj.find("step"); it != tj.end()) turn.step = step_result_from_json(*it);
        turn.rewritten = tj.value("rewritten", false);
        if (auto it = tj.find("belief_observation"); it != tj.end()) turn.belief_observation = it->get<std::string>();
        if (auto it = tj.find("belief_prediction"); it != tj.end()) turn.belief_prediction = it->get<std::string>();
        if (auto it = tj.find("prompt_tokens"); it != tj.end()) turn.prompt_tokens = it->get<int>();
        if (auto it = tj.find("completion_tokens"); it != tj.end()) turn.completion_tokens = it->get<int>();
        t.turns.push_back(std::move(turn));
    }
    return t;
}

json to_json(const SftRecord& r) {
    json spans = json::array();
    for (const auto& s : r.mask_spans) spans.push_back(json::array({byte_to_char(r.completion, s.begin), byte_to_char(r.completion, s.end)}));
    return {{"prompt", r.prompt},
            {"completion", r.completion},
            {"mask_spans", spans},
            {"mode", to_string(r.mode)},
            {"meta",
             {{"env", to_string(r.meta.env)},
              {"seed", r.meta.seed},
              {"turn", r.meta.turn},
              {"policy", r.meta.policy},
              {"reward_scheme", to_json(r.meta.reward_scheme)},
              {"template_mode", to_string(r.meta.template_mode)}}}};
}

SftRecord sft_record_from_json(const json& j) {
    SftRecord r;
    r.prompt = j.at("prompt").get<std::string>();
    r.completion = j.at("completion").get<std::string>();
    for (const auto& s : j.at("mask_spans")) r.mask_spans.push_back(
            {char_to_byte(r.completion, s.at(0).get<std::size_t>()), char_to_byte(r.completion, s.at(1).get<std::size_t>())});
    r.mode = mask_mode_from_string(j.at("mode").get<std::string>());
    const auto& m = j.at("meta");
    r.meta.env = env_kind_from_string(m.at("env").get<std::string>());
    r.meta.seed = m.at("seed").get<std::uint64_t>();
    r.meta.turn = m.at("turn").get<int>();
    r.meta.policy = m.at("policy").get<std::string>();
    r.meta.reward_scheme = reward_scheme_from_json(m.at("reward_scheme"));
    if (auto it = m.find("template_mode"); it != m.end())
        r.meta.template_mode = prompt_mode_from_string(it->get<std::string>());
    return r;
}

}  // namespace gridwm
