#include "gridwm/policy.hpp"

#include "gridwm/errors.hpp"
#include "gridwm/protocol.hpp"
#include "gridwm/state_rep.hpp"

namespace gridwm {

namespace {

using Clock = std::chrono::steady_clock;

std::string observation_prediction_output(const StateText& now, const std::string& reasoning, const StateText& next,
                                          std::span<const Action> actions) {
    return "<think>\n<observation>\n" + now.composed + "\n</observation>\n" + reasoning + "\n<prediction>\n" +
           next.composed + "\n</prediction>\n</think>\n<answer>" + render_answer(actions) + "</answer>";
}

// Applies `actions` with slipping disabled, for the oracle's prediction.
EpisodeState simulate_intended(const EpisodeState& state, std::span<const Action> actions) {
    EpisodeState s = state;
    s.config.slippery = false;
    if (s.terminal || actions.empty()) return s;
    EpisodeState out = step(s, actions).next_state;
    out.config.slippery = state.config.slippery;
    return out;
}

}  // namespace

std::string_view policy_name(const PolicySpec& spec) {
    switch (spec.index()) {
        case 0: return "random";
        case 1: return "oracle";
        case 2: return "remote_lm";
        case 3: return "planner";
    }
    return "unknown";
}

RandomPolicy::RandomPolicy(const RandomPolicySpec& spec, std::uint64_t episode_seed)
    : rng_(mix_seed(spec.seed, episode_seed)) {}

PolicyOutput RandomPolicy::act(const EpisodeState& view) {
    const auto start = Clock::now();
    const auto actions = action_space(view);
    const Action& a = actions[rng_.below(actions.size())];
    PolicyOutput out;
    out.raw_text = "<think>" + std::string(kRandomReasoning) + "</think><answer>" + format_action(a) + "</answer>";
    out.latency = Clock::now() - start;
    return out;
}

PolicyOutput OraclePolicy::act(const EpisodeState& view) const {
    const auto start = Clock::now();
    std::optional<ActionList> plan;
    try {
        plan = solve(view, spec_.solve);
    } catch (const BudgetExceeded& e) {
        throw PolicyError(std::string("oracle: ") + e.what());
    }
    if (!plan || plan->empty()) throw PolicyError("oracle: no plan from the current state");

    int per_turn = spec_.actions_per_turn;
    if (per_turn <= 0) per_turn = view.kind() == EnvKind::FrozenLake && view.config.slippery ? 1 : static_cast<int>(plan->size());
    if (static_cast<int>(plan->size()) > per_turn) plan->resize(static_cast<std::size_t>(per_turn));

    const StateText now = compose_state(view);
    const StateText next = compose_state(simulate_intended(view, *plan));
    std::string reasoning = "Plan: " + render_answer(*plan) + ".";
    PolicyOutput out;
    out.raw_text = observation_prediction_output(now, reasoning, next, *plan);
    out.latency = Clock::now() - start;
    return out;
}

PlannerPolicy::PlannerPolicy(PlannerPolicySpec spec) : spec_(std::move(spec)) {
    if (!spec_.table) throw std::invalid_argument("planner policy needs a transition table");
}

PolicyOutput PlannerPolicy::act(const EpisodeState& view) const {
    const auto start = Clock::now();
    std::optional<ModelPlan> found;
    try {
        found = plan(*spec_.table, state_key(view), success_predicate(view.config), spec_.plan);
    } catch (const BudgetExceeded& e) {
        throw PolicyError(std::string("planner: ") + e.what());
    }
    if (!found || found->actions.empty()) throw PolicyError("planner: the model has no plan from this state");

    ActionList actions;
    for (const auto& name : found->actions) {
        auto a = parse_action(name, view.kind());
        if (!a) throw PolicyError("planner: table holds an unparseable action '" + name + "'");
        actions.push_back(*a);
    }
    const StateText now = compose_state(view);
    const StateText predicted = compose_state(parse_symbols(found->predicted_end, view.config));
    PolicyOutput out;
    out.raw_text = observation_prediction_output(now, "Model plan: " + render_answer(actions) + ".", predicted, actions);
    out.latency = Clock::now() - start;
    return out;
}

PolicyOutput RemoteLmPolicy::act(std::string_view prompt) const {
    const auto start = Clock::now();
    Completion c = client_->complete(prompt);
    PolicyOutput out;
    out.raw_text = std::move(c.text);
    out.prompt_tokens = c.prompt_tokens;
    out.completion_tokens = c.completion_tokens;
    out.latency = Clock::now() - start;
    return out;
}

Policy Policy::make(const PolicySpec& spec, std::uint64_t episode_seed, std::shared_ptr<LmClient> client) {
    return std::visit(
        [&](const auto& s) -> Policy {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, RandomPolicySpec>) return Policy(RandomPolicy(s, episode_seed));
            else if constexpr (std::is_same_v<S, OraclePolicySpec>) return Policy(OraclePolicy(s));
            else if constexpr (std::is_same_v<S, PlannerPolicySpec>) return Policy(PlannerPolicy(s));
            else return Policy(RemoteLmPolicy(client ? client : std::make_shared<LmClient>(s)));
        },
        spec);
}

PolicyOutput Policy::act(std::string_view prompt, const EpisodeState& view) {
    return std::visit(
        [&](auto& impl) -> PolicyOutput {
            using P = std::decay_t<decltype(impl)>;
            if constexpr (std::is_same_v<P, RemoteLmPolicy>) return impl.act(prompt);
            else return impl.act(view);
        },
        impl_);
}

std::string_view Policy::name() const {
    switch (impl_.index()) {
        case 0: return "random";
        case 1: return "oracle";
        case 2: return "remote_lm";
        case 3: return "planner";
    }
    return "unknown";
}

}  // namespace gridwm
