#include "gridwm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gridwm/errors.hpp"
#include "gridwm/parallel.hpp"
#include "gridwm/serialize.hpp"
#include "text_util.hpp"

namespace gridwm {

double pass_at_k(int n, int c, int k) {
    if (n < 1 || c < 0 || c > n || k < 1 || k > n)
        throw DomainError("pass_at_k needs 0 <= c <= n and 1 <= k <= n (got n=" + std::to_string(n) +
                          ", c=" + std::to_string(c) + ", k=" + std::to_string(k) + ")");
    if (n - c < k) return 1.0;
    // C(n-c, k) / C(n, k) = prod_{i=n-c+1}^{n} (1 - k / i)
    double miss = 1.0;
    for (int i = n - c + 1; i <= n; ++i) miss *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
    return 1.0 - miss;
}

void validate(const EvalSuite& suite) {
    if (suite.instances.empty()) throw InvalidConfig("eval suite has no instances");
    if (suite.rollouts_per_instance < 1) throw InvalidConfig("rollouts_per_instance must be at least 1");
    if (suite.k_values.empty()) throw InvalidConfig("eval suite needs at least one k");
    if (!std::is_sorted(suite.k_values.begin(), suite.k_values.end()))
        throw InvalidConfig("k_values must be sorted");
    for (int k : suite.k_values)
        if (k < 1 || k > suite.rollouts_per_instance)
            throw InvalidConfig("k=" + std::to_string(k) + " outside [1, rollouts_per_instance]");
    for (const auto& inst : suite.instances) validate(inst.config);
}

void ActionStats::add(const Trajectory& t) {
    ++episodes;
    for (const auto& turn : t.turns) {
        ++turns;
        response_chars += detail::utf8_units(turn.raw_output).size();
        if (turn.completion_tokens) {
            completion_tokens += static_cast<std::uint64_t>(*turn.completion_tokens);
            ++turns_with_tokens;
        }
        if (turn.step) {
            actions_executed += static_cast<std::uint64_t>(turn.step->actions_executed);
            actions_effective += static_cast<std::uint64_t>(turn.step->actions_effective);
        }
    }
}

void ActionStats::merge(const ActionStats& o) {
    episodes += o.episodes;
    turns += o.turns;
    actions_executed += o.actions_executed;
    actions_effective += o.actions_effective;
    response_chars += o.response_chars;
    completion_tokens += o.completion_tokens;
    turns_with_tokens += o.turns_with_tokens;
}

double ActionStats::mean_actions_per_episode() const {
    return episodes ? static_cast<double>(actions_executed) / static_cast<double>(episodes) : 0.0;
}

double ActionStats::effectiveness() const {
    return actions_executed ? static_cast<double>(actions_effective) / static_cast<double>(actions_executed) : 0.0;
}

double ActionStats::mean_response_chars() const {
    return turns ? static_cast<double>(response_chars) / static_cast<double>(turns) : 0.0;
}

std::optional<double> ActionStats::mean_response_tokens() const {
    if (!turns_with_tokens) return std::nullopt;
    return static_cast<double>(completion_tokens) / static_cast<double>(turns_with_tokens);
}

ActionStats action_stats(std::span<const Trajectory> trajectories) {
    if (trajectories.empty()) throw EmptyInput("action_stats needs at least one trajectory");
    ActionStats s;
    for (const auto& t : trajectories) s.add(t);
    return s;
}

namespace {

struct RolloutOutcome {
    bool success = false;
    std::optional<std::string> failure;
    ActionStats stats;
    std::optional<Trajectory> trajectory;
};

bool is_failure_cause(const std::string& cause) {
    return cause == "endpoint_error" || cause == "timeout" || cause == "policy_error";
}

}  // namespace

EvalReport run_eval(const EvalSuite& suite, std::shared_ptr<LmClient> client) {
    validate(suite);
    if (!client) {
        if (const auto* lm = std::get_if<RemoteLmSpec>(&suite.policy)) client = std::make_shared<LmClient>(*lm);
    }
    const std::size_t n_inst = suite.instances.size();
    const auto n_roll = static_cast<std::size_t>(suite.rollouts_per_instance);
    std::vector<RolloutOutcome> outcomes(n_inst * n_roll);

    parallel_for(outcomes.size(), suite.jobs, [&](std::size_t idx) {
        const std::size_t i = idx / n_roll;
        const std::size_t r = idx % n_roll;
        const auto& inst = suite.instances[i];
        const std::uint64_t rollout_seed = mix_seed(mix_seed(suite.rollout_seed, i), r);
        const PromptTemplate tmpl = make_template(inst.config.kind, suite.template_mode, inst.config.grid_size);
        RolloutOutcome& out = outcomes[idx];
        try {
            Trajectory t = collect_trajectory(inst.config, inst.seed, suite.policy, tmpl,
                                              {rollout_seed, rollout_seed, client});
            out.success = t.final_success;
            if (is_failure_cause(t.truncation_cause)) out.failure = t.truncation_cause;
            out.stats.add(t);
            if (suite.keep_trajectories) out.trajectory = std::move(t);
        } catch (const std::exception& e) {
            out.failure = e.what();
        }
    });

    EvalReport report;
    report.policy = std::string(policy_name(suite.policy));
    for (int k : suite.k_values) report.pass_at[k] = 0.0;
    for (std::size_t i = 0; i < n_inst; ++i) {
        InstanceResult res{suite.instances[i], suite.rollouts_per_instance, 0, {}};
        for (std::size_t r = 0; r < n_roll; ++r) {
            auto& o = outcomes[i * n_roll + r];
            if (o.success && !o.failure) ++res.c;
            if (o.failure) report.failed.push_back({i, static_cast<int>(r), *o.failure});
            report.stats.merge(o.stats);
            if (o.trajectory) report.trajectories.push_back(std::move(*o.trajectory));
        }
        for (int k : suite.k_values) {
            res.pass_at[k] = pass_at_k(res.n, res.c, k);
            report.pass_at[k] += res.pass_at[k];
        }
        report.pass_at_1 += pass_at_k(res.n, res.c, 1);
        report.instances.push_back(std::move(res));
    }
    report.pass_at_1 /= static_cast<double>(n_inst);
    for (auto& [k, v] : report.pass_at) v /= static_cast<double>(n_inst);
    return report;
}

std::string report_json(const EvalReport& report) {
    json inst = json::array();
    for (std::size_t i = 0; i < report.instances.size(); ++i) {
        const auto& r = report.instances[i];
        json pk = json::object();
        for (const auto& [k, v] : r.pass_at) pk[std::to_string(k)] = v;
        inst.push_back({{"index", i},
                        {"config", to_json(r.instance.config)},
                        {"seed", r.instance.seed},
                        {"n", r.n},
                        {"c", r.c},
                        {"pass_at_k", pk}});
    }
    json pk = json::object();
    for (const auto& [k, v] : report.pass_at) pk[std::to_string(k)] = v;
    json failed = json::array();
    for (const auto& f : report.failed) failed.push_back({{"instance", f.instance}, {"rollout", f.rollout}, {"cause", f.cause}});
    json stats = {{"episodes", report.stats.episodes},
                  {"turns", report.stats.turns},
                  {"actions_executed", report.stats.actions_executed},
                  {"actions_effective", report.stats.actions_effective},
                  {"mean_actions_per_episode", report.stats.mean_actions_per_episode()},
                  {"action_effectiveness", report.stats.effectiveness()},
                  {"mean_response_chars", report.stats.mean_response_chars()}};
    if (auto t = report.stats.mean_response_tokens()) stats["mean_response_tokens"] = *t;
    json j = {{"policy", report.policy}, {"pass_at_1", report.pass_at_1}, {"pass_at_k", pk},
              {"stats", stats},          {"failed_rollouts", failed},      {"instances", inst}};
    return j.dump(2);
}

std::string report_instances_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "instance,env,seed,n,c";
    if (!report.instances.empty())
        for (const auto& [k, v] : report.instances.front().pass_at) out << ",pass@" << k;
    out << '\n';
    for (std::size_t i = 0; i < report.instances.size(); ++i) {
        const auto& r = report.instances[i];
        out << i << ',' << to_string(r.instance.config.kind) << ',' << r.instance.seed << ',' << r.n << ',' << r.c;
        for (const auto& [k, v] : r.pass_at) out << ',' << detail::format_double(v);
        out << '\n';
    }
    return out.str();
}

std::string report_pass_at_k_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "k,pass_at_k\n";
    for (const auto& [k, v] : report.pass_at) out << k << ',' << detail::format_double(v) << '\n';
    return out.str();
}

std::string_view to_string(PplUnit unit) { return unit == PplUnit::Symbol ? "symbol" : "provider_token"; }

PplUnit ppl_unit_from_string(std::string_view name) {
    if (name == "symbol") return PplUnit::Symbol;
    if (name == "provider_token" || name == "token") return PplUnit::ProviderToken;
    throw InvalidConfig("unknown perplexity unit: " + std::string(name));
}

std::vector<std::string> symbol_units(std::string_view text) {
    std::vector<std::string> out;
    for (auto u : detail::utf8_units(text)) {
        if (u.size() == 1 && (detail::is_space(u[0]) || u[0] == '|')) continue;
        out.emplace_back(u);
    }
    return out;
}

std::vector<LogProb> unit_logprobs(std::string_view text, const LogProbProvider& provider) {
    return std::visit(
        [&](const auto& p) -> std::vector<LogProb> {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, UniformProvider>) {
                if (p.vocab_size < 1) throw ProviderError("uniform provider needs a positive vocabulary size");
                return std::vector<LogProb>(symbol_units(text).size(), -std::log(static_cast<LogProb>(p.vocab_size)));
            } else {
                if (!p.client) throw ProviderError("remote provider has no client");
                std::vector<LogProb> out;
                for (double lp : p.client->token_logprobs(text)) out.push_back(lp);
                return out;
            }
        },
        provider);
}

double perplexity(std::string_view text, const LogProbProvider& provider, PplUnit unit) {
    if (symbol_units(text).empty()) throw EmptyInput("perplexity needs text with at least one symbol");
    const auto lps = unit_logprobs(text, provider);
    if (lps.empty()) throw ProviderError("provider returned no log probabilities");

    // Neumaier summation in extended precision.
    LogProb sum = 0, comp = 0;
    for (LogProb x : lps) {
        const LogProb t = sum + x;
        comp += std::fabs(sum) >= std::fabs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    sum += comp;

    std::size_t units = lps.size();
    if (unit == PplUnit::Symbol && std::holds_alternative<RemoteProvider>(provider)) units = symbol_units(text).size();
    return static_cast<double>(std::exp(-sum / static_cast<LogProb>(units)));
}

}  // namespace gridwm
