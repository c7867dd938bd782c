#include "gridwm/lift.hpp"

#include "gridwm/errors.hpp"
#include "gridwm/parallel.hpp"
#include "gridwm/serialize.hpp"
#include "gridwm/solver.hpp"

namespace gridwm {

namespace {

EnvConfig suite_config(const LiftOptions& o) {
    EnvConfig c = o.config;
    c.max_turns = o.horizon;
    validate(c);
    return c;
}

}  // namespace

std::vector<LiftInstance> lift_suite_instances(const LiftOptions& options) {
    if (options.horizon < 1) throw InvalidConfig("lift horizon must be at least 1");
    if (options.num_instances < 1) throw InvalidConfig("lift suite needs at least one instance");
    const EnvConfig config = suite_config(options);
    std::vector<LiftInstance> out;
    for (std::uint64_t s = options.seed_start; s < options.seed_start + options.max_seed_scan; ++s) {
        const auto plan = solve(generate(config, s));
        if (!plan || plan->empty() || static_cast<int>(plan->size()) > options.horizon) continue;
        out.push_back({s, static_cast<int>(plan->size()), 0});
        if (static_cast<int>(out.size()) == options.num_instances) return out;
    }
    throw SourceExhausted("only " + std::to_string(out.size()) + " instances solvable within the horizon");
}

LiftReport run_lift_suite(const LiftOptions& options) {
    const EnvConfig config = suite_config(options);
    LiftReport report;
    report.instances = lift_suite_instances(options);

    std::vector<TransitionTable> tables(report.instances.size());
    parallel_for(report.instances.size(), options.jobs, [&](std::size_t i) {
        auto& inst = report.instances[i];
        const auto triples = explore_restarts(generate(config, inst.seed), options.horizon,
                                            mix_seed(options.rollout_seed ^ 0x5eedULL, inst.seed),
                                            options.explore_patience);
        tables[i] = fit(triples);
        inst.explored_pairs = tables[i].pair_count();
    });
    auto merged = std::make_shared<TransitionTable>();
    for (const auto& t : tables) merged->merge(t);
    report.table = merged;

    EvalSuite suite;
    for (const auto& inst : report.instances) suite.instances.push_back({config, inst.seed});
    suite.rollout_seed = options.rollout_seed;
    suite.jobs = options.jobs;

    suite.policy = PlannerPolicySpec{report.table, PlanOptions{options.horizon}};
    suite.rollouts_per_instance = 1;
    suite.k_values = {1};
    report.planner = run_eval(suite);

    suite.policy = RandomPolicySpec{};
    suite.rollouts_per_instance = options.random_rollouts;
    suite.k_values = {1, options.k};
    if (options.k == 1) suite.k_values = {1};
    report.random = run_eval(suite);

    report.planner_pass_at_1 = report.planner.pass_at_1;
    report.random_pass_at_k = report.random.pass_at.at(options.k);
    report.lift = report.planner_pass_at_1 > report.random_pass_at_k;
    return report;
}

std::string lift_report_json(const LiftReport& report, const LiftOptions& options) {
    json inst = json::array();
    for (std::size_t i = 0; i < report.instances.size(); ++i) {
        const auto& li = report.instances[i];
        inst.push_back({{"seed", li.seed},
                        {"optimal_length", li.optimal_length},
                        {"explored_pairs", li.explored_pairs},
                        {"planner_success", report.planner.instances[i].c},
                        {"random_successes", report.random.instances[i].c}});
    }
    json j = {{"config", to_json(suite_config(options))},
              {"horizon", options.horizon},
              {"num_instances", report.instances.size()},
              {"random_rollouts", options.random_rollouts},
              {"k", options.k},
              {"planner_pass_at_1", report.planner_pass_at_1},
              {"random_pass_at_k", report.random_pass_at_k},
              {"random_pass_at_1", report.random.pass_at_1},
              {"lift", report.lift},
              {"table_pairs", report.table ? report.table->pair_count() : 0},
              {"planner_failed_rollouts", report.planner.failed.size()},
              {"instances", inst}};
    return j.dump(2);
}

}  // namespace gridwm
