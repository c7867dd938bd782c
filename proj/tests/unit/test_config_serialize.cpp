#include <doctest.h>

#include "gridwm/config.hpp"
#include "gridwm/errors.hpp"
#include "gridwm/serialize.hpp"

using namespace gridwm;

TEST_CASE("dotted overrides") {
    json c = json::object();
    apply_override(c, "dataset.target_count=5");
    apply_override(c, "env.kind=FrozenLake");
    apply_override(c, "env.slippery=false");
    apply_override(c, "eval.k=[1,2]");
    CHECK(c["dataset"]["target_count"] == 5);
    CHECK(c["env"]["kind"] == "FrozenLake");
    CHECK(c["env"]["slippery"] == false);
    CHECK(c["eval"]["k"] == json::array({1, 2}));
    CHECK_THROWS_AS(apply_override(c, "novalue"), InvalidConfig);
    CHECK_THROWS_AS(apply_override(c, "=3"), InvalidConfig);

    const auto spec = dataset_spec_from(c);
    CHECK(spec.target_count == 5);
    REQUIRE(spec.configs.size() == 1);
    CHECK(spec.configs[0].kind == EnvKind::FrozenLake);
    CHECK_FALSE(spec.configs[0].slippery);
    CHECK(spec.configs[0].grid_size == 4);

    apply_override(c, "dataset.mode=bogus");
    CHECK_THROWS_AS(dataset_spec_from(c), InvalidConfig);
}

TEST_CASE("config sections") {
    json c = json::parse(R"({"seed": 4, "envs": [{"kind": "Sokoban"}, {"kind": "Sudoku", "num_empty_cells": 3}],
                             "policy": {"type": "oracle"}, "eval": {"num_instances": 2, "rollouts": 4, "k": [1, 4]}})");
    const auto suite = eval_suite_from(c);
    CHECK(suite.instances.size() == 4);
    CHECK(suite.instances[0].seed == 4);
    CHECK(suite.instances[3].config.num_empty_cells == 3);
    CHECK(std::holds_alternative<OraclePolicySpec>(suite.policy));
    CHECK(suite.rollout_seed == 4);

    const auto lift = lift_options_from(json::parse(R"({"lift": {"num_instances": 3, "rollouts": 4, "k": 2}})"));
    CHECK(lift.num_instances == 3);
    CHECK(lift.k == 2);
    CHECK_THROWS_AS(lift_options_from(json::parse(R"({"lift": {"rollouts": 4, "k": 8}})")), InvalidConfig);
    CHECK_THROWS_AS(env_configs_from(json::parse(R"({"env": {"kind": "Sokoban", "grid_size": 2}})")), InvalidConfig);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), InvalidConfig);
    CHECK(load_config("").empty());
}

TEST_CASE("JSON round trips") {
    for (EnvKind kind : {EnvKind::Sokoban, EnvKind::FrozenLake, EnvKind::Sudoku}) {
        auto config = EnvConfig::defaults(kind);
        config.rewards.success_bonus = 3.5;
        CHECK(env_config_from_json(to_json(config)) == config);
        auto s = generate(config, 9);
        s.rng.next();
        CHECK(episode_state_from_json(to_json(s)) == s);
    }
    for (const PolicySpec& p : {PolicySpec{RandomPolicySpec{3}}, PolicySpec{OraclePolicySpec{{5, 6}, 2}}}) {
        CHECK(to_json(policy_spec_from_json(to_json(p))) == to_json(p));
    }
    RemoteLmSpec lm;
    lm.model = "m";
    lm.temperature = 0.5;
    CHECK(to_json(policy_spec_from_json(to_json(PolicySpec{lm}))) == to_json(PolicySpec{lm}));
    CHECK(action_from_json(to_json(Action{SudokuMove{2, 3, 4}})) == Action{SudokuMove{2, 3, 4}});
    CHECK(action_from_json(to_json(Action{Direction::Left})) == Action{Direction::Left});

    FormatVerdict v;
    v.add(FormatRule::EmptyPrediction);
    const auto back = format_verdict_from_json(to_json(v));
    CHECK_FALSE(back.valid);
    CHECK(back.violations == v.violations);
}
