#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "gridwm/errors.hpp"
#include "gridwm/evaluation.hpp"
#include "gridwm/lift.hpp"
#include "oracles.hpp"

using namespace gridwm;

TEST_CASE("pass@k closed form") {
    CHECK(pass_at_k(8, 1, 4) == doctest::Approx(0.5));
    CHECK(pass_at_k(8, 0, 8) == 0.0);
    CHECK(pass_at_k(8, 8, 1) == 1.0);
    CHECK(pass_at_k(10, 3, 1) == doctest::Approx(0.3));
    CHECK(pass_at_k(5, 2, 4) == 1.0);  // n - c < k
    CHECK_THROWS_AS(pass_at_k(0, 0, 1), DomainError);
    CHECK_THROWS_AS(pass_at_k(5, 6, 1), DomainError);
    CHECK_THROWS_AS(pass_at_k(5, -1, 1), DomainError);
    CHECK_THROWS_AS(pass_at_k(5, 1, 0), DomainError);
    CHECK_THROWS_AS(pass_at_k(5, 1, 6), DomainError);
}

TEST_CASE("pass@k equals subset enumeration") {
    for (int n = 1; n <= 12; ++n)
        for (int c = 0; c <= n; ++c)
            for (int k = 1; k <= n; ++k) {
                const auto [hit, all] = oracle::pass_at_k_enumerate(n, c, k);
                CHECK(std::abs(pass_at_k(n, c, k) - double(hit) / double(all)) < 1e-12);
            }
}

TEST_CASE("pass@k Monte Carlo and monotonicity") {
    std::mt19937_64 gen(11);
    for (auto [n, c, k] : {std::tuple{20, 3, 5}, std::tuple{64, 10, 8}, std::tuple{30, 1, 10}}) {
        std::vector<int> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        int hits = 0;
        const int trials = 100000;
        for (int t = 0; t < trials; ++t) {
            std::shuffle(idx.begin(), idx.end(), gen);
            bool hit = false;
            for (int j = 0; j < k; ++j) hit |= idx[static_cast<std::size_t>(j)] < c;
            hits += hit;
        }
        CHECK(std::abs(hits / double(trials) - pass_at_k(n, c, k)) < 0.01);
    }
    for (int n = 1; n <= 30; ++n)
        for (int c = 0; c <= n; ++c)
            for (int k = 1; k < n; ++k) {
                CHECK(pass_at_k(n, c, k) <= pass_at_k(n, c, k + 1) + 1e-15);
                if (c < n) CHECK(pass_at_k(n, c, k) <= pass_at_k(n, c + 1, k) + 1e-15);
            }
}

TEST_CASE("uniform perplexity is the vocabulary size") {
    const std::string soko = "######\n#_####\n#_P###\n#_X#_#\n#__O_#\n######";
    const std::string lake = "_O__\nO___\n\xE2\x88\x9A___\n____";
    const std::string sudoku = "| . . 1 4 | 1 4 . 3 | 4 2 . . | . 1 4 2";
    CHECK(perplexity(soko, UniformProvider{7}) == 7.0);
    CHECK(perplexity(lake, UniformProvider{6}) == 6.0);
    CHECK(perplexity(sudoku, UniformProvider{5}) == 5.0);
    CHECK(symbol_units(soko).size() == 36);
    CHECK(symbol_units(lake).size() == 16);
    CHECK(symbol_units(sudoku).size() == 16);
    for (int v = 2; v <= 64; ++v)
        for (int len : {1, 13, 999, 20000}) CHECK(perplexity(std::string(static_cast<std::size_t>(len), '#'), UniformProvider{v}) == v);
    CHECK_THROWS_AS(perplexity("  \n|", UniformProvider{7}), EmptyInput);
    CHECK(ppl_unit_from_string("symbol") == PplUnit::Symbol);
    CHECK(to_string(PplUnit::ProviderToken) == "provider_token");
}

TEST_CASE("action statistics") {
    // Hand-built: two episodes, 4 executed actions, 3 effective.
    Trajectory a, b;
    TurnRecord t1;
    t1.raw_output = "ab\xE2\x88\x9A";  // 3 code points
    t1.step = StepResult{};
    t1.step->actions_executed = 3;
    t1.step->actions_effective = 2;
    TurnRecord t2;
    t2.raw_output = "abcde";
    t2.step = StepResult{};
    t2.step->actions_executed = 1;
    t2.step->actions_effective = 1;
    t2.completion_tokens = 10;
    a.turns = {t1};
    b.turns = {t2};
    const std::vector<Trajectory> ts{a, b};
    const auto s = action_stats(ts);
    CHECK(s.episodes == 2);
    CHECK(s.effectiveness() == 0.75);
    CHECK(s.mean_actions_per_episode() == 2.0);
    CHECK(s.mean_response_chars() == 4.0);
    CHECK(*s.mean_response_tokens() == 10.0);
    CHECK_THROWS_AS(action_stats(std::span<const Trajectory>{}), EmptyInput);
    CHECK(ActionStats{}.effectiveness() == 0.0);
    CHECK_FALSE(ActionStats{}.mean_response_tokens());

    ActionStats left, right;
    left.add(a);
    right.add(b);
    left.merge(right);
    CHECK(left.effectiveness() == 0.75);
}

TEST_CASE("run_eval with oracle and random policies") {
    EvalSuite suite;
    for (std::uint64_t s = 0; s < 5; ++s) suite.instances.push_back({EnvConfig::defaults(EnvKind::Sokoban), s});
    suite.policy = OraclePolicySpec{};
    suite.rollouts_per_instance = 2;
    suite.k_values = {1, 2};
    const auto oracle = run_eval(suite);
    CHECK(oracle.pass_at_1 == 1.0);
    CHECK(oracle.pass_at.at(2) == 1.0);
    CHECK(oracle.instances.size() == 5);
    CHECK(oracle.failed.empty());

    suite.policy = RandomPolicySpec{};
    suite.rollouts_per_instance = 8;
    suite.k_values = {1, 8};
    suite.keep_trajectories = true;
    const auto r1 = run_eval(suite);
    suite.jobs = 3;
    const auto r2 = run_eval(suite);
    CHECK(report_json(r1) == report_json(r2));
    CHECK(r1.trajectories.size() == 40);
    CHECK(r1.pass_at.at(1) <= r1.pass_at.at(8));
    for (const auto& inst : r1.instances) CHECK(inst.pass_at.at(1) == doctest::Approx(inst.c / 8.0));
    CHECK(report_instances_csv(r1).rfind("instance,env,seed,n,c,", 0) == 0);
    CHECK(report_pass_at_k_csv(r1).rfind("k,pass_at_k\n", 0) == 0);

    suite.k_values = {9};
    CHECK_THROWS_AS(validate(suite), InvalidConfig);
    suite.k_values = {1};
    suite.instances.clear();
    CHECK_THROWS_AS(validate(suite), InvalidConfig);
}

TEST_CASE("slippery rollouts of one instance see different slips") {
    EvalSuite suite;
    suite.instances.push_back({EnvConfig::defaults(EnvKind::FrozenLake), 3});
    suite.policy = OraclePolicySpec{};
    suite.rollouts_per_instance = 16;
    suite.k_values = {1};
    suite.keep_trajectories = true;
    const auto r = run_eval(suite);
    std::set<std::string> paths;
    for (const auto& t : r.trajectories) {
        std::string key;
        for (const auto& turn : t.turns) key += render_symbols(turn.state_after()) + "|";
        paths.insert(key);
    }
    CHECK(paths.size() > 1);
}

TEST_CASE("lift suite instances are solvable within the horizon") {
    LiftOptions o;
    o.num_instances = 10;
    const auto inst = lift_suite_instances(o);
    REQUIRE(inst.size() == 10);
    for (const auto& i : inst) {
        const auto s = generate(o.config, i.seed);
        CHECK(*oracle::soko_shortest(render_symbols(s)) == i.optimal_length);
        CHECK(i.optimal_length >= 1);
        CHECK(i.optimal_length <= o.horizon);
    }
    o.max_seed_scan = 3;
    CHECK_THROWS_AS(lift_suite_instances(o), SourceExhausted);
}
