#include <doctest.h>

#include <map>

#include "fixtures.hpp"
#include "gridwm/env.hpp"
#include "gridwm/errors.hpp"
#include "gridwm/world_model.hpp"
#include "oracles.hpp"

using namespace gridwm;

namespace {

EnvConfig soko() { return EnvConfig::defaults(EnvKind::Sokoban); }

}  // namespace

TEST_CASE("random logs and fits are deterministic") {
    const auto a = random_log(soko(), 0, 20, 5000, 10, 3);
    const auto b = random_log(soko(), 0, 20, 5000, 10, 3);
    CHECK(a.size() == 5000);
    CHECK(a == b);
    CHECK(fit(a) == fit(b));
    CHECK(fit(a).export_text() == fit(b).export_text());
    CHECK(fit(a).is_deterministic());
    CHECK(random_log(soko(), 0, 20, 5000, 10, 4) != a);
}

TEST_CASE("predict on the Appendix state") {
    const auto start = parse_symbols(fixture::kSokobanStart, soko());
    const Action down = Direction::Down;
    const auto after = step(start, std::span<const Action>(&down, 1)).next_state;
    TransitionTable table;
    table.add(make_triple(start, down, after));
    const auto d = predict(table, state_key(start), down);
    REQUIRE(d);
    REQUIRE(d->size() == 1);
    CHECK((*d)[0].second == 1.0);
    CHECK(parse_symbols((*d)[0].first, soko()).sokoban().boxes == std::vector<Pos>{{4, 2}});
    // Unobserved pair.
    CHECK_FALSE(predict(table, state_key(start), Direction::Up));
    CHECK_FALSE(predict(table, "nowhere", Direction::Down));
    CHECK_FALSE(predict_argmax(table, "nowhere", "Down"));
}

TEST_CASE("distributions and argmax ties") {
    TransitionTable t;
    t.add("s", "a", "y", 3);
    t.add("s", "a", "x", 3);
    t.add("s", "a", "z", 2);
    CHECK(*predict_argmax(t, "s", "a") == "x");
    CHECK_FALSE(t.is_deterministic());
    const auto d = predict(t, "s", Direction::Up);
    CHECK_FALSE(d);
    t.add("s", "Up", "q", 1);
    t.add("s", "Up", "r", 3);
    const auto e = *predict(t, "s", Direction::Up);
    CHECK(e == Distribution{{"q", 0.25}, {"r", 0.75}});
    CHECK(t.pair_count() == 2);
    CHECK(t.total("s", "a") == 8);
}

TEST_CASE("held-out accuracy equals the covered fraction on deterministic logs") {
    const auto train = random_log(soko(), 0, 5, 3000, 10, 1);
    const auto heldout = random_log(soko(), 0, 5, 2000, 10, 2);
    const auto table = fit(train);
    std::size_t covered = 0;
    for (const auto& t : heldout) covered += table.successors(t.state, t.action) != nullptr;
    CHECK(eval_accuracy(table, heldout) == doctest::Approx(covered / double(heldout.size())).epsilon(1e-12));
    CHECK(eval_accuracy(fit(heldout), heldout) == 1.0);
    CHECK_THROWS_AS(eval_accuracy(table, std::span<const Triple>{}), EmptyHeldout);
}

TEST_CASE("planner is sound against the true dynamics and minimal on full coverage") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto start = generate(soko(), seed);
        const auto text = render_symbols(start);
        const auto optimal = oracle::soko_shortest(text);
        REQUIRE(optimal);
        if (*optimal > 6) continue;
        const auto table = fit(explore_restarts(start, 6, seed, 500));
        // Coverage is complete within the horizon.
        const auto reachable = oracle::soko_reachable_pairs(text, 6);
        for (const auto& [state, move] : reachable) REQUIRE(table.successors(state, oracle::kMoveNames[move]) != nullptr);

        const auto p = plan(table, state_key(start), success_predicate(soko()), PlanOptions{6});
        REQUIRE(p);
        CHECK(static_cast<int>(p->actions.size()) == *optimal);
        oracle::Soko sim = oracle::parse_soko(text);
        for (const auto& a : p->actions) {
            const auto it = std::find(oracle::kMoveNames.begin(), oracle::kMoveNames.end(), a);
            sim.move(static_cast<int>(it - oracle::kMoveNames.begin()));
        }
        CHECK(sim.solved());
        CHECK(sim.render() == p->predicted_end);
    }
}

TEST_CASE("missing transitions mean no plan") {
    const auto start = parse_symbols(fixture::kSokobanStart, soko());
    const auto full = fit(explore_random(start, 4, 1, 300));
    CHECK(plan(full, state_key(start), success_predicate(soko()), PlanOptions{4}));
    CHECK_FALSE(plan(full, state_key(start), success_predicate(soko()), PlanOptions{3}));

    // Drop the final push; the corridor to the target is gone.
    TransitionTable cut;
    for (const auto& [state, by_action] : full.entries())
        for (const auto& [action, succ] : by_action)
            for (const auto& [next, count] : succ)
                if (!success_predicate(soko())(next)) cut.add(state, action, next, count);
    CHECK_FALSE(plan(cut, state_key(start), success_predicate(soko()), PlanOptions{10}));
    CHECK_FALSE(plan(TransitionTable{}, state_key(start), success_predicate(soko())));
    CHECK_THROWS_AS(plan(full, state_key(start), success_predicate(soko()), PlanOptions{4, 1}), BudgetExceeded);
}

TEST_CASE("export / import and merge") {
    const auto a = fit(random_log(soko(), 0, 3, 500, 8, 1));
    const auto b = fit(random_log(soko(), 3, 3, 500, 8, 2));
    CHECK(TransitionTable::import_text(a.export_text()) == a);
    TransitionTable ab = a, ba = b;
    ab.merge(b);
    ba.merge(a);
    CHECK(ab == ba);
    CHECK(ab.pair_count() >= a.pair_count());

    TransitionTable odd;
    odd.add("a\tb\\c\nd", "x", "y", 7);
    CHECK(TransitionTable::import_text(odd.export_text()) == odd);
    CHECK_THROWS(TransitionTable::import_text("a\tb\n"));
    CHECK_THROWS(TransitionTable::import_text("a\tb\tc\tnope\n"));
    CHECK(TransitionTable::import_text("# comment\n").empty());
}

TEST_CASE("slippery corner transition frequencies") {
    auto config = EnvConfig::defaults(EnvKind::FrozenLake);
    const auto start = parse_symbols("P___\n____\n____\n___G", config);
    TransitionTable table;
    const Action right = Direction::Right;
    for (int i = 0; i < 30000; ++i) {
        auto s = start;
        s.reseed(static_cast<std::uint64_t>(i) + 77);
        table.add(make_triple(s, right, step(s, std::span<const Action>(&right, 1)).next_state));
    }
    const auto d = *predict(table, state_key(start), right);
    // Right -> (0,1); Up slips stay at (0,0); Down slips to (1,0).
    std::map<Pos, double> by_pos;
    for (const auto& [key, p] : d) by_pos[parse_symbols(key, config).frozen_lake().player] += p;
    CHECK(by_pos.size() == 3);
    for (Pos pos : {Pos{0, 1}, Pos{0, 0}, Pos{1, 0}}) CHECK(std::abs(by_pos[pos] - 1.0 / 3) < 0.02);

    // A probabilistic plan from the corner still reaches the goal in the model.
    const auto table2 = fit(explore_random(start, 12, 5, 200));
    const auto p = plan(table2, state_key(start), success_predicate(config), PlanOptions{12});
    REQUIRE(p);
    CHECK(p->probability > 0.0);
    CHECK(p->probability <= 1.0);
}
