#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "mortalworld/mdp.hpp"

using namespace mortalworld;

namespace {

// 2 states, 2 actions; state 1 terminal. Action 0 stays, action 1 kills.
FiniteMdp life_death() {
    std::vector<double> t{
        // s0
        1.0, 0.0,  // a0
        0.0, 1.0,  // a1
        // s1 (absorbing)
        0.0, 1.0,
        0.0, 1.0,
    };
    return FiniteMdp(2, 2, std::move(t), {1});
}

bool has_kind(const std::vector<Violation>& vs, Violation::Kind kind) {
    return std::any_of(vs.begin(), vs.end(),
                       [&](const Violation& v) { return v.kind == kind; });
}

}  // namespace

TEST_CASE("validate accepts a well-formed mdp") {
    CHECK(life_death().validate().empty());
}

TEST_CASE("validate flags a non-stochastic row") {
    std::vector<double> t{0.5, 0.4, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0};
    FiniteMdp mdp(2, 2, std::move(t), {1});
    CHECK(has_kind(mdp.validate(), Violation::Kind::non_stochastic_row));
}

TEST_CASE("validate flags negative entries") {
    std::vector<double> t{1.2, -0.2, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0};
    FiniteMdp mdp(2, 2, std::move(t), {1});
    CHECK(has_kind(mdp.validate(), Violation::Kind::negative_entry));
}

TEST_CASE("validate flags a non-absorbing terminal state") {
    std::vector<double> t{1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0};
    FiniteMdp mdp(2, 2, std::move(t), {1});
    CHECK(has_kind(mdp.validate(), Violation::Kind::non_absorbing_terminal));
}

TEST_CASE("terminal index out of range is rejected at construction") {
    std::vector<double> t{1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0};
    CHECK_THROWS_AS(FiniteMdp(2, 2, std::move(t), {5}), std::invalid_argument);
}

TEST_CASE("with_renormalized_rows repairs small drift") {
    std::vector<double> t{0.5 + 1e-7, 0.5, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0};
    auto mdp = FiniteMdp::with_renormalized_rows(2, 2, std::move(t), {1});
    CHECK(mdp.validate().empty());
}

TEST_CASE("step from a terminal state stays put") {
    auto mdp = life_death();
    CounterRng rng(1);
    for (int i = 0; i < 50; ++i) {
        CHECK(mdp.step(1, static_cast<ActionId>(i % 2), rng) == 1);
    }
}

TEST_CASE("step follows the row distribution") {
    auto mdp = life_death();
    CounterRng rng(1);
    for (int i = 0; i < 20; ++i) {
        CHECK(mdp.step(0, 0, rng) == 0);
        CHECK(mdp.step(0, 1, rng) == 1);
    }
}

TEST_CASE("successor support") {
    auto mdp = life_death();
    CHECK(mdp.successor_support(0, 0) == std::vector<StateId>{0});
    CHECK(mdp.successor_support(0, 1) == std::vector<StateId>{1});
}

TEST_CASE("reachable states on an open grid grow as a diamond") {
    auto mdp = mwtest::open_grid_mdp(5, 5);
    StateId center = mwtest::grid_state(2, 2, 5);
    CHECK(mdp.reachable_states(center, 0) == std::vector<StateId>{center});
    CHECK(mdp.reachable_states(center, 1).size() == 5);   // center + 4 neighbors
    CHECK(mdp.reachable_states(center, 2).size() == 13);  // L1 ball of radius 2
}

TEST_CASE("reachability is monotone in the horizon") {
    CounterRng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        auto mdp = mwtest::random_mdp(rng, 8, 3, true);
        for (StateId s = 0; s < mdp.num_states(); ++s) {
            std::size_t prev = 0;
            for (std::size_t h = 0; h <= 4; ++h) {
                auto r = mdp.reachable_states(s, h);
                CHECK(r.size() >= prev);
                prev = r.size();
            }
        }
    }
}

TEST_CASE("irreversibility on a 3-cycle") {
    // One action, 0 -> 1 -> 2 -> 0.
    std::vector<double> t{0, 1, 0, 0, 0, 1, 1, 0, 0};
    FiniteMdp mdp(3, 1, std::move(t), {});
    CHECK(mdp.irreversibility(0, 1) == 2);
    CHECK(mdp.irreversibility(0, 2) == 1);
    CHECK(mdp.irreversibility(0, 0) == 0);
}

TEST_CASE("irreversibility across a one-way edge is infinite") {
    std::vector<double> t{0, 1, 0, 1};  // 0 -> 1, 1 absorbing (non-terminal)
    FiniteMdp mdp(2, 1, std::move(t), {});
    CHECK(!mdp.irreversibility(0, 1).has_value());
}

TEST_CASE("json round trip preserves the model") {
    auto mdp = life_death();
    auto back = FiniteMdp::from_json(mdp.to_json());
    REQUIRE(back.num_states() == mdp.num_states());
    REQUIRE(back.num_actions() == mdp.num_actions());
    CHECK(back.terminal_set() == mdp.terminal_set());
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            auto r1 = mdp.row(s, a);
            auto r2 = back.row(s, a);
            for (StateId j = 0; j < mdp.num_states(); ++j) CHECK(r1[j] == r2[j]);
        }
    }
}

TEST_CASE("from_json rejects malformed documents") {
    CHECK_THROWS(FiniteMdp::from_json("{}"));
    CHECK_THROWS(FiniteMdp::from_json("not json"));
    // Wrong transition size.
    CHECK_THROWS(FiniteMdp::from_json(
        R"({"num_states":2,"num_actions":1,"terminal":[],"transition":[[[1.0]]]})"));
    // Non-stochastic row rejected when checking.
    CHECK_THROWS(FiniteMdp::from_json(
        R"({"num_states":1,"num_actions":1,"terminal":[],"transition":[[[0.5]]]})"));
    // ...but loadable unchecked for diagnostics.
    auto m = FiniteMdp::from_json(
        R"({"num_states":1,"num_actions":1,"terminal":[],"transition":[[[0.5]]]})",
        false);
    CHECK(!m.validate().empty());
}

TEST_CASE("random mdps round trip through json") {
    CounterRng rng(31337);
    for (int trial = 0; trial < 10; ++trial) {
        auto mdp = mwtest::random_mdp(rng, 8, 3, true);
        auto back = FiniteMdp::from_json(mdp.to_json());
        CHECK(back.num_states() == mdp.num_states());
        CHECK(back.terminal_set() == mdp.terminal_set());
    }
}
