#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "mortalworld/agents.hpp"

using namespace mortalworld;

namespace {

FiniteMdp life_death() {
    std::vector<double> t{1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0};
    return FiniteMdp(2, 2, std::move(t), {1});
}

}  // namespace

TEST_CASE("random action stays in range") {
    CounterRng rng(1);
    for (int i = 0; i < 1000; ++i) CHECK(act_random(3, rng) < 3);
    CHECK_THROWS_AS(act_random(0, rng), std::invalid_argument);
}

TEST_CASE("greedy empowerment prefers the liveliest successor") {
    // s0 branches to a dead end (s1) or a hub (s2 with two exits).
    std::vector<double> t{
        // s0
        0, 1, 0, 0,  // a0 -> dead end
        0, 0, 1, 0,  // a1 -> hub
        // s1: both actions stay
        0, 1, 0, 0,
        0, 1, 0, 0,
        // s2: two exits
        0, 0, 0, 1,
        0, 1, 0, 0,
        // s3: stays
        0, 0, 0, 1,
        0, 0, 0, 1,
    };
    FiniteMdp mdp(4, 2, std::move(t), {});
    auto map = empowerment_map(mdp, 1);
    CHECK(map[1].bits == 0.0);
    CHECK(map[2].bits == doctest::Approx(1.0).epsilon(1e-6));
    CounterRng rng(2);
    CHECK(act_greedy_empowerment(mdp, 0, 1, map, rng, TieMode::lowest_index) == 1);
}

TEST_CASE("homeostatic reward peaks at the setpoint") {
    CHECK(homeostatic_reward(0.7, 0.7) == 0.0);
    CHECK(homeostatic_reward(0.2, 0.7) == doctest::Approx(-0.5));
    CHECK(homeostatic_reward(1.0, 0.7) == doctest::Approx(-0.3));
    BodyState body;
    body.energy = 0.7;
    CHECK(homeostatic_reward(body, 0.7) == 0.0);
}

TEST_CASE("q_update converges to the fixed point of a constant reward") {
    auto mdp = life_death();
    Policy policy;
    policy.kind = PolicyKind::homeostatic_q;
    policy.params.alpha = 0.5;
    policy.params.gamma = 0.9;
    policy.bind(mdp);
    // Always take a0 from s0 (self-loop) with reward 1: Q -> 1/(1-gamma).
    for (int i = 0; i < 500; ++i) q_update(policy, mdp, 0, 0, 1.0, 0);
    CHECK(policy.q_at(0, 0) == doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("terminal next states bootstrap zero") {
    auto mdp = life_death();
    Policy policy;
    policy.kind = PolicyKind::homeostatic_q;
    policy.params.alpha = 1.0;
    policy.params.gamma = 0.9;
    policy.bind(mdp);
    policy.q[1 * 2 + 0] = 100.0;  // stale value that must be ignored
    q_update(policy, mdp, 0, 1, -1.0, 1);
    CHECK(policy.q_at(0, 1) == doctest::Approx(-1.0));
    Policy rando;
    CHECK_THROWS_AS(q_update(rando, mdp, 0, 0, 0.0, 0), std::invalid_argument);
}

TEST_CASE("valence is the signed health change") {
    AffectState affect;
    affect.last_health = 0.8;
    auto up = update_affect(affect, 0.9);
    CHECK(up.valence == doctest::Approx(0.1));
    CHECK(up.stress == 0.0);
    auto down = update_affect(affect, 0.5);
    CHECK(down.valence == doctest::Approx(-0.3));
    CHECK(down.stress == doctest::Approx(0.3));
    CHECK_THROWS_AS(update_affect(affect, 1.5), std::invalid_argument);
}

TEST_CASE("valence telescopes over a random health trace") {
    CounterRng rng(100);
    AffectState affect;
    affect.last_health = 0.5;
    double h = 0.5;
    double total_valence = 0.0;
    for (int t = 0; t < 1000; ++t) {
        double next = rng.next_double();
        affect = update_affect(affect, next);
        CHECK(affect.valence == next - h);  // exact per-step identity
        CHECK(affect.stress >= 0.0);
        total_valence += affect.valence;
        h = next;
    }
    CHECK(std::abs(total_valence - (h - 0.5)) < 1e-9);
}

TEST_CASE("stress decays geometrically under constant health") {
    AffectState affect;
    affect.lambda = 0.9;
    affect.last_health = 1.0;
    affect = update_affect(affect, 0.2);  // one shock: stress 0.8
    double s0 = affect.stress;
    CHECK(s0 == doctest::Approx(0.8));
    for (int t = 1; t <= 50; ++t) {
        affect = update_affect(affect, 0.2);
        CHECK(std::abs(affect.stress - s0 * std::pow(0.9, t)) < 1e-12);
    }
}

TEST_CASE("stress raises exploration up to the clamp") {
    QParams params;
    params.epsilon_base = 0.1;
    AffectState affect;
    affect.kappa = 0.5;
    affect.stress = 0.0;
    CHECK(stress_modulated_epsilon(params, affect) == doctest::Approx(0.1));
    affect.stress = 0.4;
    CHECK(stress_modulated_epsilon(params, affect) == doctest::Approx(0.3));
    affect.stress = 10.0;
    CHECK(stress_modulated_epsilon(params, affect) == 1.0);
}

TEST_CASE("act dispatches and enforces its preconditions") {
    auto mdp = life_death();
    CounterRng rng(4);
    AffectState affect;
    Policy greedy;
    greedy.kind = PolicyKind::greedy_empowerment;
    greedy.bind(mdp);
    CHECK_THROWS_AS(act(greedy, mdp, 0, nullptr, affect, rng),
                    std::invalid_argument);
    auto map = empowerment_map(mdp, 1);
    CHECK_NOTHROW(act(greedy, mdp, 0, &map, affect, rng));

    Policy q;
    q.kind = PolicyKind::homeostatic_q;
    q.params.epsilon_base = 0.0;
    q.bind(mdp);
    q.q[0 * 2 + 0] = 1.0;  // a0 clearly best at s0
    CHECK(act(q, mdp, 0, nullptr, affect, rng) == 0);
}
