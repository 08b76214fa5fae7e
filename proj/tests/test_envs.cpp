#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "mortalworld/empowerment.hpp"
#include "mortalworld/envs.hpp"

using namespace mortalworld;

TEST_CASE("grid moves follow compass actions and bump on walls") {
    GridWorld::Params p;
    p.width = 3;
    p.height = 3;
    GridWorld grid(p);
    StateId center = grid.state_of(Cell{1, 1});
    CHECK(grid.cell_of(grid.outcomes(center, 0)[0].next) == Cell{1, 0});  // N
    CHECK(grid.cell_of(grid.outcomes(center, 1)[0].next) == Cell{1, 2});  // S
    CHECK(grid.cell_of(grid.outcomes(center, 2)[0].next) == Cell{2, 1});  // E
    CHECK(grid.cell_of(grid.outcomes(center, 3)[0].next) == Cell{0, 1});  // W

    StateId corner = grid.state_of(Cell{0, 0});
    CHECK(grid.cell_of(grid.outcomes(corner, 0)[0].next) == Cell{0, 0});
    CHECK(grid.cell_of(grid.outcomes(corner, 3)[0].next) == Cell{0, 0});
}

TEST_CASE("walls carve states out of the grid") {
    GridWorld::Params p;
    p.width = 3;
    p.height = 3;
    p.walls = {Cell{1, 1}};
    GridWorld grid(p);
    CHECK(grid.num_states() == 8);
    StateId left = grid.state_of(Cell{0, 1});
    CHECK(grid.cell_of(grid.outcomes(left, 2)[0].next) == Cell{0, 1});  // E blocked
}

TEST_CASE("food is eaten on arrival and respawns after the period") {
    GridWorld::Params p;
    p.width = 3;
    p.height = 1;
    p.food_cells = {Cell{1, 0}};
    p.food_energy = 0.5;
    p.food_respawn_period = 2;
    GridWorld grid(p);
    CHECK(grid.timer_states() == 3);

    StateId start = grid.state_of(Cell{0, 0});
    auto o1 = grid.outcomes(start, 2);  // E onto food, timer 0: eat
    REQUIRE(o1.size() == 1);
    CHECK(o1[0].energy_delta == doctest::Approx(0.5));
    // Staying on the cell right away finds nothing: timer just reset.
    auto o2 = grid.noop_outcomes(o1[0].next);
    CHECK(o2[0].energy_delta == 0.0);
    // One more tick and the food is back.
    auto o3 = grid.noop_outcomes(o2[0].next);
    CHECK(o3[0].energy_delta == doctest::Approx(0.5));
}

TEST_CASE("blocked_noop refunds the move cost on bumps") {
    GridWorld::Params p;
    p.width = 2;
    p.height = 1;
    p.move_cost = 0.1;
    p.bump_semantics = BumpSemantics::blocked_noop;
    GridWorld grid(p);
    StateId s = grid.state_of(Cell{0, 0});
    auto blocked = grid.outcomes(s, 3);  // W into the wall
    CHECK(blocked[0].energy_delta == doctest::Approx(0.1));
    auto moved = grid.outcomes(s, 2);  // E, a real move
    CHECK(moved[0].energy_delta == 0.0);
}

TEST_CASE("grid_forage rejects bad parameters") {
    GridForageConfig gc;
    gc.food_cells = {Cell{0, 0}};
    gc.walls = {Cell{0, 0}};
    CHECK_THROWS_AS(build_grid_forage(gc), std::invalid_argument);
    GridForageConfig neg;
    neg.leak = -0.1;
    CHECK_THROWS_AS(build_grid_forage(neg), std::invalid_argument);
}

TEST_CASE("grid start state defaults to the center") {
    GridForageConfig gc;
    gc.width = 5;
    gc.height = 5;
    auto env = build_grid_forage(gc);
    auto grid = std::dynamic_pointer_cast<const GridWorld>(env.world);
    CHECK(grid->cell_of(grid_start_state(env, std::nullopt)) == Cell{2, 2});
    CHECK(grid->cell_of(grid_start_state(env, Cell{4, 0})) == Cell{4, 0});
}

TEST_CASE("jar chain crossing the one-way edge is irreversible") {
    JarChainConfig jc;  // length 7, edge at 3
    auto mdp = build_jar_chain(jc);
    CHECK(mdp.num_states() == 7);
    CHECK(mdp.num_actions() == 2);
    CHECK(mdp.validate().empty());
    // Before the edge everything is revertible in one step.
    CHECK(mdp.irreversibility(2, 3) == 1);
    // Across the edge there is no way back.
    CHECK(!mdp.irreversibility(3, 4).has_value());
    CHECK(!mdp.irreversibility(0, 5).has_value());
}

TEST_CASE("jar chain endpoints behave") {
    JarChainConfig jc;
    auto mdp = build_jar_chain(jc);
    CounterRng rng(3);
    CHECK(mdp.step(0, 1, rng) == 0);  // backward from the start stays
    CHECK(mdp.step(6, 0, rng) == 6);  // forward at the end stays
    CHECK(mdp.step(4, 1, rng) == 4);  // backward across the edge fails
}

TEST_CASE("terminal jar chain loses empowerment at the end") {
    JarChainConfig jc;
    jc.last_state_terminal = true;
    auto mdp = build_jar_chain(jc);
    CHECK(mdp.is_terminal(6));
    CHECK(empowerment(mdp, 6, 2).bits == 0.0);
    CHECK(empowerment(mdp, 2, 1).bits > 0.9);
}

TEST_CASE("empowerment drops after crossing the irreversible edge") {
    JarChainConfig jc;
    jc.chain_length = 7;
    jc.irreversible_edge = 3;
    auto mdp = build_jar_chain(jc);
    // From state 3 the 3-step future still includes both sides of the jar;
    // from state 4 only the forward run remains.
    auto before = empowerment(mdp, 3, 3).bits;
    auto after = empowerment(mdp, 4, 3).bits;
    CHECK(before > after);
}

TEST_CASE("wear world repair cell heals damage") {
    WearWorldConfig wc;
    wc.width = 3;
    wc.height = 3;
    wc.damage_prob = 0.0;
    wc.repair_cell = Cell{0, 0};
    wc.repair_amount = 2;
    auto env = build_wear_world(wc);
    auto grid = std::dynamic_pointer_cast<const GridWorld>(env.world);
    StateId next_to_repair = grid->state_of(Cell{1, 0});
    auto onto = grid->outcomes(next_to_repair, 3);  // W onto the repair cell
    CHECK(onto[0].damage_delta == -2);
    auto away = grid->outcomes(next_to_repair, 2);
    CHECK(away[0].damage_delta == 0);
}

TEST_CASE("wear world with damage compiles with a damage dimension") {
    WearWorldConfig wc;
    wc.width = 2;
    wc.height = 2;
    wc.damage_prob = 0.3;
    wc.repair_cell = Cell{0, 0};
    auto env = build_wear_world(wc);
    env.config.damage_max = 2;
    auto model = compile_explicit(env, 3);
    CHECK(model.damage_levels == 3);
    CHECK(model.mdp.validate().empty());
}
