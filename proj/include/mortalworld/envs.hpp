#pragma once
// Environment catalog: GridForage (energy survival), JarChain
// (irreversibility), WearWorld (actuator damage and repair).

#include <memory>
#include <optional>
#include <set>
#include <string>

#include "mortalworld/embodiment.hpp"
#include "mortalworld/mdp.hpp"

namespace mortalworld {

struct Cell {
    int x = 0;
    int y = 0;
    auto operator<=>(const Cell&) const = default;
};

enum class BumpSemantics {
    stay,          // bumping a wall is a normal self-transition
    blocked_noop,  // blocked moves refund the move cost (only leak applies)
};

struct GridForageConfig {
    int width = 5;
    int height = 5;
    std::set<Cell> walls;
    std::set<Cell> food_cells;
    double food_energy = 1.0;
    int food_respawn_period = 1;
    double energy_max = 1.0;
    double leak = 0.05;
    double move_cost = 0.0;
    BumpSemantics bump_semantics = BumpSemantics::stay;
    std::optional<Cell> start;  // defaults to the grid center
};

struct JarChainConfig {
    int chain_length = 7;
    int irreversible_edge = 3;  // the one-way transition index
    bool last_state_terminal = false;
};

struct WearWorldConfig {
    int width = 5;
    int height = 5;
    double damage_prob = 0.1;
    Cell repair_cell;
    int repair_amount = 1;
    // Energy dynamics so wear has survival consequences: dropped moves
    // miss meals.
    std::optional<Cell> food_cell;
    double food_energy = 1.0;
    int food_respawn_period = 1;
    double energy_max = 1.0;
    double leak = 0.05;
    double move_cost = 0.0;
    std::optional<Cell> start;
};

// Shared 4-action (N, S, E, W) grid base world. Food timers are part of
// the world state so the world stays fully Markov.
class GridWorld : public BaseWorld {
public:
    struct Params {
        int width = 5;
        int height = 5;
        std::set<Cell> walls;
        std::set<Cell> food_cells;
        double food_energy = 0.0;
        int food_respawn_period = 1;
        double move_cost = 0.0;  // refunded on blocked_noop bumps
        BumpSemantics bump_semantics = BumpSemantics::stay;
        std::optional<Cell> repair_cell;
        int repair_amount = 0;
    };

    explicit GridWorld(Params params);

    std::size_t num_states() const override;
    std::size_t num_actions() const override { return 4; }
    bool is_terminal(StateId) const override { return false; }
    std::vector<WorldOutcome> outcomes(StateId s, ActionId a) const override;
    std::vector<WorldOutcome> noop_outcomes(StateId s) const override;
    Observation observe(StateId s, double energy_fraction) const override;
    std::string label(StateId s) const override;

    StateId state_of(Cell cell) const;  // all food timers zero
    Cell cell_of(StateId s) const;
    std::size_t num_cells() const { return cells_.size(); }
    std::size_t timer_states() const { return timer_states_; }
    int width() const { return params_.width; }
    int height() const { return params_.height; }

private:
    std::size_t cell_to_compact(Cell c) const;
    StateId encode(std::size_t cell, const std::vector<int>& timers) const;
    std::vector<int> timers_of(StateId s) const;

    Params params_;
    std::vector<Cell> cells_;                 // compact index -> cell
    std::vector<std::ptrdiff_t> cell_index_;  // (x + y*width) -> compact or -1
    std::vector<Cell> food_;
    std::size_t timer_states_ = 1;
};

EmbodiedEnv build_grid_forage(const GridForageConfig& config);
FiniteMdp build_jar_chain(const JarChainConfig& config);
EmbodiedEnv build_wear_world(const WearWorldConfig& config);

// Start state (world index) for a built grid environment.
StateId grid_start_state(const EmbodiedEnv& env, std::optional<Cell> start);

}  // namespace mortalworld
