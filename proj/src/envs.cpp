#include "mortalworld/envs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fmt/format.h>
#include <stdexcept>

namespace mortalworld {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

}  // namespace

GridWorld::GridWorld(Params params) : params_(std::move(params)) {
    require(params_.width > 0 && params_.height > 0, "grid dims must be positive");
    cell_index_.assign(static_cast<std::size_t>(params_.width * params_.height), -1);
    for (int y = 0; y < params_.height; ++y) {
        for (int x = 0; x < params_.width; ++x) {
            Cell c{x, y};
            if (params_.walls.contains(c)) continue;
            cell_index_[static_cast<std::size_t>(x + y * params_.width)] =
                static_cast<std::ptrdiff_t>(cells_.size());
            cells_.push_back(c);
        }
    }
    require(!cells_.empty(), "grid has no free cells");
    for (const Cell& f : params_.food_cells) {
        require(!params_.walls.contains(f), "food_cells must not overlap walls");
        require(f.x >= 0 && f.x < params_.width && f.y >= 0 && f.y < params_.height,
                "food_cells must be in bounds");
        food_.push_back(f);
    }
    std::sort(food_.begin(), food_.end());
    timer_states_ = 1;
    for (std::size_t i = 0; i < food_.size(); ++i) {
        timer_states_ *= static_cast<std::size_t>(params_.food_respawn_period + 1);
    }
    if (params_.repair_cell) {
        const Cell& r = *params_.repair_cell;
        require(r.x >= 0 && r.x < params_.width && r.y >= 0 && r.y < params_.height,
                "repair_cell must be in bounds");
        require(!params_.walls.contains(r), "repair_cell must not be a wall");
    }
}

std::size_t GridWorld::num_states() const { return cells_.size() * timer_states_; }

std::size_t GridWorld::cell_to_compact(Cell c) const {
    auto idx = cell_index_[static_cast<std::size_t>(c.x + c.y * params_.width)];
    return static_cast<std::size_t>(idx);
}

StateId GridWorld::encode(std::size_t cell, const std::vector<int>& timers) const {
    std::size_t code = 0;
    for (int t : timers) {
        code = code * static_cast<std::size_t>(params_.food_respawn_period + 1) +
               static_cast<std::size_t>(t);
    }
    return cell * timer_states_ + code;
}

std::vector<int> GridWorld::timers_of(StateId s) const {
    std::size_t code = s % timer_states_;
    std::vector<int> timers(food_.size(), 0);
    for (std::size_t i = food_.size(); i-- > 0;) {
        timers[i] = static_cast<int>(
            code % static_cast<std::size_t>(params_.food_respawn_period + 1));
        code /= static_cast<std::size_t>(params_.food_respawn_period + 1);
    }
    return timers;
}

Cell GridWorld::cell_of(StateId s) const { return cells_[s / timer_states_]; }

StateId GridWorld::state_of(Cell cell) const {
    auto idx = cell_index_[static_cast<std::size_t>(cell.x + cell.y * params_.width)];
    require(idx >= 0, "cell is a wall");
    return static_cast<std::size_t>(idx) * timer_states_;
}

std::vector<WorldOutcome> GridWorld::outcomes(StateId s, ActionId a) const {
    static constexpr int dx[4] = {0, 0, 1, -1};
    static constexpr int dy[4] = {-1, 1, 0, 0};  // N, S, E, W
    if (a >= 4) throw std::out_of_range("grid action out of range");
    Cell cur = cell_of(s);
    Cell target{cur.x + dx[a], cur.y + dy[a]};
    bool blocked = target.x < 0 || target.x >= params_.width || target.y < 0 ||
                   target.y >= params_.height || params_.walls.contains(target);
    Cell landed = blocked ? cur : target;

    WorldOutcome o;
    if (blocked && params_.bump_semantics == BumpSemantics::blocked_noop) {
        o.energy_delta += params_.move_cost;  // refund, only the leak applies
    }

    auto timers = timers_of(s);
    for (int& t : timers) t = std::max(0, t - 1);
    for (std::size_t f = 0; f < food_.size(); ++f) {
        if (food_[f] == landed && timers[f] == 0 && params_.food_energy > 0.0) {
            o.energy_delta += params_.food_energy;
            timers[f] = params_.food_respawn_period;
        }
    }
    if (params_.repair_cell && landed == *params_.repair_cell) {
        o.damage_delta -= params_.repair_amount;
    }
    o.next = encode(cell_to_compact(landed), timers);
    return {o};
}

std::vector<WorldOutcome> GridWorld::noop_outcomes(StateId s) const {
    // Dropped action: the agent stays put but food timers still advance
    // and an available meal underfoot is still eaten.
    Cell cur = cell_of(s);
    WorldOutcome o;
    auto timers = timers_of(s);
    for (int& t : timers) t = std::max(0, t - 1);
    for (std::size_t f = 0; f < food_.size(); ++f) {
        if (food_[f] == cur && timers[f] == 0 && params_.food_energy > 0.0) {
            o.energy_delta += params_.food_energy;
            timers[f] = params_.food_respawn_period;
        }
    }
    if (params_.repair_cell && cur == *params_.repair_cell) {
        o.damage_delta -= params_.repair_amount;
    }
    o.next = encode(cell_to_compact(cur), timers);
    return {o};
}

Observation GridWorld::observe(StateId s, double energy_fraction) const {
    Observation obs;
    obs.features.assign(cells_.size() + 1, 0.0);
    obs.features[s / timer_states_] = 1.0;
    obs.features.back() = energy_fraction;
    obs.validity_mask.assign(cells_.size() + 1, true);
    return obs;
}

std::string GridWorld::label(StateId s) const {
    Cell c = cell_of(s);
    std::string out = fmt::format("x{}y{}", c.x, c.y);
    auto timers = timers_of(s);
    for (std::size_t f = 0; f < timers.size(); ++f) {
        out += fmt::format("|t{}", timers[f]);
    }
    return out;
}

EmbodiedEnv build_grid_forage(const GridForageConfig& config) {
    require(config.width > 0, "width must be positive");
    require(config.height > 0, "height must be positive");
    require(config.food_energy > 0.0, "food_energy must be positive");
    require(config.food_respawn_period >= 1, "food_respawn_period must be >= 1");
    require(config.energy_max > 0.0, "energy_max must be positive");
    require(config.leak >= 0.0, "leak must be nonnegative");
    require(config.move_cost >= 0.0, "move_cost must be nonnegative");
    for (const Cell& c : config.food_cells) {
        require(!config.walls.contains(c), "food_cells must not overlap walls");
    }

    GridWorld::Params p;
    p.width = config.width;
    p.height = config.height;
    p.walls = config.walls;
    p.food_cells = config.food_cells;
    p.food_energy = config.food_energy;
    p.food_respawn_period = config.food_respawn_period;
    p.move_cost = config.move_cost;
    p.bump_semantics = config.bump_semantics;

    EmbodiedEnv env;
    env.world = std::make_shared<GridWorld>(std::move(p));
    env.config.energy_max = config.energy_max;
    env.config.leak = config.leak;
    env.config.action_cost = config.move_cost;
    return env;
}

FiniteMdp build_jar_chain(const JarChainConfig& config) {
    require(config.chain_length >= 3, "chain_length must be >= 3");
    require(config.irreversible_edge >= 0 &&
                config.irreversible_edge < config.chain_length - 1,
            "irreversible_edge must be < chain_length - 1");
    const auto n = static_cast<std::size_t>(config.chain_length);
    constexpr std::size_t kActions = 2;  // 0 = forward, 1 = backward
    std::vector<double> transition(n * kActions * n, 0.0);
    std::set<StateId> terminal;
    if (config.last_state_terminal) terminal.insert(n - 1);

    auto at = [&](std::size_t s, std::size_t a) -> double* {
        return &transition[(s * kActions + a) * n];
    };
    for (std::size_t s = 0; s < n; ++s) {
        if (terminal.contains(s)) {
            at(s, 0)[s] = 1.0;
            at(s, 1)[s] = 1.0;
            continue;
        }
        at(s, 0)[s + 1 < n ? s + 1 : s] = 1.0;
        // Backward fails at the start and across the one-way edge.
        bool can_back = s > 0 &&
                        s != static_cast<std::size_t>(config.irreversible_edge) + 1;
        at(s, 1)[can_back ? s - 1 : s] = 1.0;
    }

    std::vector<std::string> labels;
    for (std::size_t s = 0; s < n; ++s) labels.push_back(fmt::format("jar{}", s));
    return FiniteMdp(n, kActions, std::move(transition), std::move(terminal),
                     std::move(labels));
}

EmbodiedEnv build_wear_world(const WearWorldConfig& config) {
    require(config.width > 0, "width must be positive");
    require(config.height > 0, "height must be positive");
    require(config.damage_prob >= 0.0 && config.damage_prob <= 1.0,
            "damage_prob must be in [0,1]");
    require(config.repair_amount >= 0, "repair_amount must be nonnegative");

    GridWorld::Params p;
    p.width = config.width;
    p.height = config.height;
    if (config.food_cell) p.food_cells.insert(*config.food_cell);
    p.food_energy = config.food_energy;
    p.food_respawn_period = config.food_respawn_period;
    p.move_cost = config.move_cost;
    p.repair_cell = config.repair_cell;
    p.repair_amount = config.repair_amount;

    EmbodiedEnv env;
    env.world = std::make_shared<GridWorld>(std::move(p));
    env.config.energy_max = config.energy_max;
    env.config.leak = config.leak;
    env.config.action_cost = config.move_cost;
    env.config.damage_prob = config.damage_prob;
    return env;
}

StateId grid_start_state(const EmbodiedEnv& env, std::optional<Cell> start) {
    auto grid = std::dynamic_pointer_cast<const GridWorld>(env.world);
    require(grid != nullptr, "environment is not grid-based");
    if (start) return grid->state_of(*start);
    // Free cell closest to the grid center.
    double cx = (grid->width() - 1) / 2.0;
    double cy = (grid->height() - 1) / 2.0;
    Cell best = grid->cell_of(0);
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid->num_cells(); ++i) {
        Cell c = grid->cell_of(i * grid->timer_states());
        double d = std::abs(c.x - cx) + std::abs(c.y - cy);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return grid->state_of(best);
}

}  // namespace mortalworld
