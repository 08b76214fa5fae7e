#include "mortalworld/embodiment.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <set>
#include <stdexcept>

#include "mortalworld/empowerment.hpp"  // CapacityBudgetError

namespace mortalworld {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

double default_precision(double energy_fraction) {
    // Precision degrades linearly with the reservoir, floored so the
    // effective noise stays finite at empty.
    return std::max(energy_fraction, 0.1);
}

}  // namespace

double ActuatorSpec::gain(int damage) const {
    return std::pow(1.0 - gain_decay_per_damage, damage);
}

double ActuatorSpec::drop_probability(int damage) const {
    return clamp01(1.0 - (1.0 - dropout_prob) * gain(damage));
}

EmbodiedState EmbodiedEnv::initial_state(StateId world_state) const {
    EmbodiedState s;
    s.world = world_state;
    s.body.energy = config.energy_max;
    s.body.energy_max = config.energy_max;
    return s;
}

Observation apply_sensor(const SensorSpec& spec, const BodyState& body,
                         const Observation& true_obs, CounterRng& rng) {
    if (true_obs.features.size() != true_obs.validity_mask.size()) {
        throw std::invalid_argument("observation feature/mask length mismatch");
    }
    Observation obs = true_obs;
    switch (spec.modality) {
        case SensorSpec::Modality::mask: {
            if (spec.mask_fraction < 0.0 || spec.mask_fraction > 1.0) {
                throw std::invalid_argument("mask_fraction must be in [0,1]");
            }
            if (spec.mask_fraction == 0.0) break;
            std::size_t n = obs.features.size();
            auto k = static_cast<std::size_t>(
                std::llround(spec.mask_fraction * static_cast<double>(n)));
            std::vector<std::size_t> idx(n);
            std::iota(idx.begin(), idx.end(), 0);
            for (std::size_t i = 0; i < k; ++i) {
                std::size_t j = i + rng.next_index(n - i);
                std::swap(idx[i], idx[j]);
                obs.validity_mask[idx[i]] = false;
                obs.features[idx[i]] = kMaskedFeatureSentinel;
            }
            break;
        }
        case SensorSpec::Modality::noise: {
            if (spec.noise_std < 0.0) {
                throw std::invalid_argument("noise_std must be nonnegative");
            }
            if (spec.noise_std == 0.0) break;
            for (std::size_t i = 0; i < obs.features.size(); ++i) {
                if (obs.validity_mask[i]) {
                    obs.features[i] += spec.noise_std * rng.next_gaussian();
                }
            }
            break;
        }
        case SensorSpec::Modality::energy_fidelity: {
            double precision = spec.fidelity_curve
                                   ? spec.fidelity_curve(body.energy_fraction())
                                   : default_precision(body.energy_fraction());
            if (precision <= 0.0) {
                throw std::invalid_argument("fidelity curve must be positive");
            }
            double eff = spec.noise_std / precision;
            if (eff == 0.0) break;
            for (std::size_t i = 0; i < obs.features.size(); ++i) {
                if (obs.validity_mask[i]) {
                    obs.features[i] += eff * rng.next_gaussian();
                }
            }
            break;
        }
    }
    return obs;
}

std::optional<ActionId> apply_actuator(const ActuatorSpec& spec,
                                       const BodyState& body, ActionId intention,
                                       CounterRng& rng) {
    double p = spec.drop_probability(body.actuator_damage);
    if (p <= 0.0) return intention;
    if (p >= 1.0) return std::nullopt;
    return rng.next_double() < p ? std::nullopt
                                 : std::optional<ActionId>(intention);
}

BodyState tick_energy(const BodyState& body, double action_cost, double leak) {
    if (action_cost < 0.0 || leak < 0.0) {
        throw std::invalid_argument("costs must be nonnegative");
    }
    BodyState out = body;
    out.energy = std::clamp(body.energy - action_cost - leak, 0.0, body.energy_max);
    return out;
}

std::pair<EmbodiedState, Observation> embodied_step(const EmbodiedEnv& env,
                                                    const EmbodiedState& s,
                                                    ActionId intention,
                                                    CounterRng& rng) {
    if (env.is_terminal(s)) {
        throw std::invalid_argument("cannot step from a terminal embodied state");
    }
    const auto& cfg = env.config;

    // Fixed draw order: actuator, world outcome, damage event, sensor.
    auto realized = apply_actuator(cfg.actuator, s.body, intention, rng);
    auto outcomes = realized ? env.world->outcomes(s.world, *realized)
                             : env.world->noop_outcomes(s.world);
    std::vector<double> probs(outcomes.size());
    for (std::size_t i = 0; i < outcomes.size(); ++i) probs[i] = outcomes[i].probability;
    const WorldOutcome& outcome = outcomes[rng.sample_row(probs)];

    int damage_event = 0;
    if (cfg.damage_prob > 0.0) {
        damage_event = rng.next_double() < cfg.damage_prob ? 1 : 0;
    }

    EmbodiedState next;
    next.world = outcome.next;
    double total_cost = cfg.action_cost + cfg.actuator.energy_cost_per_action;
    next.body = tick_energy(s.body, total_cost, cfg.leak);
    next.body.energy =
        std::clamp(next.body.energy + outcome.energy_delta, 0.0, cfg.energy_max);
    next.body.actuator_damage =
        std::clamp(s.body.actuator_damage + outcome.damage_delta + damage_event, 0,
                   cfg.damage_max);
    next.body.sensor_damage = s.body.sensor_damage;

    Observation obs = apply_sensor(
        cfg.sensor, next.body,
        env.world->observe(next.world, next.body.energy_fraction()), rng);
    return {next, obs};
}

StateId CompiledModel::encode(StateId world, std::size_t energy_level,
                              std::size_t damage) const {
    return (world * damage_levels + damage) * energy_levels + energy_level;
}

CompiledModel::Decoded CompiledModel::decode(StateId s) const {
    Decoded d;
    if (dead_state && s == *dead_state) {
        d.dead = true;
        return d;
    }
    d.energy_level = s % energy_levels;
    std::size_t rest = s / energy_levels;
    d.damage = rest % damage_levels;
    d.world = rest / damage_levels;
    d.dead = d.energy_level == 0;
    return d;
}

double CompiledModel::energy_of(StateId s) const {
    auto d = decode(s);
    return d.dead && dead_state && s == *dead_state
               ? 0.0
               : static_cast<double>(d.energy_level) * energy_width;
}

StateId CompiledModel::encode_embodied(const EmbodiedState& s) const {
    auto level = static_cast<std::size_t>(std::clamp<long long>(
        std::llround(s.body.energy / energy_width), 0,
        static_cast<long long>(energy_levels - 1)));
    auto damage = static_cast<std::size_t>(
        std::clamp<int>(s.body.actuator_damage, 0,
                        static_cast<int>(damage_levels - 1)));
    if (level == 0 && dead_state) return *dead_state;
    return encode(s.world, level, damage);
}

CompiledModel compile_explicit(const EmbodiedEnv& env, std::size_t energy_levels,
                               bool collapse_dead, std::size_t state_cap) {
    if (energy_levels < 2) {
        throw std::invalid_argument("energy quantization needs >= 2 levels");
    }
    const auto& cfg = env.config;
    const BaseWorld& world = *env.world;
    const std::size_t W = world.num_states();
    const std::size_t A = world.num_actions();

    // The damage dimension is materialized only when damage can change.
    bool damage_dynamic = cfg.damage_prob > 0.0;
    for (StateId w = 0; w < W && !damage_dynamic; ++w) {
        if (world.is_terminal(w)) continue;
        for (ActionId a = 0; a < A && !damage_dynamic; ++a) {
            for (const auto& o : world.outcomes(w, a)) {
                if (o.damage_delta != 0) damage_dynamic = true;
            }
        }
        for (const auto& o : world.noop_outcomes(w)) {
            if (o.damage_delta != 0) damage_dynamic = true;
        }
    }
    const std::size_t D = damage_dynamic ? static_cast<std::size_t>(cfg.damage_max) + 1 : 1;
    const std::size_t L = energy_levels;
    const std::size_t product = W * D * L;
    const std::size_t total = product + (collapse_dead ? 1 : 0);
    if (total > state_cap) {
        throw CapacityBudgetError(fmt::format(
            "compiled model needs {} states, exceeding the cap {}", total,
            state_cap));
    }

    const double width = cfg.energy_max / static_cast<double>(L - 1);
    const std::optional<StateId> dead_state =
        collapse_dead ? std::optional<StateId>(product) : std::nullopt;
    auto encode = [&](StateId w, std::size_t e, std::size_t d) {
        return (w * D + d) * L + e;
    };
    const double total_cost = cfg.action_cost + cfg.actuator.energy_cost_per_action;

    std::vector<double> transition(total * A * total, 0.0);
    std::set<StateId> terminal;
    std::vector<std::string> labels(total);

    auto is_dead_product = [&](StateId w, std::size_t e) {
        return e == 0 || world.is_terminal(w);
    };

    for (StateId w = 0; w < W; ++w) {
        for (std::size_t d = 0; d < D; ++d) {
            for (std::size_t e = 0; e < L; ++e) {
                StateId id = encode(w, e, d);
                labels[id] = fmt::format("{}|e{}|d{}", world.label(w), e, d);
                if (is_dead_product(w, e)) {
                    terminal.insert(id);
                    for (ActionId a = 0; a < A; ++a) {
                        transition[(id * A + a) * total + id] = 1.0;
                    }
                    continue;
                }
                double energy_value = static_cast<double>(e) * width;
                double p_drop =
                    cfg.actuator.drop_probability(static_cast<int>(d));
                for (ActionId a = 0; a < A; ++a) {
                    double* row = &transition[(id * A + a) * total];
                    auto add_branch = [&](double branch_prob,
                                          const std::vector<WorldOutcome>& outs) {
                        if (branch_prob <= 0.0) return;
                        for (const auto& o : outs) {
                            for (int event = 0; event <= 1; ++event) {
                                double p_event =
                                    event ? cfg.damage_prob : 1.0 - cfg.damage_prob;
                                double p = branch_prob * o.probability * p_event;
                                if (p <= 0.0) continue;
                                double ticked = std::clamp(
                                    energy_value - total_cost - cfg.leak, 0.0,
                                    cfg.energy_max);
                                double v = std::clamp(ticked + o.energy_delta, 0.0,
                                                      cfg.energy_max);
                                auto e2 = static_cast<std::size_t>(
                                    std::clamp<long long>(
                                        std::llround(v / width), 0,
                                        static_cast<long long>(L - 1)));
                                auto d2 = static_cast<std::size_t>(std::clamp<int>(
                                    static_cast<int>(d) + o.damage_delta + event, 0,
                                    static_cast<int>(D - 1)));
                                StateId target;
                                if (collapse_dead && is_dead_product(o.next, e2)) {
                                    target = *dead_state;
                                } else {
                                    target = encode(o.next, e2, d2);
                                }
                                row[target] += p;
                            }
                        }
                    };
                    add_branch(1.0 - p_drop, world.outcomes(w, a));
                    add_branch(p_drop, world.noop_outcomes(w));
                }
            }
        }
    }
    if (collapse_dead) {
        StateId dead = *dead_state;
        labels[dead] = "dead";
        terminal.insert(dead);
        for (ActionId a = 0; a < A; ++a) {
            transition[(dead * A + a) * total + dead] = 1.0;
        }
    }

    CompiledModel model{
        FiniteMdp(total, A, std::move(transition), std::move(terminal),
                  std::move(labels)),
        L,
        D,
        width,
        collapse_dead,
        dead_state,
        W};
    return model;
}

}  // namespace mortalworld
