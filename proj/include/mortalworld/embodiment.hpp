#pragma once
// Being-in-the-world: folds an energy/damage body into the environment
// state and degrades sensors and actuators as composable wrappers over a
// base world. An embodied environment can be simulated lazily or
// compiled into an explicit FiniteMdp product model.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mortalworld/mdp.hpp"

namespace mortalworld {

constexpr double kMaskedFeatureSentinel = 0.0;
constexpr std::size_t kDefaultCompiledStateCap = 200000;

struct BodyState {
    double energy = 1.0;
    double energy_max = 1.0;
    int sensor_damage = 0;
    int actuator_damage = 0;

    double energy_fraction() const {
        return energy_max > 0.0 ? energy / energy_max : 0.0;
    }
    bool depleted() const { return energy <= 0.0; }
};

struct SensorSpec {
    enum class Modality { mask, noise, energy_fidelity };
    Modality modality = Modality::mask;
    double mask_fraction = 0.0;
    double noise_std = 0.0;
    // Energy fraction -> observation precision in (0, 1]; effective noise
    // is noise_std / precision. Only used by energy_fidelity.
    std::function<double(double)> fidelity_curve;

    bool is_identity() const {
        return mask_fraction == 0.0 && noise_std == 0.0;
    }
};

struct ActuatorSpec {
    double dropout_prob = 0.0;
    double gain_decay_per_damage = 0.0;
    double energy_cost_per_action = 0.0;

    double gain(int damage) const;
    // Baseline dropout compounded with gain lost to accumulated damage.
    double drop_probability(int damage) const;
};

struct Observation {
    std::vector<double> features;
    std::vector<bool> validity_mask;
};

struct EmbodiedState {
    StateId world = 0;
    BodyState body;
};

// One world transition branch with its body side effects.
struct WorldOutcome {
    double probability = 1.0;
    StateId next = 0;
    double energy_delta = 0.0;  // e.g. food gain
    int damage_delta = 0;       // e.g. repair (negative)
};

// Finite base environment. Worlds are fully Markov: food timers and the
// like are part of the state index, so the lazy simulator and the
// compiled model share one source of dynamics.
class BaseWorld {
public:
    virtual ~BaseWorld() = default;
    virtual std::size_t num_states() const = 0;
    virtual std::size_t num_actions() const = 0;
    virtual bool is_terminal(StateId s) const = 0;
    virtual std::vector<WorldOutcome> outcomes(StateId s, ActionId a) const = 0;
    // Dynamics when the intended action was dropped (the "stay" action);
    // timers still advance.
    virtual std::vector<WorldOutcome> noop_outcomes(StateId s) const = 0;
    virtual Observation observe(StateId s, double energy_fraction) const = 0;
    virtual std::string label(StateId s) const = 0;
};

struct EmbodimentConfig {
    double energy_max = 1.0;
    double leak = 0.0;
    double action_cost = 0.0;
    SensorSpec sensor;
    ActuatorSpec actuator;
    double damage_prob = 0.0;
    int damage_max = 8;  // damage counter cap, bounds the compiled model
};

struct EmbodiedEnv {
    std::shared_ptr<const BaseWorld> world;
    EmbodimentConfig config;

    bool is_terminal(const EmbodiedState& s) const {
        return s.body.depleted() || world->is_terminal(s.world);
    }
    EmbodiedState initial_state(StateId world_state) const;
};

Observation apply_sensor(const SensorSpec& spec, const BodyState& body,
                         const Observation& true_obs, CounterRng& rng);

// nullopt means the intention was dropped and realizes as a no-op.
std::optional<ActionId> apply_actuator(const ActuatorSpec& spec,
                                       const BodyState& body, ActionId intention,
                                       CounterRng& rng);

BodyState tick_energy(const BodyState& body, double action_cost, double leak);

std::pair<EmbodiedState, Observation> embodied_step(const EmbodiedEnv& env,
                                                    const EmbodiedState& s,
                                                    ActionId intention,
                                                    CounterRng& rng);

// Explicit product MDP over (world, quantized energy, damage). Energy is
// quantized to `energy_levels` evenly spaced levels with nearest-level
// rounding; level 0 is death. With collapse_dead (default) every dead
// configuration maps to one absorbing state, so losing the body shows up
// as a single zero-empowerment attractor.
struct CompiledModel {
    FiniteMdp mdp;
    std::size_t energy_levels = 2;
    std::size_t damage_levels = 1;
    double energy_width = 1.0;
    bool collapsed_dead = true;
    std::optional<StateId> dead_state;
    std::size_t world_states = 0;

    struct Decoded {
        StateId world = 0;
        std::size_t energy_level = 0;
        std::size_t damage = 0;
        bool dead = false;
    };
    StateId encode(StateId world, std::size_t energy_level,
                   std::size_t damage) const;
    Decoded decode(StateId s) const;
    double energy_of(StateId s) const;
    StateId encode_embodied(const EmbodiedState& s) const;
};

CompiledModel compile_explicit(const EmbodiedEnv& env, std::size_t energy_levels,
                               bool collapse_dead = true,
                               std::size_t state_cap = kDefaultCompiledStateCap);

}  // namespace mortalworld
