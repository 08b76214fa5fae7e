#pragma once
// Integrity, health, and vulnerability analyzers.
//
// Integrity is membership in the viability kernel: the greatest set of
// non-terminal states where some action keeps the whole successor
// support inside the set. Health shades this probabilistically via
// seeded Monte Carlo rollouts.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mortalworld/mdp.hpp"

namespace mortalworld {

// Action selector over explicit MDP states.
using StatePolicy =
    std::function<ActionId(const FiniteMdp&, StateId, CounterRng&)>;

struct ViabilityKernel {
    std::vector<StateId> members;
    std::size_t iterations_to_fixpoint = 0;

    bool contains(StateId s) const;
};

struct HealthEstimate {
    double probability = 0.0;
    std::size_t horizon = 1;
    std::size_t num_rollouts = 1;
    double confidence_halfwidth = 0.0;  // normal-approximation 95%
};

struct PerturbationSpec {
    enum class Kind {
        policy_noise,
        sensor_mask,
        actuator_dropout,
        energy_leak_increase,
    };
    Kind kind;
    double magnitude = 0.0;
    std::string target;  // subsystem identifier, informational
};

ViabilityKernel viability_kernel(const FiniteMdp& mdp);

bool integrity(const FiniteMdp& mdp, StateId s);

// Lowest-index action whose successor support stays inside the kernel;
// nullopt for states outside the kernel.
std::optional<ActionId> stay_inside_action(const FiniteMdp& mdp,
                                           const ViabilityKernel& kernel,
                                           StateId s);

HealthEstimate health(const FiniteMdp& mdp, const StatePolicy& policy,
                      StateId s, std::size_t horizon, std::size_t num_rollouts,
                      std::uint64_t seed, std::size_t threads = 1);

// Worst-case health loss across the perturbation list, clamped at zero.
// This overload applies perturbations directly to explicit-MDP rollouts;
// only policy_noise is meaningful here, embodiment-level kinds (sensor,
// actuator, energy) are a usage error on a bare MDP. Embodied
// environments route those kinds through their wrappers (see harness).
double vulnerability(const FiniteMdp& mdp, const StatePolicy& policy, StateId s,
                     const std::vector<PerturbationSpec>& perturbations,
                     std::size_t horizon, std::size_t num_rollouts,
                     std::uint64_t seed);

// Shared reduction: nominal health minus the worst perturbed health.
double vulnerability_from_health(double nominal_probability,
                                 const std::vector<double>& perturbed_probabilities);

// Wraps a policy with epsilon-uniform action noise.
StatePolicy with_policy_noise(StatePolicy base, double epsilon);

}  // namespace mortalworld
