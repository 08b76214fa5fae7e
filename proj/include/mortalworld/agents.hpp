#pragma once
// Behavioral policies (random, greedy-empowerment, homeostatic
// Q-learning, hybrid) and the valence/stress affect signals with
// stress-modulated exploration.

#include <vector>

#include "mortalworld/embodiment.hpp"
#include "mortalworld/empowerment.hpp"
#include "mortalworld/mdp.hpp"

namespace mortalworld {

enum class PolicyKind { random, greedy_empowerment, homeostatic_q, hybrid };

enum class TieMode { lowest_index, seeded_uniform };

struct QParams {
    double alpha = 0.1;         // learning rate, (0,1]
    double gamma = 0.95;        // discount, [0,1)
    double epsilon_base = 0.1;  // baseline exploration
    double setpoint = 0.7;      // homeostatic energy-fraction target
    double beta = 0.0;          // intrinsic empowerment weight
};

struct AffectState {
    double last_health = 1.0;
    double valence = 0.0;
    double stress = 0.0;
    double lambda = 0.9;  // stress decay, [0,1)
    double kappa = 0.5;   // stress -> exploration gain
};

struct Policy {
    PolicyKind kind = PolicyKind::random;
    QParams params;
    TieMode tie_mode = TieMode::lowest_index;
    std::size_t horizon_n = 1;
    std::vector<double> q;  // [s][a], learning kinds only
    std::size_t num_states = 0;
    std::size_t num_actions = 0;

    bool learning() const {
        return kind == PolicyKind::homeostatic_q || kind == PolicyKind::hybrid;
    }
    void bind(const FiniteMdp& mdp);
    double q_at(StateId s, ActionId a) const { return q[s * num_actions + a]; }
};

ActionId act_random(std::size_t num_actions, CounterRng& rng);

ActionId act_greedy_empowerment(const FiniteMdp& mdp, StateId s, std::size_t n,
                                const std::vector<EmpowermentValue>& map,
                                CounterRng& rng, TieMode tie_mode);

// Drive-reduction reward: negative distance of the energy fraction from
// the setpoint.
double homeostatic_reward(double energy_fraction, double setpoint);
double homeostatic_reward(const BodyState& body, double setpoint);

// One-step temporal-difference update; terminal next states bootstrap 0.
void q_update(Policy& policy, const FiniteMdp& mdp, StateId s, ActionId a,
              double reward, StateId s_next);

AffectState update_affect(const AffectState& affect, double new_health);

double stress_modulated_epsilon(const QParams& params, const AffectState& affect);

// Epsilon-greedy over the learned Q-table with stress-driven epsilon.
ActionId act_hybrid(const Policy& policy, const FiniteMdp& mdp, StateId s,
                    const AffectState& affect, CounterRng& rng);

// Dispatch by kind. Learning kinds act epsilon-greedily on their
// Q-table; greedy_empowerment needs a map at the policy's horizon.
ActionId act(const Policy& policy, const FiniteMdp& mdp, StateId s,
             const std::vector<EmpowermentValue>* map, const AffectState& affect,
             CounterRng& rng);

}  // namespace mortalworld
