#include "mortalworld/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mortalworld {

namespace {

ActionId argmax_with_ties(const std::vector<double>& scores, TieMode tie_mode,
                          CounterRng& rng) {
    double best = *std::max_element(scores.begin(), scores.end());
    if (tie_mode == TieMode::lowest_index) {
        for (ActionId a = 0; a < scores.size(); ++a) {
            if (scores[a] == best) return a;
        }
    }
    std::vector<ActionId> ties;
    for (ActionId a = 0; a < scores.size(); ++a) {
        if (scores[a] == best) ties.push_back(a);
    }
    return ties[rng.next_index(ties.size())];
}

}  // namespace

void Policy::bind(const FiniteMdp& mdp) {
    num_states = mdp.num_states();
    num_actions = mdp.num_actions();
    if (learning()) q.assign(num_states * num_actions, 0.0);
}

ActionId act_random(std::size_t num_actions, CounterRng& rng) {
    if (num_actions < 1) throw std::invalid_argument("need at least one action");
    return rng.next_index(num_actions);
}

ActionId act_greedy_empowerment(const FiniteMdp& mdp, StateId s, std::size_t n,
                                const std::vector<EmpowermentValue>& map,
                                CounterRng& rng, TieMode tie_mode) {
    if (mdp.is_terminal(s)) {
        throw std::invalid_argument("no greedy action from a terminal state");
    }
    std::vector<double> scores(mdp.num_actions());
    for (ActionId a = 0; a < mdp.num_actions(); ++a) {
        scores[a] = expected_successor_empowerment(mdp, s, a, n, map);
    }
    return argmax_with_ties(scores, tie_mode, rng);
}

double homeostatic_reward(double energy_fraction, double setpoint) {
    return -std::abs(energy_fraction - setpoint);
}

double homeostatic_reward(const BodyState& body, double setpoint) {
    return homeostatic_reward(body.energy_fraction(), setpoint);
}

void q_update(Policy& policy, const FiniteMdp& mdp, StateId s, ActionId a,
              double reward, StateId s_next) {
    if (!policy.learning()) {
        throw std::invalid_argument("q_update requires a learning policy");
    }
    double bootstrap = 0.0;
    if (!mdp.is_terminal(s_next)) {
        bootstrap = policy.q_at(s_next, 0);
        for (ActionId a2 = 1; a2 < policy.num_actions; ++a2) {
            bootstrap = std::max(bootstrap, policy.q_at(s_next, a2));
        }
    }
    double& cell = policy.q[s * policy.num_actions + a];
    cell += policy.params.alpha *
            (reward + policy.params.gamma * bootstrap - cell);
}

AffectState update_affect(const AffectState& affect, double new_health) {
    if (new_health < 0.0 || new_health > 1.0) {
        throw std::invalid_argument("health must be in [0,1]");
    }
    AffectState out = affect;
    out.valence = new_health - affect.last_health;
    out.stress = std::max(0.0, affect.lambda * affect.stress +
                                   std::max(0.0, -out.valence));
    out.last_health = new_health;
    return out;
}

double stress_modulated_epsilon(const QParams& params, const AffectState& affect) {
    return std::clamp(params.epsilon_base + affect.kappa * affect.stress, 0.0, 1.0);
}

ActionId act_hybrid(const Policy& policy, const FiniteMdp& mdp, StateId s,
                    const AffectState& affect, CounterRng& rng) {
    double epsilon = stress_modulated_epsilon(policy.params, affect);
    if (epsilon > 0.0 && rng.next_double() < epsilon) {
        return rng.next_index(mdp.num_actions());
    }
    std::vector<double> scores(policy.num_actions);
    for (ActionId a = 0; a < policy.num_actions; ++a) {
        scores[a] = policy.q_at(s, a);
    }
    return argmax_with_ties(scores, policy.tie_mode, rng);
}

ActionId act(const Policy& policy, const FiniteMdp& mdp, StateId s,
             const std::vector<EmpowermentValue>* map, const AffectState& affect,
             CounterRng& rng) {
    switch (policy.kind) {
        case PolicyKind::random:
            return act_random(mdp.num_actions(), rng);
        case PolicyKind::greedy_empowerment:
            if (map == nullptr) {
                throw std::invalid_argument(
                    "greedy_empowerment needs an empowerment map");
            }
            return act_greedy_empowerment(mdp, s, policy.horizon_n, *map, rng,
                                          policy.tie_mode);
        case PolicyKind::homeostatic_q:
        case PolicyKind::hybrid:
            if (policy.kind == PolicyKind::hybrid && map == nullptr) {
                throw std::invalid_argument("hybrid needs an empowerment map");
            }
            return act_hybrid(policy, mdp, s, affect, rng);
    }
    throw std::logic_error("unknown policy kind");
}

}  // namespace mortalworld
