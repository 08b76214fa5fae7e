#include "mortalworld/viability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace mortalworld {

namespace {

constexpr std::uint64_t kHealthStreamTag = 0x68656c74;  // "helt"

bool support_inside(const FiniteMdp& mdp, StateId s, ActionId a,
                    const std::vector<bool>& in_set) {
    auto r = mdp.row(s, a);
    for (StateId j = 0; j < mdp.num_states(); ++j) {
        if (r[j] > 0.0 && !in_set[j]) return false;
    }
    return true;
}

}  // namespace

bool ViabilityKernel::contains(StateId s) const {
    return std::binary_search(members.begin(), members.end(), s);
}

ViabilityKernel viability_kernel(const FiniteMdp& mdp) {
    std::vector<bool> in_set(mdp.num_states());
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        in_set[s] = !mdp.is_terminal(s);
    }
    std::size_t iterations = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        ++iterations;
        for (StateId s = 0; s < mdp.num_states(); ++s) {
            if (!in_set[s]) continue;
            bool has_safe_action = false;
            for (ActionId a = 0; a < mdp.num_actions(); ++a) {
                if (support_inside(mdp, s, a, in_set)) {
                    has_safe_action = true;
                    break;
                }
            }
            if (!has_safe_action) {
                in_set[s] = false;
                changed = true;
            }
        }
    }
    ViabilityKernel kernel;
    kernel.iterations_to_fixpoint = iterations - 1;
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (in_set[s]) kernel.members.push_back(s);
    }
    return kernel;
}

bool integrity(const FiniteMdp& mdp, StateId s) {
    if (s >= mdp.num_states()) throw std::out_of_range("state index out of range");
    return viability_kernel(mdp).contains(s);
}

std::optional<ActionId> stay_inside_action(const FiniteMdp& mdp,
                                           const ViabilityKernel& kernel,
                                           StateId s) {
    if (!kernel.contains(s)) return std::nullopt;
    std::vector<bool> in_set(mdp.num_states(), false);
    for (StateId m : kernel.members) in_set[m] = true;
    for (ActionId a = 0; a < mdp.num_actions(); ++a) {
        if (support_inside(mdp, s, a, in_set)) return a;
    }
    return std::nullopt;  // unreachable for a sound kernel
}

HealthEstimate health(const FiniteMdp& mdp, const StatePolicy& policy,
                      StateId s, std::size_t horizon, std::size_t num_rollouts,
                      std::uint64_t seed, std::size_t threads) {
    if (horizon < 1 || num_rollouts < 1) {
        throw std::invalid_argument("horizon and num_rollouts must be >= 1");
    }
    std::vector<std::uint8_t> survived(num_rollouts, 0);

    auto run_one = [&](std::size_t rollout) {
        CounterRng rng(CounterRng::derive_key(seed, rollout, kHealthStreamTag));
        StateId cur = s;
        if (mdp.is_terminal(cur)) return;
        for (std::size_t t = 0; t < horizon; ++t) {
            ActionId a = policy(mdp, cur, rng);
            cur = mdp.step(cur, a, rng);
            if (mdp.is_terminal(cur)) return;
        }
        survived[rollout] = 1;
    };

    threads = std::max<std::size_t>(1, threads);
    if (threads == 1) {
        for (std::size_t r = 0; r < num_rollouts; ++r) run_one(r);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (std::size_t t = 0; t < threads; ++t) {
            workers.emplace_back([&] {
                for (;;) {
                    std::size_t r = next.fetch_add(1);
                    if (r >= num_rollouts) return;
                    run_one(r);
                }
            });
        }
        for (auto& w : workers) w.join();
    }

    std::size_t alive = 0;
    for (auto v : survived) alive += v;
    HealthEstimate est;
    est.probability = static_cast<double>(alive) / static_cast<double>(num_rollouts);
    est.horizon = horizon;
    est.num_rollouts = num_rollouts;
    est.confidence_halfwidth =
        1.96 * std::sqrt(est.probability * (1.0 - est.probability) /
                         static_cast<double>(num_rollouts));
    return est;
}

double vulnerability_from_health(
    double nominal_probability, const std::vector<double>& perturbed_probabilities) {
    if (perturbed_probabilities.empty()) {
        throw std::invalid_argument("perturbation list must be nonempty");
    }
    double worst = *std::min_element(perturbed_probabilities.begin(),
                                     perturbed_probabilities.end());
    return std::max(0.0, nominal_probability - worst);
}

StatePolicy with_policy_noise(StatePolicy base, double epsilon) {
    if (epsilon < 0.0 || epsilon > 1.0) {
        throw std::invalid_argument("policy noise magnitude must be in [0,1]");
    }
    return [base = std::move(base), epsilon](const FiniteMdp& mdp, StateId s,
                                             CounterRng& rng) -> ActionId {
        ActionId chosen = base(mdp, s, rng);
        if (epsilon > 0.0 && rng.next_double() < epsilon) {
            return rng.next_index(mdp.num_actions());
        }
        return chosen;
    };
}

double vulnerability(const FiniteMdp& mdp, const StatePolicy& policy, StateId s,
                     const std::vector<PerturbationSpec>& perturbations,
                     std::size_t horizon, std::size_t num_rollouts,
                     std::uint64_t seed) {
    if (perturbations.empty()) {
        throw std::invalid_argument("perturbation list must be nonempty");
    }
    double nominal =
        health(mdp, policy, s, horizon, num_rollouts, seed).probability;
    std::vector<double> perturbed;
    for (const auto& spec : perturbations) {
        switch (spec.kind) {
            case PerturbationSpec::Kind::policy_noise: {
                auto noisy = with_policy_noise(policy, spec.magnitude);
                perturbed.push_back(
                    health(mdp, noisy, s, horizon, num_rollouts, seed).probability);
                break;
            }
            case PerturbationSpec::Kind::sensor_mask:
            case PerturbationSpec::Kind::actuator_dropout:
            case PerturbationSpec::Kind::energy_leak_increase:
                throw std::invalid_argument(
                    "perturbation '" + spec.target +
                    "' requires an embodied environment, not a bare MDP");
        }
    }
    return vulnerability_from_health(nominal, perturbed);
}

}  // namespace mortalworld
