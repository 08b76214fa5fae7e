#pragma once
// Explicit finite MDP with absorbing terminal states.
//
// The transition tensor is stored row-major [state][action][next_state].
// Instances are immutable after construction and safe to share across
// threads; every operation is pure given an explicit random source.

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mortalworld/rng.hpp"

namespace mortalworld {

using StateId = std::size_t;
using ActionId = std::size_t;

constexpr double kRowSumTolerance = 1e-9;

struct Violation {
    enum class Kind {
        non_stochastic_row,
        negative_entry,
        non_absorbing_terminal,
        index_out_of_range,
    };
    Kind kind;
    std::string message;
};

struct Rollout {
    std::vector<StateId> states;
    std::vector<ActionId> actions;
    std::optional<std::size_t> terminated_at;
};

class FiniteMdp {
public:
    // Rows are taken as given; call validate() to check stochasticity.
    FiniteMdp(std::size_t num_states, std::size_t num_actions,
              std::vector<double> transition, std::set<StateId> terminal,
              std::vector<std::string> labels = {});

    // Explicit opt-in renormalization of slightly off rows. Rows with
    // nonpositive sums are left untouched (validate() will flag them).
    static FiniteMdp with_renormalized_rows(std::size_t num_states,
                                            std::size_t num_actions,
                                            std::vector<double> transition,
                                            std::set<StateId> terminal,
                                            std::vector<std::string> labels = {});

    std::size_t num_states() const { return num_states_; }
    std::size_t num_actions() const { return num_actions_; }
    const std::set<StateId>& terminal_set() const { return terminal_; }
    const std::vector<std::string>& labels() const { return labels_; }

    std::span<const double> row(StateId s, ActionId a) const {
        check_indices(s, a);
        return {transition_.data() + (s * num_actions_ + a) * num_states_,
                num_states_};
    }

    std::vector<Violation> validate() const;

    bool is_terminal(StateId s) const {
        check_state(s);
        return terminal_flags_[s];
    }

    StateId step(StateId s, ActionId a, CounterRng& rng) const;

    std::vector<StateId> successor_support(StateId s, ActionId a) const;

    std::vector<StateId> reachable_states(StateId s, std::size_t horizon) const;

    // Shortest support-graph path length from `to` back to `from`;
    // nullopt when no path exists (infinite irreversibility).
    std::optional<std::size_t> irreversibility(StateId from, StateId to) const;

    std::string to_json() const;
    static FiniteMdp from_json(const std::string& text, bool check = true);

private:
    void check_state(StateId s) const {
        if (s >= num_states_) throw std::out_of_range("state index out of range");
    }
    void check_indices(StateId s, ActionId a) const {
        check_state(s);
        if (a >= num_actions_) throw std::out_of_range("action index out of range");
    }

    std::size_t num_states_;
    std::size_t num_actions_;
    std::vector<double> transition_;
    std::set<StateId> terminal_;
    std::vector<bool> terminal_flags_;
    std::vector<std::string> labels_;
};

}  // namespace mortalworld
