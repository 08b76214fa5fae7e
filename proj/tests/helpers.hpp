#pragma once
// Shared builders for test fixtures: small deterministic grids, random
// MDPs, and random channels. All randomness goes through CounterRng so
// fixtures are reproducible.

#include <cmath>
#include <set>
#include <vector>

#include "mortalworld/empowerment.hpp"
#include "mortalworld/mdp.hpp"
#include "mortalworld/rng.hpp"

namespace mwtest {

using namespace mortalworld;

// Deterministic open grid: width*height states, 4 actions (N, S, E, W),
// bumping a wall stays put, no terminal states.
inline FiniteMdp open_grid_mdp(int width, int height) {
    const auto n = static_cast<std::size_t>(width * height);
    constexpr std::size_t kActions = 4;
    static constexpr int dx[4] = {0, 0, 1, -1};
    static constexpr int dy[4] = {-1, 1, 0, 0};
    std::vector<double> transition(n * kActions * n, 0.0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            auto s = static_cast<std::size_t>(x + y * width);
            for (std::size_t a = 0; a < kActions; ++a) {
                int nx = x + dx[a];
                int ny = y + dy[a];
                bool blocked = nx < 0 || nx >= width || ny < 0 || ny >= height;
                auto t = blocked ? s : static_cast<std::size_t>(nx + ny * width);
                transition[(s * kActions + a) * n + t] = 1.0;
            }
        }
    }
    return FiniteMdp(n, kActions, std::move(transition), {});
}

inline StateId grid_state(int x, int y, int width) {
    return static_cast<StateId>(x + y * width);
}

// Random MDP with sparse rows and absorbing terminal states.
inline FiniteMdp random_mdp(CounterRng& rng, std::size_t max_states,
                            std::size_t max_actions, bool ensure_terminal) {
    std::size_t ns = 2 + rng.next_index(max_states - 1);
    std::size_t na = 1 + rng.next_index(max_actions);
    std::set<StateId> terminal;
    if (ensure_terminal) {
        std::size_t t = 1 + rng.next_index(ns > 2 ? 2 : 1);
        while (terminal.size() < t) terminal.insert(rng.next_index(ns));
    }
    std::vector<double> transition(ns * na * ns, 0.0);
    for (StateId s = 0; s < ns; ++s) {
        for (ActionId a = 0; a < na; ++a) {
            double* row = &transition[(s * na + a) * ns];
            if (terminal.contains(s)) {
                row[s] = 1.0;
                continue;
            }
            std::size_t support = 1 + rng.next_index(std::min<std::size_t>(3, ns));
            double total = 0.0;
            for (std::size_t k = 0; k < support; ++k) {
                StateId t = rng.next_index(ns);
                double w = 0.05 + rng.next_double();
                row[t] += w;
                total += w;
            }
            for (StateId t = 0; t < ns; ++t) row[t] /= total;
        }
    }
    return FiniteMdp(ns, na, std::move(transition), std::move(terminal));
}

inline ChannelMatrix channel_from_rows(
    const std::vector<std::vector<double>>& rows) {
    ChannelMatrix ch;
    ch.num_inputs = rows.size();
    ch.num_outputs = rows.front().size();
    for (const auto& r : rows) {
        ch.probs.insert(ch.probs.end(), r.begin(), r.end());
    }
    ch.input_labels.resize(ch.num_inputs);
    ch.output_labels.resize(ch.num_outputs);
    return ch;
}

inline ChannelMatrix random_channel(CounterRng& rng, std::size_t max_inputs,
                                    std::size_t max_outputs) {
    std::size_t k = 1 + rng.next_index(max_inputs);
    std::size_t m = 2 + rng.next_index(max_outputs - 1);
    std::vector<std::vector<double>> rows(k, std::vector<double>(m));
    for (auto& row : rows) {
        double total = 0.0;
        for (double& p : row) {
            p = -std::log(1.0 - rng.next_double());  // exponential weights
            total += p;
        }
        for (double& p : row) p /= total;
        // Repair the float drift so check_channel's row-sum test passes.
        double sum = 0.0;
        for (std::size_t j = 0; j + 1 < m; ++j) sum += row[j];
        row[m - 1] = 1.0 - sum;
    }
    return channel_from_rows(rows);
}

}  // namespace mwtest
