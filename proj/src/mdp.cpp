#include "mortalworld/mdp.hpp"

#include <cmath>
#include <deque>
#include <fmt/format.h>

#include <json.hpp>

namespace mortalworld {

FiniteMdp::FiniteMdp(std::size_t num_states, std::size_t num_actions,
                     std::vector<double> transition, std::set<StateId> terminal,
                     std::vector<std::string> labels)
    : num_states_(num_states),
      num_actions_(num_actions),
      transition_(std::move(transition)),
      terminal_(std::move(terminal)),
      labels_(std::move(labels)) {
    if (num_states_ == 0 || num_actions_ == 0) {
        throw std::invalid_argument("MDP needs at least one state and action");
    }
    if (transition_.size() != num_states_ * num_actions_ * num_states_) {
        throw std::invalid_argument("transition tensor has wrong size");
    }
    terminal_flags_.assign(num_states_, false);
    for (StateId s : terminal_) {
        if (s >= num_states_) {
            throw std::invalid_argument("terminal state index out of range");
        }
        terminal_flags_[s] = true;
    }
}

FiniteMdp FiniteMdp::with_renormalized_rows(std::size_t num_states,
                                            std::size_t num_actions,
                                            std::vector<double> transition,
                                            std::set<StateId> terminal,
                                            std::vector<std::string> labels) {
    for (std::size_t r = 0; r < num_states * num_actions; ++r) {
        double sum = 0.0;
        for (std::size_t j = 0; j < num_states; ++j) {
            sum += transition[r * num_states + j];
        }
        if (sum > 0.0) {
            for (std::size_t j = 0; j < num_states; ++j) {
                transition[r * num_states + j] /= sum;
            }
        }
    }
    return FiniteMdp(num_states, num_actions, std::move(transition),
                     std::move(terminal), std::move(labels));
}

std::vector<Violation> FiniteMdp::validate() const {
    std::vector<Violation> out;
    for (StateId s = 0; s < num_states_; ++s) {
        for (ActionId a = 0; a < num_actions_; ++a) {
            auto r = row(s, a);
            double sum = 0.0;
            for (std::size_t j = 0; j < num_states_; ++j) {
                if (r[j] < 0.0) {
                    out.push_back({Violation::Kind::negative_entry,
                                   fmt::format("negative entry at [{}][{}][{}]",
                                               s, a, j)});
                }
                sum += r[j];
            }
            if (std::abs(sum - 1.0) > kRowSumTolerance) {
                out.push_back({Violation::Kind::non_stochastic_row,
                               fmt::format("row [{}][{}] sums to {}", s, a, sum)});
            }
            if (terminal_flags_[s]) {
                for (std::size_t j = 0; j < num_states_; ++j) {
                    double want = (j == s) ? 1.0 : 0.0;
                    if (std::abs(r[j] - want) > kRowSumTolerance) {
                        out.push_back(
                            {Violation::Kind::non_absorbing_terminal,
                             fmt::format("terminal state {} row [{}] is not a "
                                         "self point mass",
                                         s, a)});
                        break;
                    }
                }
            }
        }
    }
    return out;
}

StateId FiniteMdp::step(StateId s, ActionId a, CounterRng& rng) const {
    check_indices(s, a);
    if (terminal_flags_[s]) return s;
    return rng.sample_row(row(s, a));
}

std::vector<StateId> FiniteMdp::successor_support(StateId s, ActionId a) const {
    auto r = row(s, a);
    std::vector<StateId> out;
    for (StateId j = 0; j < num_states_; ++j) {
        if (r[j] > 0.0) out.push_back(j);
    }
    return out;
}

std::vector<StateId> FiniteMdp::reachable_states(StateId s,
                                                 std::size_t horizon) const {
    check_state(s);
    std::vector<bool> seen(num_states_, false);
    seen[s] = true;
    std::vector<StateId> frontier{s};
    for (std::size_t d = 0; d < horizon && !frontier.empty(); ++d) {
        std::vector<StateId> next;
        for (StateId u : frontier) {
            for (ActionId a = 0; a < num_actions_; ++a) {
                for (StateId v : successor_support(u, a)) {
                    if (!seen[v]) {
                        seen[v] = true;
                        next.push_back(v);
                    }
                }
            }
        }
        frontier = std::move(next);
    }
    std::vector<StateId> out;
    for (StateId j = 0; j < num_states_; ++j) {
        if (seen[j]) out.push_back(j);
    }
    return out;
}

std::optional<std::size_t> FiniteMdp::irreversibility(StateId from,
                                                      StateId to) const {
    check_state(from);
    check_state(to);
    if (from == to) return 0;
    // BFS over the strictly-positive-probability support graph.
    std::vector<std::size_t> dist(num_states_, SIZE_MAX);
    dist[to] = 0;
    std::deque<StateId> queue{to};
    while (!queue.empty()) {
        StateId u = queue.front();
        queue.pop_front();
        for (ActionId a = 0; a < num_actions_; ++a) {
            for (StateId v : successor_support(u, a)) {
                if (dist[v] == SIZE_MAX) {
                    dist[v] = dist[u] + 1;
                    if (v == from) return dist[v];
                    queue.push_back(v);
                }
            }
        }
    }
    return std::nullopt;
}

std::string FiniteMdp::to_json() const {
    nlohmann::ordered_json doc;
    doc["num_states"] = num_states_;
    doc["num_actions"] = num_actions_;
    doc["terminal"] = std::vector<StateId>(terminal_.begin(), terminal_.end());
    auto tensor = nlohmann::ordered_json::array();
    for (StateId s = 0; s < num_states_; ++s) {
        auto per_action = nlohmann::ordered_json::array();
        for (ActionId a = 0; a < num_actions_; ++a) {
            auto r = row(s, a);
            per_action.push_back(std::vector<double>(r.begin(), r.end()));
        }
        tensor.push_back(std::move(per_action));
    }
    doc["transition"] = std::move(tensor);
    if (!labels_.empty()) doc["labels"] = labels_;
    return doc.dump(2);
}

FiniteMdp FiniteMdp::from_json(const std::string& text, bool check) {
    auto doc = nlohmann::json::parse(text);
    std::size_t ns = doc.at("num_states").get<std::size_t>();
    std::size_t na = doc.at("num_actions").get<std::size_t>();
    std::set<StateId> terminal;
    for (const auto& t : doc.at("terminal")) terminal.insert(t.get<StateId>());
    const auto& tensor = doc.at("transition");
    if (tensor.size() != ns) throw std::invalid_argument("transition has wrong outer size");
    std::vector<double> flat;
    flat.reserve(ns * na * ns);
    for (const auto& per_action : tensor) {
        if (per_action.size() != na) throw std::invalid_argument("transition has wrong action size");
        for (const auto& r : per_action) {
            if (r.size() != ns) throw std::invalid_argument("transition row has wrong size");
            for (const auto& p : r) flat.push_back(p.get<double>());
        }
    }
    std::vector<std::string> labels;
    if (doc.contains("labels")) labels = doc["labels"].get<std::vector<std::string>>();
    FiniteMdp mdp(ns, na, std::move(flat), std::move(terminal), std::move(labels));
    auto violations = check ? mdp.validate() : std::vector<Violation>{};
    if (!violations.empty()) {
        throw std::invalid_argument("invalid MDP document: " + violations.front().message);
    }
    return mdp;
}

}  // namespace mortalworld
