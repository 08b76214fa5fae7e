#include "mortalworld/empowerment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

namespace mortalworld {

namespace {

double log2_safe(double x) { return std::log2(x); }

// p * log2(p / q) with 0 log 0 := 0.
double plogpq(double p, double q) {
    if (p <= 0.0) return 0.0;
    return p * (log2_safe(p) - log2_safe(q));
}

void check_channel(const ChannelMatrix& ch) {
    if (ch.num_inputs == 0 || ch.num_outputs == 0 ||
        ch.probs.size() != ch.num_inputs * ch.num_outputs) {
        throw std::invalid_argument("malformed channel matrix");
    }
    for (std::size_t i = 0; i < ch.num_inputs; ++i) {
        double sum = 0.0;
        for (double p : ch.row(i)) {
            if (p < 0.0) throw std::invalid_argument("negative channel entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw std::invalid_argument(
                fmt::format("channel row {} sums to {}", i, sum));
        }
    }
}

}  // namespace

ChannelMatrix nstep_channel(const FiniteMdp& mdp, StateId s, std::size_t n,
                            std::size_t enumeration_cap) {
    if (n < 1) throw std::invalid_argument("horizon must be >= 1");
    std::size_t num_inputs = 1;
    for (std::size_t d = 0; d < n; ++d) {
        if (num_inputs > enumeration_cap / mdp.num_actions()) {
            throw CapacityBudgetError(fmt::format(
                "num_actions^n = {}^{} exceeds the enumeration cap {}; "
                "reduce the horizon",
                mdp.num_actions(), n, enumeration_cap));
        }
        num_inputs *= mdp.num_actions();
    }

    auto reachable = mdp.reachable_states(s, n);
    std::vector<std::size_t> col_of(mdp.num_states(), SIZE_MAX);
    for (std::size_t c = 0; c < reachable.size(); ++c) col_of[reachable[c]] = c;

    ChannelMatrix ch;
    ch.num_inputs = num_inputs;
    ch.num_outputs = reachable.size();
    ch.probs.assign(num_inputs * reachable.size(), 0.0);
    ch.input_labels.resize(num_inputs);
    ch.output_labels = reachable;

    // DFS over action prefixes so sibling sequences share the propagated
    // state distribution of their common prefix.
    std::vector<double> dist(mdp.num_states(), 0.0);
    dist[s] = 1.0;
    std::size_t next_row = 0;
    std::vector<ActionId> prefix;

    auto emit = [&](const std::vector<double>& d) {
        std::string label;
        for (std::size_t i = 0; i < prefix.size(); ++i) {
            if (i) label += ',';
            label += std::to_string(prefix[i]);
        }
        ch.input_labels[next_row] = std::move(label);
        for (StateId j = 0; j < mdp.num_states(); ++j) {
            if (d[j] > 0.0) ch.probs[next_row * ch.num_outputs + col_of[j]] = d[j];
        }
        ++next_row;
    };

    auto propagate = [&](const std::vector<double>& d, ActionId a) {
        std::vector<double> out(mdp.num_states(), 0.0);
        for (StateId u = 0; u < mdp.num_states(); ++u) {
            if (d[u] == 0.0) continue;
            if (mdp.is_terminal(u)) {
                out[u] += d[u];
                continue;
            }
            auto r = mdp.row(u, a);
            for (StateId v = 0; v < mdp.num_states(); ++v) {
                if (r[v] > 0.0) out[v] += d[u] * r[v];
            }
        }
        return out;
    };

    auto recurse = [&](auto&& self, const std::vector<double>& d,
                       std::size_t depth) -> void {
        if (depth == n) {
            emit(d);
            return;
        }
        for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            prefix.push_back(a);
            self(self, propagate(d, a), depth + 1);
            prefix.pop_back();
        }
    };
    recurse(recurse, dist, 0);
    return ch;
}

EmpowermentValue channel_capacity_ba(const ChannelMatrix& channel, double tol,
                                     std::size_t max_iter) {
    check_channel(channel);
    if (tol <= 0.0) throw std::invalid_argument("tol must be positive");

    // Merge duplicate rows and drop zero-mass columns; both transforms
    // preserve capacity and keep the inner loops free of 0*log(0) cases.
    std::map<std::vector<double>, std::size_t> seen;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < channel.num_inputs; ++i) {
        auto r = channel.row(i);
        std::vector<double> key(r.begin(), r.end());
        if (seen.emplace(key, rows.size()).second) rows.push_back(std::move(key));
    }
    std::vector<bool> keep_col(channel.num_outputs, false);
    for (const auto& r : rows) {
        for (std::size_t j = 0; j < channel.num_outputs; ++j) {
            if (r[j] > 0.0) keep_col[j] = true;
        }
    }
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < channel.num_outputs; ++j) {
        if (keep_col[j]) cols.push_back(j);
    }
    const std::size_t k = rows.size();
    const std::size_t m = cols.size();
    std::vector<double> p(k * m);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < m; ++j) p[i * m + j] = rows[i][cols[j]];
    }

    EmpowermentValue result;
    result.method = EmpowermentValue::Method::blahut_arimoto;
    if (k == 1) return result;  // single distinct row: zero capacity, zero gap

    std::vector<double> q(k, 1.0 / static_cast<double>(k));
    std::vector<double> out(m);
    std::vector<double> d(k);
    double lower = 0.0;
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < m; ++j) out[j] += q[i] * p[i * m + j];
        }
        double upper = -std::numeric_limits<double>::infinity();
        lower = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            double di = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                di += plogpq(p[i * m + j], out[j]);
            }
            d[i] = di;
            lower += q[i] * di;
            upper = std::max(upper, di);
        }
        gap = upper - lower;
        if (gap <= tol) {
            result.converged = true;
            break;
        }
        result.converged = false;
        // Multiplicative update, normalized in a numerically tame way.
        double dmax = *std::max_element(d.begin(), d.end());
        double norm = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            q[i] *= std::exp2(d[i] - dmax);
            norm += q[i];
        }
        for (double& qi : q) qi /= norm;
    }
    result.bits = std::max(0.0, lower);
    result.gap = std::max(0.0, gap);
    return result;
}

EmpowermentValue channel_capacity_bruteforce(const ChannelMatrix& channel,
                                             double resolution) {
    check_channel(channel);
    if (channel.num_inputs > 4) {
        throw std::invalid_argument(
            "brute-force capacity supports at most 4 inputs");
    }
    if (resolution <= 0.0 || resolution > 1.0) {
        throw std::invalid_argument("resolution must be in (0, 1]");
    }
    const std::size_t k = channel.num_inputs;
    const std::size_t m = channel.num_outputs;
    const std::size_t steps =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1.0 / resolution)));

    std::vector<double> q(k, 0.0);
    std::vector<double> out(m);
    double best = 0.0;

    auto mutual_information = [&]() {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            if (q[i] == 0.0) continue;
            auto r = channel.row(i);
            for (std::size_t j = 0; j < m; ++j) out[j] += q[i] * r[j];
        }
        double mi = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            if (q[i] == 0.0) continue;
            auto r = channel.row(i);
            for (std::size_t j = 0; j < m; ++j) {
                mi += q[i] * plogpq(r[j], out[j]);
            }
        }
        return mi;
    };

    // Enumerate lattice points of the simplex with step 1/steps.
    auto enumerate = [&](auto&& self, std::size_t i, std::size_t remaining) -> void {
        if (i + 1 == k) {
            q[i] = static_cast<double>(remaining) / static_cast<double>(steps);
            best = std::max(best, mutual_information());
            return;
        }
        for (std::size_t units = 0; units <= remaining; ++units) {
            q[i] = static_cast<double>(units) / static_cast<double>(steps);
            self(self, i + 1, remaining - units);
        }
    };
    enumerate(enumerate, 0, steps);

    EmpowermentValue result;
    result.bits = best;
    result.method = EmpowermentValue::Method::brute_force;
    result.gap = 0.0;
    return result;
}

EmpowermentValue empowerment(const FiniteMdp& mdp, StateId s, std::size_t n,
                             double tol, std::size_t max_iter,
                             std::size_t enumeration_cap) {
    if (mdp.is_terminal(s)) {
        // Fast path; the channel path yields identical rows and agrees.
        EmpowermentValue v;
        v.horizon = n;
        return v;
    }
    auto v = channel_capacity_ba(nstep_channel(mdp, s, n, enumeration_cap), tol,
                                 max_iter);
    v.horizon = n;
    return v;
}

std::vector<EmpowermentValue> empowerment_map(const FiniteMdp& mdp,
                                              std::size_t n, double tol,
                                              std::size_t max_iter,
                                              std::size_t threads,
                                              std::size_t enumeration_cap) {
    std::vector<EmpowermentValue> map(mdp.num_states());
    threads = std::max<std::size_t>(1, threads);
    if (threads == 1) {
        for (StateId s = 0; s < mdp.num_states(); ++s) {
            map[s] = empowerment(mdp, s, n, tol, max_iter, enumeration_cap);
        }
        return map;
    }
    std::atomic<StateId> next{0};
    std::vector<std::thread> workers;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (std::size_t t = 0; t < threads; ++t) {
        workers.emplace_back([&] {
            for (;;) {
                StateId s = next.fetch_add(1);
                if (s >= mdp.num_states()) return;
                try {
                    map[s] = empowerment(mdp, s, n, tol, max_iter, enumeration_cap);
                } catch (...) {
                    std::scoped_lock lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
    return map;
}

double expected_successor_empowerment(const FiniteMdp& mdp, StateId s,
                                      ActionId a, std::size_t n,
                                      const std::vector<EmpowermentValue>& map) {
    if (map.size() != mdp.num_states()) {
        throw std::invalid_argument("empowerment map size mismatch");
    }
    auto r = mdp.row(s, a);
    double bits = 0.0;
    for (StateId j = 0; j < mdp.num_states(); ++j) {
        if (r[j] > 0.0) {
            if (map[j].horizon != n) {
                throw std::invalid_argument(
                    "empowerment map horizon does not match request");
            }
            bits += r[j] * map[j].bits;
        }
    }
    return bits;
}

}  // namespace mortalworld
