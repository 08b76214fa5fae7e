#pragma once
// n-step empowerment: the Shannon capacity of the channel from length-n
// action sequences to the resulting final state. Capacities are computed
// in bits (log base 2) throughout.

#include <cstddef>
#include <string>
#include <vector>

#include "mortalworld/mdp.hpp"

namespace mortalworld {

// Refuse rather than silently sample beyond this many action sequences.
constexpr std::size_t kDefaultEnumerationCap = 1u << 20;

constexpr double kDefaultCapacityTol = 1e-6;
constexpr std::size_t kDefaultCapacityMaxIter = 10000;

// Thrown when an exact computation would exceed its configured budget
// (sequence enumeration cap, compiled state cap). Callers should reduce
// the horizon or problem size; sampling fallbacks are not provided.
class CapacityBudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ChannelMatrix {
    std::size_t num_inputs = 0;
    std::size_t num_outputs = 0;
    std::vector<double> probs;  // row-major p(output | input)
    std::vector<std::string> input_labels;
    std::vector<StateId> output_labels;

    std::span<const double> row(std::size_t i) const {
        return {probs.data() + i * num_outputs, num_outputs};
    }
};

struct EmpowermentValue {
    enum class Method { blahut_arimoto, brute_force };
    double bits = 0.0;
    std::size_t horizon = 1;
    Method method = Method::blahut_arimoto;
    double gap = 0.0;  // capacity upper-lower bound at termination
    bool converged = true;
};

// Channel rows are the num_actions^n ordered action sequences in
// lexicographic order; columns are reachable_states(s, n).
ChannelMatrix nstep_channel(const FiniteMdp& mdp, StateId s, std::size_t n,
                            std::size_t enumeration_cap = kDefaultEnumerationCap);

EmpowermentValue channel_capacity_ba(const ChannelMatrix& channel,
                                     double tol = kDefaultCapacityTol,
                                     std::size_t max_iter = kDefaultCapacityMaxIter);

// Exhaustive grid search over the input simplex; the independent oracle
// for channel_capacity_ba on tiny channels (num_inputs <= 4).
EmpowermentValue channel_capacity_bruteforce(const ChannelMatrix& channel,
                                             double resolution);

EmpowermentValue empowerment(const FiniteMdp& mdp, StateId s, std::size_t n,
                             double tol = kDefaultCapacityTol,
                             std::size_t max_iter = kDefaultCapacityMaxIter,
                             std::size_t enumeration_cap = kDefaultEnumerationCap);

// Per-state empowerment; entries are independent and computed in
// parallel across `threads` workers with bit-identical results.
std::vector<EmpowermentValue> empowerment_map(
    const FiniteMdp& mdp, std::size_t n, double tol = kDefaultCapacityTol,
    std::size_t max_iter = kDefaultCapacityMaxIter, std::size_t threads = 1,
    std::size_t enumeration_cap = kDefaultEnumerationCap);

double expected_successor_empowerment(const FiniteMdp& mdp, StateId s,
                                      ActionId a, std::size_t n,
                                      const std::vector<EmpowermentValue>& map);

}  // namespace mortalworld
