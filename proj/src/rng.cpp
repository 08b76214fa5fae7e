#include "mortalworld/rng.hpp"

#include <cmath>
#include <numbers>

namespace mortalworld {

double CounterRng::next_gaussian() {
    // u1 in (0,1] so log is finite.
    double u1 = 1.0 - next_double();
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t CounterRng::sample_row(std::span<const double> probs) {
    double u = next_double();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return i;
    }
    // Row sums can fall a hair short of 1; return the last positive entry.
    for (std::size_t i = probs.size(); i-- > 0;) {
        if (probs[i] > 0.0) return i;
    }
    return probs.size() - 1;
}

}  // namespace mortalworld
