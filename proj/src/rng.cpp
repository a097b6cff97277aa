#include "sap/rng.hpp"

#include <numbers>

namespace sap {

std::vector<double> random_phases(int n, uint64_t seed) {
    SplitMix64 gen(seed);
    std::vector<double> phases(n);
    for (auto& p : phases) p = gen.uniform(0.0, 2.0 * std::numbers::pi);
    return phases;
}

} // namespace sap
