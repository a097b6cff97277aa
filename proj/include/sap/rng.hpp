#pragma once

// Portable, seedable generator (splitmix64). Used instead of <random>
// distributions so phase-averaged results reproduce bit-for-bit across
// platforms and standard-library implementations.

#include <cstdint>
#include <vector>

namespace sap {

class SplitMix64 {
  public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  private:
    uint64_t state_;
};

// n i.i.d. phases uniform in [0, 2*pi).
std::vector<double> random_phases(int n, uint64_t seed);

} // namespace sap
