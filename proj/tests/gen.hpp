#pragma once

#include <cstdint>
#include <vector>

#include "hotype/common.hpp"

// Seeded generators for property tests. Each case gets its own stream so a
// failure names the case that reproduces it.
namespace gen {

inline hotype::Rng stream(std::uint64_t test, std::uint64_t trial) {
    return hotype::Rng(hotype::derive_seed(0x7e57, test, trial));
}

inline std::vector<double> uniform_vec(hotype::Rng& r, std::size_t n, double a, double b) {
    std::vector<double> v(n);
    for (auto& x : v) x = r.uniform(a, b);
    return v;
}

inline double log_uniform(hotype::Rng& r, double lo, double hi) {
    return lo * std::pow(hi / lo, r.uniform());
}

}  // namespace gen
