#pragma once

#include "hotype/harness.hpp"

namespace hotype::harness::detail {

// Independent units plus an optional step that derives cross-unit criteria
// from the assembled output.
struct Plan {
    std::vector<WorkUnit> units;
    std::function<void(UnitOutput&)> finish;
};

Plan space_cert_units(const Config& cfg, const DiscreteSpace& space);
Plan norms_units(const Config& cfg, const DiscreteSpace& space);
Plan atoms_units(const Config& cfg, const DiscreteSpace& space);
Plan duality_units(const Config& cfg, const DiscreteSpace& space);
Plan kernel_cert_units(const Config& cfg, const DiscreteSpace& space);
Plan hp_bound_units(const Config& cfg, const DiscreteSpace& space);
Plan commutator_units(const Config& cfg, const DiscreteSpace& space);
Plan toeplitz_units(const Config& cfg, const DiscreteSpace& space);
Plan compactness_units(const Config& cfg, const DiscreteSpace& space);
Plan szego_units(const Config& cfg, const DiscreteSpace& space);

/// Seed of a named unit; independent of the order suites or units run in.
std::uint64_t unit_seed(const Config& cfg, const std::string& unit);

}  // namespace hotype::harness::detail
