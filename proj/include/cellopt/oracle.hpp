#pragma once

// Exhaustive joint baseline for tiny instances.

#include <cstddef>
#include <limits>
#include <vector>

#include "cellopt/metrics.hpp"
#include "cellopt/powerctl.hpp"
#include "cellopt/scenario.hpp"

namespace cellopt {

struct JointOptimum {
  Association assoc;
  PowerAllocation power;
  double u_bar = -std::numeric_limits<double>::infinity();
};

// Every binary association, each with the grid-optimal power.
inline JointOptimum joint_brute_force(const Scenario& sc, int grid_points) {
  JointOptimum best;
  Association a{std::vector<std::size_t>(sc.ue_count(), 0), sc.hpn_count()};
  while (true) {
    auto bf = brute_force_power(a, sc.gains, sc.noise_w, sc.limits, grid_points);
    if (bf.objective > best.u_bar) best = {a, bf.power, bf.objective};
    std::size_t pos = 0;
    while (pos < a.ue_count() && ++a.assign[pos] == sc.hpn_count()) a.assign[pos++] = 0;
    if (pos == a.ue_count()) break;
  }
  return best;
}

}  // namespace cellopt
