#pragma once

// Proportional-fair intra-cell scheduling. Maximizing sum log(alpha) over the
// time shares of one cell gives equal shares 1/|I(j)|.

#include <cmath>
#include <cstddef>
#include <vector>

#include "cellopt/metrics.hpp"

namespace cellopt {

inline Schedule pf_schedule(const Association& a) {
  a.validate();
  const auto n = a.loads();
  Schedule s{Table<double>(a.ue_count(), a.hpn_count, 0.0)};
  for (std::size_t i = 0; i < a.ue_count(); ++i) {
    const std::size_t j = a.assign[i];
    s.alpha(i, j) = 1.0 / static_cast<double>(n[j]);
  }
  return s;
}

// sum over served (i, j(i)) pairs of log alpha; -inf when a served UE gets no time.
inline double pf_schedule_objective(const Schedule& s, const Association& a) {
  double v = 0.0;
  for (std::size_t i = 0; i < a.ue_count(); ++i) v += std::log(s.alpha(i, a.assign.at(i)));
  return v;
}

// Stationarity -1/alpha_il + mu_l = 0 with mu_l != 0 forces the budget to be
// tight. A cell passes when a single multiplier fits every attached UE within
// tol and its shares sum to 1 within tol.
inline bool check_kkt(const Schedule& s, const Association& a, double tol = 1e-9) {
  a.validate();
  const std::size_t nh = a.hpn_count;
  std::vector<double> inv_min(nh, INFINITY), inv_max(nh, -INFINITY), share(nh, 0.0);
  for (std::size_t i = 0; i < a.ue_count(); ++i) {
    const std::size_t j = a.assign[i];
    const double alpha = s.alpha(i, j);
    if (!(alpha > 0.0) || alpha > 1.0 + tol) return false;
    const double inv = 1.0 / alpha;
    inv_min[j] = std::min(inv_min[j], inv);
    inv_max[j] = std::max(inv_max[j], inv);
    share[j] += alpha;
  }
  for (std::size_t j = 0; j < nh; ++j) {
    if (inv_min[j] == INFINITY) continue;  // empty cell
    // Best common multiplier is the midpoint of the spread.
    if ((inv_max[j] - inv_min[j]) / 2.0 > tol) return false;
    if (std::abs(share[j] - 1.0) > tol) return false;
  }
  return true;
}

}  // namespace cellopt
