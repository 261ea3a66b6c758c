#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "cellopt/metrics.hpp"
#include "cellopt/netmodel.hpp"

namespace cellopt {

struct ScenarioConfig {
  std::size_t cell_count = 9;
  double isd_m = 500.0;
  UeRange ues_per_cell{4, 14};
  ChannelConfig channel;
  PowerLimits limits;
};

struct Scenario {
  Topology topology;
  UeSet ues;
  GainTensor gains;
  double noise_w = 0.0;
  PowerLimits limits;

  std::size_t ue_count() const { return gains.ue_count(); }
  std::size_t hpn_count() const { return gains.hpn_count(); }
  std::size_t rb_count() const { return gains.rb_count(); }
};

inline Scenario make_scenario(const ScenarioConfig& cfg, std::uint64_t seed) {
  if (!cfg.limits.feasible_for(cfg.channel.rb_count))
    throw std::invalid_argument("infeasible power limits: rb_count x p_min exceeds p_max");
  Scenario sc;
  sc.topology = build_hex_topology(cfg.cell_count, cfg.isd_m);
  sc.ues = drop_ues(sc.topology, cfg.ues_per_cell, seed);
  sc.gains = compute_gains(sc.topology, sc.ues, cfg.channel, seed);
  sc.noise_w = cfg.channel.noise_watt();
  sc.limits = cfg.limits;
  return sc;
}

// Small instances for the exhaustive oracles: `hpns` sites on a line spaced
// isd apart, UEs uniform over the box around them, per-RB fading on.
inline Scenario make_line_scenario(std::size_t hpns, std::size_t rbs, std::size_t ues,
                                   std::uint64_t seed, double isd = 500.0) {
  if (hpns == 0 || rbs == 0) throw std::invalid_argument("need at least one HPN and one RB");
  Scenario sc;
  sc.topology.inter_site_distance = isd;
  for (std::size_t j = 0; j < hpns; ++j)
    sc.topology.hpn_positions.push_back({isd * static_cast<double>(j), 0.0});
  auto rng = detail::stream(seed, 0x11e);
  const double x_hi = isd * static_cast<double>(hpns - 1) + isd / 2.0;
  for (std::size_t i = 0; i < ues; ++i) {
    Point p{-isd / 2.0 + detail::open_unit(rng) * (x_hi + isd / 2.0),
            (2.0 * detail::open_unit(rng) - 1.0) * isd / 2.0};
    sc.ues.positions.push_back(p);
    sc.ues.drop_cell.push_back(nearest_hpn(sc.topology, p));
    sc.ues.home_cell_hint.push_back(nearest_hpn(sc.topology, p));
  }
  ChannelConfig ch;
  ch.rb_count = rbs;
  ch.rb_fading = true;
  sc.gains = compute_gains(sc.topology, sc.ues, ch, seed);
  sc.noise_w = ch.noise_watt();
  return sc;
}

}  // namespace cellopt
