#pragma once

// Multi-cell downlink geometry: hexagonal HPN lattice, uniform UE drops and
// the (UE, HPN, RB) channel gain tensor.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cellopt {

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Topology {
  std::vector<Point> hpn_positions;
  double inter_site_distance = 0.0;
  std::size_t cell_count() const { return hpn_positions.size(); }
};

struct UeSet {
  std::vector<Point> positions;
  // Index of the cell whose region the UE was dropped into.
  std::vector<std::size_t> drop_cell;
  // Geometrically nearest HPN, lowest index on ties.
  std::vector<std::size_t> home_cell_hint;
  std::size_t size() const { return positions.size(); }
};

struct UeRange {
  int lo = 4;
  int hi = 14;
};

// Log-distance law L(d) = intercept + slope * log10(d_km), in dB.
struct PathLossModel {
  std::string name = "macro_urban";
  double intercept_db = 128.1;
  double slope_db = 37.6;

  double loss_db(double distance_m) const {
    return intercept_db + slope_db * std::log10(std::max(distance_m, kMinDistance) / 1000.0);
  }

  static constexpr double kMinDistance = 10.0;
};

inline PathLossModel named_pathloss(const std::string& name) {
  if (name == "macro_urban") return {"macro_urban", 128.1, 37.6};
  if (name == "macro_rural") return {"macro_rural", 95.5, 34.1};
  if (name == "log_distance") return {"log_distance", 128.1, 37.6};
  throw std::invalid_argument("unknown path-loss model '" + name +
                              "' (supported: macro_urban, macro_rural, log_distance)");
}

struct ChannelConfig {
  PathLossModel pathloss;
  double shadowing_sigma_db = 0.0;
  // i.i.d. exponential (Rayleigh power) multiplier per (UE, HPN, RB).
  bool rb_fading = false;
  double noise_dbm = -104.5;
  double noise_figure_db = 7.0;
  std::size_t rb_count = 25;

  double noise_watt() const { return dbm_to_watt(noise_dbm + noise_figure_db); }

  void validate() const {
    if (rb_count == 0) throw std::invalid_argument("rb_count must be positive");
    if (!std::isfinite(noise_dbm) || !std::isfinite(noise_figure_db))
      throw std::invalid_argument("noise terms must be finite");
    if (!(shadowing_sigma_db >= 0.0) || !std::isfinite(shadowing_sigma_db))
      throw std::invalid_argument("shadowing_sigma_db must be finite and >= 0");
  }
};

// Linear channel power gains G[i][j][k].
class GainTensor {
public:
  GainTensor() = default;
  GainTensor(std::size_t ues, std::size_t hpns, std::size_t rbs, double fill = 1.0)
      : ues_(ues), hpns_(hpns), rbs_(rbs), g_(ues * hpns * rbs, fill) {}
  GainTensor(std::size_t ues, std::size_t hpns, std::size_t rbs, std::vector<double> values)
      : ues_(ues), hpns_(hpns), rbs_(rbs), g_(std::move(values)) {
    if (g_.size() != ues * hpns * rbs) throw std::invalid_argument("gain tensor size mismatch");
    validate();
  }

  std::size_t ue_count() const { return ues_; }
  std::size_t hpn_count() const { return hpns_; }
  std::size_t rb_count() const { return rbs_; }

  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return g_[(i * hpns_ + j) * rbs_ + k];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return g_[(i * hpns_ + j) * rbs_ + k];
  }

  const std::vector<double>& values() const { return g_; }

  void validate() const {
    for (double g : g_)
      if (!(g > 0.0) || !std::isfinite(g))
        throw std::invalid_argument("channel gains must be strictly positive and finite");
  }

  bool frequency_flat() const {
    for (std::size_t i = 0; i < ues_; ++i)
      for (std::size_t j = 0; j < hpns_; ++j)
        for (std::size_t k = 1; k < rbs_; ++k)
          if ((*this)(i, j, k) != (*this)(i, j, 0)) return false;
    return true;
  }

private:
  std::size_t ues_ = 0;
  std::size_t hpns_ = 0;
  std::size_t rbs_ = 0;
  std::vector<double> g_;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent generator per purpose so that toggling one random effect does
// not shift the draws of another.
inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t purpose) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(purpose)));
}

inline double open_unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
}

// Unit hexagon test for a lattice whose neighbours sit at 0, 60, 120... deg.
inline bool in_hexagon(Point p, Point center, double apothem) {
  const double dx = p.x - center.x;
  const double dy = p.y - center.y;
  const double s = std::numbers::sqrt3 / 2.0;
  const double tol = apothem * 1e-12;
  return std::abs(dx) <= apothem + tol && std::abs(0.5 * dx + s * dy) <= apothem + tol &&
         std::abs(-0.5 * dx + s * dy) <= apothem + tol;
}

}  // namespace detail

inline Topology build_hex_topology(std::size_t cell_count, double isd) {
  if (!(isd > 0.0) || !std::isfinite(isd))
    throw std::invalid_argument("inter-site distance must be positive");

  Topology topo;
  topo.inter_site_distance = isd;
  const double h = std::numbers::sqrt3 / 2.0;

  if (cell_count == 9) {
    // Three offset rows of three sites.
    for (int r = -1; r <= 1; ++r)
      for (int c = -1; c <= 1; ++c) {
        const double shift = (r != 0) ? 0.5 : 0.0;
        topo.hpn_positions.push_back({isd * (c + shift - 1.0 / 3.0), isd * h * r});
      }
    return topo;
  }

  int rings = 0;
  switch (cell_count) {
    case 1: rings = 0; break;
    case 7: rings = 1; break;
    case 19: rings = 2; break;
    default:
      throw std::invalid_argument("unsupported cell_count " + std::to_string(cell_count) +
                                  " (supported layouts: 1, 7, 9, 19)");
  }

  struct Site {
    int ring;
    double angle;
    Point p;
  };
  std::vector<Site> sites;
  for (int q = -rings; q <= rings; ++q)
    for (int r = -rings; r <= rings; ++r) {
      const int ring = std::max({std::abs(q), std::abs(r), std::abs(q + r)});
      if (ring > rings) continue;
      Point p{isd * (q + 0.5 * r), isd * h * r};
      double a = std::atan2(p.y, p.x);
      if (a < -1e-12) a += 2.0 * std::numbers::pi;
      sites.push_back({ring, ring == 0 ? 0.0 : std::max(a, 0.0), p});
    }
  std::sort(sites.begin(), sites.end(), [](const Site& a, const Site& b) {
    return a.ring != b.ring ? a.ring < b.ring : a.angle < b.angle;
  });
  for (const auto& s : sites) topo.hpn_positions.push_back(s.p);
  return topo;
}

inline std::size_t nearest_hpn(const Topology& topo, Point p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < topo.cell_count(); ++j) {
    const double d = distance(p, topo.hpn_positions[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

inline UeSet drop_ues(const Topology& topo, UeRange per_cell, std::uint64_t seed) {
  if (per_cell.lo > per_cell.hi) throw std::invalid_argument("empty UE-per-cell range");
  if (per_cell.lo < 1 || per_cell.hi > 64)
    throw std::invalid_argument("UE-per-cell range must lie within [1, 64]");

  auto rng = detail::stream(seed, 0x75e5);
  std::uniform_int_distribution<int> count_dist(per_cell.lo, per_cell.hi);
  const double apothem = topo.inter_site_distance / 2.0;
  const double half_h = topo.inter_site_distance / std::numbers::sqrt3;

  UeSet ues;
  for (std::size_t c = 0; c < topo.cell_count(); ++c) {
    const Point center = topo.hpn_positions[c];
    const int n = count_dist(rng);
    for (int u = 0; u < n; ++u) {
      Point p;
      do {
        p.x = center.x + (2.0 * detail::open_unit(rng) - 1.0) * apothem;
        p.y = center.y + (2.0 * detail::open_unit(rng) - 1.0) * half_h;
      } while (!detail::in_hexagon(p, center, apothem));
      ues.positions.push_back(p);
      ues.drop_cell.push_back(c);
      ues.home_cell_hint.push_back(nearest_hpn(topo, p));
    }
  }
  return ues;
}

inline GainTensor compute_gains(const Topology& topo, const UeSet& ues, const ChannelConfig& cfg,
                                std::uint64_t seed) {
  cfg.validate();
  const std::size_t nu = ues.size();
  const std::size_t nh = topo.cell_count();
  const std::size_t nk = cfg.rb_count;

  auto shadow_rng = detail::stream(seed, 0x5ad0);
  auto fading_rng = detail::stream(seed, 0xfad1);
  std::normal_distribution<double> normal(0.0, 1.0);

  GainTensor g(nu, nh, nk);
  for (std::size_t i = 0; i < nu; ++i)
    for (std::size_t j = 0; j < nh; ++j) {
      const double d = distance(ues.positions[i], topo.hpn_positions[j]);
      const double z = normal(shadow_rng);
      const double shadow_db = cfg.shadowing_sigma_db > 0.0 ? cfg.shadowing_sigma_db * z : 0.0;
      const double base = std::pow(10.0, -(cfg.pathloss.loss_db(d) - shadow_db) / 10.0);
      for (std::size_t k = 0; k < nk; ++k) {
        double fade = 1.0;
        if (cfg.rb_fading) fade = -std::log(detail::open_unit(fading_rng));
        g(i, j, k) = base * fade;
      }
    }
  g.validate();
  return g;
}

}  // namespace cellopt
