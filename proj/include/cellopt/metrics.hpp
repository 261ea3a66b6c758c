#pragma once

// SINR, per-UE mean rates, the proportional-fair utility and the surrogate
// sum-of-log-SINR utility shared by the power and association solvers.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cellopt/netmodel.hpp"
#include "cellopt/table.hpp"

namespace cellopt {

struct PowerLimits {
  double p_max_per_hpn = dbm_to_watt(43.0);
  double p_min_per_rb = dbm_to_watt(15.0);

  bool feasible_for(std::size_t rbs) const {
    return p_min_per_rb > 0.0 && static_cast<double>(rbs) * p_min_per_rb <= p_max_per_hpn;
  }
};

struct PowerAllocation {
  Table<double> power;  // [HPN][RB], watts
  PowerLimits limits;

  std::size_t hpn_count() const { return power.rows(); }
  std::size_t rb_count() const { return power.cols(); }

  // Largest violation of the per-RB floor or the per-HPN cap, relative to the
  // corresponding limit. Zero when feasible.
  double max_violation() const {
    double worst = 0.0;
    for (std::size_t j = 0; j < hpn_count(); ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < rb_count(); ++k) {
        sum += power(j, k);
        worst = std::max(worst, (limits.p_min_per_rb - power(j, k)) / limits.p_min_per_rb);
      }
      worst = std::max(worst, (sum - limits.p_max_per_hpn) / limits.p_max_per_hpn);
    }
    return worst;
  }

  bool feasible(double rel_slack = 1e-9) const { return max_violation() <= rel_slack; }
};

inline PowerAllocation uniform_power(std::size_t hpns, std::size_t rbs, PowerLimits limits) {
  return {Table<double>(hpns, rbs, limits.p_max_per_hpn / static_cast<double>(rbs)), limits};
}

struct Association {
  static constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();

  std::vector<std::size_t> assign;  // serving HPN per UE
  std::size_t hpn_count = 0;

  std::size_t ue_count() const { return assign.size(); }

  std::vector<std::size_t> loads() const {
    std::vector<std::size_t> n(hpn_count, 0);
    for (std::size_t j : assign)
      if (j < hpn_count) ++n[j];
    return n;
  }

  void validate() const {
    for (std::size_t i = 0; i < assign.size(); ++i)
      if (assign[i] >= hpn_count)
        throw std::invalid_argument("UE " + std::to_string(i) + " is not associated to any HPN");
  }

  bool operator==(const Association&) const = default;
};

struct FractionalAssociation {
  Table<double> theta;  // [UE][HPN], rows on the probability simplex

  std::vector<double> loads() const {
    std::vector<double> n(theta.cols(), 0.0);
    for (std::size_t i = 0; i < theta.rows(); ++i)
      for (std::size_t j = 0; j < theta.cols(); ++j) n[j] += theta(i, j);
    return n;
  }

  bool valid(double tol = 1e-9) const {
    for (std::size_t i = 0; i < theta.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < theta.cols(); ++j) {
        const double t = theta(i, j);
        if (t < -tol || t > 1.0 + tol) return false;
        s += t;
      }
      if (std::abs(s - 1.0) > tol) return false;
    }
    return true;
  }

  static FractionalAssociation from(const Association& a) {
    FractionalAssociation f{Table<double>(a.ue_count(), a.hpn_count, 0.0)};
    for (std::size_t i = 0; i < a.ue_count(); ++i) f.theta(i, a.assign[i]) = 1.0;
    return f;
  }
};

struct Schedule {
  Table<double> alpha;  // [UE][HPN] time shares
};

// Rate mapping f(SINR). Only the identity mapping ships.
struct IdentityRate {
  double operator()(double sinr) const { return sinr; }
};

inline double sinr(const GainTensor& g, const PowerAllocation& p, double noise_w, std::size_t i,
                   std::size_t j, std::size_t k) {
  double interference = 0.0;
  for (std::size_t jj = 0; jj < g.hpn_count(); ++jj)
    if (jj != j) interference += p.power(jj, k) * g(i, jj, k);
  return p.power(j, k) * g(i, j, k) / (noise_w + interference);
}

// w[i][j] = sum_k log SINR_ijk, for every (UE, candidate HPN) pair.
inline Table<double> log_sinr_sums(const GainTensor& g, const PowerAllocation& p, double noise_w) {
  const std::size_t nu = g.ue_count(), nh = g.hpn_count(), nk = g.rb_count();
  Table<double> w(nu, nh, 0.0);
  std::vector<double> rx(nh);
  for (std::size_t i = 0; i < nu; ++i)
    for (std::size_t k = 0; k < nk; ++k) {
      for (std::size_t j = 0; j < nh; ++j) rx[j] = p.power(j, k) * g(i, j, k);
      for (std::size_t j = 0; j < nh; ++j) {
        double interference = 0.0;
        for (std::size_t jj = 0; jj < nh; ++jj)
          if (jj != j) interference += rx[jj];
        w(i, j) += std::log(rx[j] / (noise_w + interference));
      }
    }
  return w;
}

template <typename Rate = IdentityRate>
double mean_rate(const Association& a, const Schedule& s, const GainTensor& g,
                 const PowerAllocation& p, double noise_w, std::size_t i, Rate rate = {}) {
  const std::size_t j = a.assign.at(i);
  if (j >= a.hpn_count)
    throw std::invalid_argument("UE " + std::to_string(i) + " is not associated to any HPN");
  double sum = 0.0;
  for (std::size_t k = 0; k < g.rb_count(); ++k) sum += rate(sinr(g, p, noise_w, i, j, k));
  return s.alpha(i, j) * sum;
}

template <typename Rate = IdentityRate>
std::vector<double> mean_rates(const Association& a, const Schedule& s, const GainTensor& g,
                               const PowerAllocation& p, double noise_w, Rate rate = {}) {
  std::vector<double> r(a.ue_count());
  for (std::size_t i = 0; i < a.ue_count(); ++i) r[i] = mean_rate(a, s, g, p, noise_w, i, rate);
  return r;
}

// sum_i log r_i, evaluated directly from the per-UE mean rates.
inline double utility_pf(const Association& a, const Schedule& s, const GainTensor& g,
                         const PowerAllocation& p, double noise_w) {
  double u = 0.0;
  for (std::size_t i = 0; i < a.ue_count(); ++i) {
    const double r = mean_rate(a, s, g, p, noise_w, i);
    if (!(r > 0.0))
      throw std::domain_error("UE " + std::to_string(i) + " has zero mean rate; log undefined");
    u += std::log(r);
  }
  return u;
}

// Same utility split into the scheduling term sum theta log alpha plus the
// rate term sum theta log r_ij.
inline double utility_pf_decomposed(const Association& a, const Schedule& s, const GainTensor& g,
                                    const PowerAllocation& p, double noise_w) {
  double sched_term = 0.0;
  double rate_term = 0.0;
  for (std::size_t i = 0; i < a.ue_count(); ++i) {
    const std::size_t j = a.assign.at(i);
    if (j >= a.hpn_count)
      throw std::invalid_argument("UE " + std::to_string(i) + " is not associated to any HPN");
    double r_ij = 0.0;
    for (std::size_t k = 0; k < g.rb_count(); ++k) r_ij += sinr(g, p, noise_w, i, j, k);
    if (!(r_ij > 0.0) || !(s.alpha(i, j) > 0.0))
      throw std::domain_error("UE " + std::to_string(i) + " has zero mean rate; log undefined");
    sched_term += std::log(s.alpha(i, j));
    rate_term += std::log(r_ij);
  }
  return sched_term + rate_term;
}

// U-bar = sum_i sum_k log(SINR_{i,j(i),k} / n_{j(i)}); empty cells contribute nothing.
inline double surrogate_utility(const Association& a, const GainTensor& g, const PowerAllocation& p,
                                double noise_w) {
  a.validate();
  const auto n = a.loads();
  double u = 0.0;
  for (std::size_t i = 0; i < a.ue_count(); ++i) {
    const std::size_t j = a.assign[i];
    const double log_n = std::log(static_cast<double>(n[j]));
    for (std::size_t k = 0; k < g.rb_count(); ++k) u += std::log(sinr(g, p, noise_w, i, j, k)) - log_n;
  }
  return u;
}

// Jain's fairness index (sum r)^2 / (n sum r^2).
inline double jain_index(const std::vector<double>& r) {
  if (r.empty()) return 0.0;
  double s = 0.0, s2 = 0.0;
  for (double x : r) {
    s += x;
    s2 += x * x;
  }
  return s2 > 0.0 ? s * s / (static_cast<double>(r.size()) * s2) : 0.0;
}

}  // namespace cellopt
