#pragma once

// Centralized power control for a fixed association.
//
// In log-power coordinates x = log(pi) the surrogate utility
//   sum_j sum_{i in I(j)} sum_k [x_jk + log G_ijk - log(N0 + sum_{j' != j} exp(x_j'k) G_ij'k)]
//   - sum_j K n_j log n_j
// is concave, and the feasible set {x_jk >= log p_min, logsumexp_k x_jk <= log p_max}
// is convex. Two ascent methods are provided over that set:
//   * kBarrier: projected gradient on the box with a log barrier on the
//     per-HPN cap whose weight decays geometrically;
//   * kProjection: gradient projection onto the exact feasible set.
// Both use Armijo backtracking. The trace objective never decreases: the
// projection iterates ascend monotonically and the barrier method reports its
// best feasible iterate.
// HPNs without attached UEs carry no objective terms and are pinned at p_min.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cellopt/metrics.hpp"

namespace cellopt {

struct LogPower {
  Table<double> pi_hat;  // [HPN][RB], natural log of watts

  static LogPower from(const PowerAllocation& p) {
    LogPower lp{Table<double>(p.hpn_count(), p.rb_count())};
    for (std::size_t n = 0; n < p.power.data().size(); ++n)
      lp.pi_hat.data()[n] = std::log(p.power.data()[n]);
    return lp;
  }

  PowerAllocation to_power(PowerLimits limits) const {
    PowerAllocation p{Table<double>(pi_hat.rows(), pi_hat.cols()), limits};
    for (std::size_t n = 0; n < pi_hat.data().size(); ++n)
      p.power.data()[n] = std::exp(pi_hat.data()[n]);
    return p;
  }
};

enum class PowerMethod { kBarrier, kProjection };

inline const char* to_string(PowerMethod m) {
  return m == PowerMethod::kBarrier ? "barrier" : "projection";
}

struct SolverConfig {
  int max_iterations = 5000;
  double rel_tol = 1e-6;
  double barrier_init = 1.0;
  double barrier_decay = 0.5;
  double armijo = 1e-4;
  double shrink = 0.5;
  PowerMethod method = PowerMethod::kProjection;

  void validate() const {
    if (max_iterations <= 0) throw std::invalid_argument("power max_iterations must be positive");
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw std::invalid_argument("power rel_tol must lie in (0, 1)");
    if (!(barrier_init > 0.0)) throw std::invalid_argument("barrier_init must be positive");
    if (!(barrier_decay > 0.0 && barrier_decay < 1.0))
      throw std::invalid_argument("barrier_decay must lie in (0, 1)");
    if (!(armijo > 0.0 && armijo < 1.0)) throw std::invalid_argument("armijo must lie in (0, 1)");
    if (!(shrink > 0.0 && shrink < 1.0)) throw std::invalid_argument("shrink must lie in (0, 1)");
  }
};

enum class SolveStatus { kConverged, kIterationCapped };

inline const char* to_string(SolveStatus s) {
  return s == SolveStatus::kConverged ? "converged" : "iteration-capped";
}

struct PowerTraceRow {
  int iteration = 0;
  double objective = 0.0;
  double max_violation = 0.0;
  double step = 0.0;
};

struct PowerSolution {
  PowerAllocation power;
  SolveStatus status = SolveStatus::kConverged;
  int iterations = 0;
  std::vector<PowerTraceRow> trace;
};

namespace detail {

// Surrogate objective over linear powers with gradient in log coordinates.
class PowerObjective {
public:
  PowerObjective(const Association& a, const GainTensor& g, double noise_w)
      : a_(a), g_(g), noise_(noise_w), loads_(a.loads()) {
    a.validate();
    if (a.ue_count() != g.ue_count() || a.hpn_count != g.hpn_count())
      throw std::invalid_argument("association and gain tensor dimensions differ");
    for (std::size_t j = 0; j < loads_.size(); ++j) {
      const double n = static_cast<double>(loads_[j]);
      if (n > 0) penalty_ += static_cast<double>(g.rb_count()) * n * std::log(n);
    }
  }

  const std::vector<std::size_t>& loads() const { return loads_; }

  double value(const Table<double>& pw) const {
    const std::size_t nh = g_.hpn_count(), nk = g_.rb_count();
    double f = 0.0;
    for (std::size_t i = 0; i < a_.ue_count(); ++i) {
      const std::size_t s = a_.assign[i];
      for (std::size_t k = 0; k < nk; ++k) {
        double d = noise_;
        for (std::size_t j = 0; j < nh; ++j)
          if (j != s) d += pw(j, k) * g_(i, j, k);
        f += std::log(pw(s, k)) + std::log(g_(i, s, k)) - std::log(d);
      }
    }
    return f - penalty_;
  }

  // Returns the value; grad receives d f / d log(pi).
  double value_and_gradient(const Table<double>& pw, Table<double>& grad) const {
    const std::size_t nh = g_.hpn_count(), nk = g_.rb_count();
    grad = Table<double>(nh, nk, 0.0);
    double f = 0.0;
    for (std::size_t i = 0; i < a_.ue_count(); ++i) {
      const std::size_t s = a_.assign[i];
      for (std::size_t k = 0; k < nk; ++k) {
        double d = noise_;
        for (std::size_t j = 0; j < nh; ++j)
          if (j != s) d += pw(j, k) * g_(i, j, k);
        f += std::log(pw(s, k)) + std::log(g_(i, s, k)) - std::log(d);
        grad(s, k) += 1.0;
        for (std::size_t j = 0; j < nh; ++j)
          if (j != s) grad(j, k) -= pw(j, k) * g_(i, j, k) / d;
      }
    }
    return f - penalty_;
  }

private:
  const Association& a_;
  const GainTensor& g_;
  double noise_;
  std::vector<std::size_t> loads_;
  double penalty_ = 0.0;
};

inline double log_sum_exp(const double* x, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) m = std::max(m, x[k]);
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += std::exp(x[k] - m);
  return m + std::log(s);
}

// W(exp(a)) for the principal Lambert branch, valid for any real a.
inline double lambert_w_exp(double a) {
  if (a < -30.0) return std::exp(a);
  double w = a > 1.0 ? a - std::log(a) : std::exp(a) / (1.0 + std::exp(a)) + 0.1;
  for (int it = 0; it < 60; ++it) {
    // Newton on w + log w - a = 0.
    const double step = (w + std::log(w) - a) / (1.0 + 1.0 / w);
    double next = w - step;
    if (next <= 0.0) next = w / 2.0;
    if (std::abs(next - w) <= 1e-15 * (1.0 + w)) return next;
    w = next;
  }
  return w;
}

// Euclidean projection of y onto {x >= lo, logsumexp(x) <= cap}.
// Solves x_k = max(lo, z_k) with z_k + lambda exp(z_k) = y_k, lambda found by
// bisection in log space; the returned point is on the feasible side.
inline void project_log_simplex(double* y, std::size_t n, double lo, double cap) {
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) total += std::exp(std::max(y[k], lo));
  const double budget = std::exp(cap);
  if (total <= budget) {
    for (std::size_t k = 0; k < n; ++k) y[k] = std::max(y[k], lo);
    return;
  }
  auto point = [&](double log_lambda, std::size_t k) {
    const double z = y[k] - lambert_w_exp(log_lambda + y[k]);
    return std::max(lo, z);
  };
  auto mass = [&](double log_lambda) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += std::exp(point(log_lambda, k));
    return s;
  };
  double mlo = -800.0, mhi = 800.0;
  for (int it = 0; it < 200 && mhi - mlo > 1e-13; ++it) {
    const double mid = 0.5 * (mlo + mhi);
    (mass(mid) > budget ? mlo : mhi) = mid;
  }
  for (std::size_t k = 0; k < n; ++k) y[k] = point(mhi, k);
}

inline double dot(const Table<double>& a, const Table<double>& b) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.data().size(); ++n) s += a.data()[n] * b.data()[n];
  return s;
}

inline Table<double> exp_table(const Table<double>& x) {
  Table<double> y(x.rows(), x.cols());
  for (std::size_t n = 0; n < x.data().size(); ++n) y.data()[n] = std::exp(x.data()[n]);
  return y;
}

inline double rel_change(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace detail

inline double pc_objective(const LogPower& x, const Association& a, const GainTensor& g,
                           double noise_w) {
  return detail::PowerObjective(a, g, noise_w).value(detail::exp_table(x.pi_hat));
}

inline Table<double> pc_gradient(const LogPower& x, const Association& a, const GainTensor& g,
                                 double noise_w) {
  Table<double> grad;
  detail::PowerObjective(a, g, noise_w).value_and_gradient(detail::exp_table(x.pi_hat), grad);
  return grad;
}

namespace detail {

class PowerSolver {
public:
  PowerSolver(const Association& a, const GainTensor& g, double noise_w, PowerLimits limits,
              const SolverConfig& cfg)
      : obj_(a, g, noise_w), limits_(limits), cfg_(cfg), nh_(g.hpn_count()), nk_(g.rb_count()),
        lo_(std::log(limits.p_min_per_rb)), cap_(std::log(limits.p_max_per_hpn)) {
    for (std::size_t j = 0; j < nh_; ++j) active_.push_back(obj_.loads()[j] > 0);
  }

  PowerSolution solve(const PowerAllocation& init) {
    // Pin idle HPNs at the floor; this only lowers interference.
    PowerAllocation start = init;
    for (std::size_t j = 0; j < nh_; ++j)
      if (!active_[j])
        for (std::size_t k = 0; k < nk_; ++k) start.power(j, k) = limits_.p_min_per_rb;
    const double start_f = obj_.value(start.power);

    PowerSolution sol;
    const bool degenerate = static_cast<double>(nk_) * limits_.p_min_per_rb >=
                            limits_.p_max_per_hpn * (1.0 - 1e-12);
    if (degenerate) {
      sol.power = uniform_power(nh_, nk_, limits_);
      for (double& v : sol.power.power.data()) v = limits_.p_min_per_rb;
      sol.trace.push_back({0, obj_.value(sol.power.power), sol.power.max_violation(), 0.0});
      return sol;
    }

    Table<double> x = LogPower::from(start).pi_hat;
    if (cfg_.method == PowerMethod::kBarrier)
      barrier_ascent(x, sol);
    else
      projected_ascent(x, sol);

    sol.power = LogPower{x}.to_power(limits_);
    if (obj_.value(sol.power.power) < start_f) sol.power = start;
    return sol;
  }

private:
  double value_x(const Table<double>& x) const { return obj_.value(exp_table(x)); }

  void record(PowerSolution& sol, int it, const Table<double>& x, double f, double step) const {
    sol.trace.push_back({it, f, LogPower{x}.to_power(limits_).max_violation(), step});
  }

  double cap_slack(const Table<double>& x, std::size_t j) const {
    return cap_ - log_sum_exp(x.row(j), nk_);
  }

  // F_t(x) = f(x) + t sum_active log(cap - lse_j(x)); -inf outside the cap.
  double barrier_value(const Table<double>& x, double f, double t) const {
    double b = 0.0;
    for (std::size_t j = 0; j < nh_; ++j) {
      if (!active_[j]) continue;
      const double s = cap_slack(x, j);
      if (!(s > 0.0)) return -std::numeric_limits<double>::infinity();
      b += std::log(s);
    }
    return f + t * b;
  }

  void barrier_gradient(const Table<double>& x, double t, Table<double>& grad) const {
    for (std::size_t j = 0; j < nh_; ++j) {
      if (!active_[j]) {
        for (std::size_t k = 0; k < nk_; ++k) grad(j, k) = 0.0;
        continue;
      }
      const double lse = log_sum_exp(x.row(j), nk_);
      const double slack = cap_ - lse;
      for (std::size_t k = 0; k < nk_; ++k) grad(j, k) -= t * std::exp(x(j, k) - lse) / slack;
    }
  }

  void freeze_idle(Table<double>& d) const {
    for (std::size_t j = 0; j < nh_; ++j)
      if (!active_[j])
        for (std::size_t k = 0; k < nk_; ++k) d(j, k) = 0.0;
  }

  // Bound on a single move in log space: the feasible box is cap - lo wide.
  double max_move() const { return 2.0 * (cap_ - lo_) + 1.0; }

  static double bb_step(const Table<double>& dx, const Table<double>& dg, double fallback) {
    const double sy = -dot(dx, dg);
    if (sy > 0.0) return dot(dx, dx) / sy;
    return fallback;
  }

  void barrier_ascent(Table<double>& x, PowerSolution& sol) {
    // Pull the start strictly inside the cap.
    for (std::size_t j = 0; j < nh_; ++j) {
      if (!active_[j]) continue;
      for (std::size_t k = 0; k < nk_; ++k) x(j, k) = std::max(x(j, k), lo_);
      if (cap_slack(x, j) <= 1e-9) {
        for (std::size_t k = 0; k < nk_; ++k) {
          const double p = std::exp(x(j, k));
          const double pmin = limits_.p_min_per_rb;
          x(j, k) = std::log(pmin + (1.0 - 1e-3) * (p - pmin));
        }
      }
    }

    int it = 0;
    double f = value_x(x);
    // Barrier iterates may trade objective for slack; the trace and the
    // result follow the best feasible iterate.
    Table<double> best_x = x;
    double best_f = f;
    record(sol, it, x, f, 0.0);
    double t = cfg_.barrier_init;
    double step = 0.0;
    std::size_t n_active = std::count(active_.begin(), active_.end(), true);
    Table<double> grad(nh_, nk_), prev_x, prev_grad;

    while (it < cfg_.max_iterations) {
      const double round_start_f = f;
      prev_x = Table<double>();
      bool inner_done = false;
      while (!inner_done && it < cfg_.max_iterations) {
        f = obj_.value_and_gradient(exp_table(x), grad);
        barrier_gradient(x, t, grad);
        freeze_idle(grad);
        const double big_f = barrier_value(x, f, t);

        double gmax = 0.0;
        for (double v : grad.data()) gmax = std::max(gmax, std::abs(v));
        if (gmax == 0.0) break;
        double s = step > 0.0 ? step : 1.0 / gmax;
        if (!prev_x.data().empty()) {
          Table<double> dx = x, dg = grad;
          for (std::size_t n = 0; n < dx.data().size(); ++n) {
            dx.data()[n] -= prev_x.data()[n];
            dg.data()[n] -= prev_grad.data()[n];
          }
          s = bb_step(dx, dg, s * 2.0);
        }
        s = std::clamp(s, 1e-14, max_move() / gmax);

        bool accepted = false;
        Table<double> y(nh_, nk_);
        double fy = 0.0, big_fy = 0.0;
        for (int tries = 0; tries < 60; ++tries, s *= cfg_.shrink) {
          for (std::size_t n = 0; n < y.data().size(); ++n) y.data()[n] = x.data()[n] + s * grad.data()[n];
          for (std::size_t j = 0; j < nh_; ++j)
            for (std::size_t k = 0; k < nk_; ++k)
              y(j, k) = active_[j] ? std::max(y(j, k), lo_) : x(j, k);
          fy = value_x(y);
          big_fy = barrier_value(y, fy, t);
          Table<double> d = y;
          for (std::size_t n = 0; n < d.data().size(); ++n) d.data()[n] -= x.data()[n];
          if (big_fy >= big_f + cfg_.armijo * dot(grad, d)) {
            accepted = true;
            break;
          }
        }
        if (!accepted) break;

        prev_x = x;
        prev_grad = grad;
        x = y;
        ++it;
        step = s;
        if (fy > best_f) {
          best_f = fy;
          best_x = x;
        }
        record(sol, it, best_x, best_f, s);
        inner_done = rel_change(big_fy, big_f) < 1e-2 * cfg_.rel_tol;
        f = fy;
      }
      sol.iterations = it;
      const bool gap_small = static_cast<double>(n_active) * t <= cfg_.rel_tol * std::max(1.0, std::abs(f));
      if (gap_small && rel_change(f, round_start_f) < cfg_.rel_tol) {
        sol.status = SolveStatus::kConverged;
        x = best_x;
        return;
      }
      t *= cfg_.barrier_decay;
      step = 0.0;
    }
    sol.iterations = it;
    sol.status = SolveStatus::kIterationCapped;
    x = best_x;
  }

  void project(Table<double>& x) const {
    for (std::size_t j = 0; j < nh_; ++j) {
      if (!active_[j]) continue;
      project_log_simplex(x.row(j), nk_, lo_, cap_);
    }
  }

  void projected_ascent(Table<double>& x, PowerSolution& sol) {
    project(x);
    int it = 0;
    Table<double> grad(nh_, nk_), prev_x, prev_grad;
    double f = obj_.value_and_gradient(exp_table(x), grad);
    freeze_idle(grad);
    record(sol, it, x, f, 0.0);
    double step = 0.0;

    while (it < cfg_.max_iterations) {
      double gmax = 0.0;
      for (double v : grad.data()) gmax = std::max(gmax, std::abs(v));
      if (gmax == 0.0) break;
      double s = step > 0.0 ? step : 1.0 / gmax;
      if (!prev_x.data().empty()) {
        Table<double> dx = x, dg = grad;
        for (std::size_t n = 0; n < dx.data().size(); ++n) {
          dx.data()[n] -= prev_x.data()[n];
          dg.data()[n] -= prev_grad.data()[n];
        }
        s = bb_step(dx, dg, s * 2.0);
      }
      s = std::clamp(s, 1e-14, max_move() / gmax);

      bool accepted = false;
      Table<double> y(nh_, nk_);
      double fy = 0.0;
      for (int tries = 0; tries < 60; ++tries, s *= cfg_.shrink) {
        for (std::size_t n = 0; n < y.data().size(); ++n) y.data()[n] = x.data()[n] + s * grad.data()[n];
        project(y);
        Table<double> d = y;
        for (std::size_t n = 0; n < d.data().size(); ++n) d.data()[n] -= x.data()[n];
        fy = value_x(y);
        if (fy >= f + cfg_.armijo * dot(grad, d)) {
          accepted = true;
          break;
        }
      }
      if (!accepted) break;  // stationary to working precision

      prev_x = x;
      prev_grad = grad;
      x = y;
      ++it;
      step = s;
      Table<double> new_grad;
      const double f_new = obj_.value_and_gradient(exp_table(x), new_grad);
      freeze_idle(new_grad);
      grad = new_grad;
      record(sol, it, x, f_new, s);
      const bool done = rel_change(f_new, f) < cfg_.rel_tol;
      f = f_new;
      if (done) break;
    }
    sol.iterations = it;
    sol.status = it >= cfg_.max_iterations ? SolveStatus::kIterationCapped : SolveStatus::kConverged;
  }

  PowerObjective obj_;
  PowerLimits limits_;
  SolverConfig cfg_;
  std::size_t nh_, nk_;
  double lo_, cap_;
  std::vector<bool> active_;
};

}  // namespace detail

inline PowerSolution solve_power(const Association& a, const GainTensor& g, double noise_w,
                                 PowerLimits limits, const SolverConfig& cfg,
                                 const PowerAllocation& init) {
  cfg.validate();
  if (!limits.feasible_for(g.rb_count()))
    throw std::invalid_argument("infeasible power limits: " + std::to_string(g.rb_count()) +
                                " RBs x p_min exceeds p_max");
  if (init.hpn_count() != g.hpn_count() || init.rb_count() != g.rb_count())
    throw std::invalid_argument("initial power allocation has wrong dimensions");
  PowerAllocation start{init.power, limits};
  if (!start.feasible(1e-9)) throw std::invalid_argument("initial power allocation is infeasible");
  for (double& v : start.power.data()) v = std::max(v, limits.p_min_per_rb);
  return detail::PowerSolver(a, g, noise_w, limits, cfg).solve(start);
}

inline PowerSolution solve_power(const Association& a, const GainTensor& g, double noise_w,
                                 PowerLimits limits, const SolverConfig& cfg = {}) {
  return solve_power(a, g, noise_w, limits, cfg, uniform_power(g.hpn_count(), g.rb_count(), limits));
}

struct BruteForcePower {
  PowerAllocation power;
  double objective = 0.0;
};

// Exhaustive search on a per-RB log-spaced grid in [p_min, p_max], keeping
// per-HPN tuples that respect the cap. Idle HPNs stay at p_min. The
// objective is separable across RBs once every HPN's tuple is fixed, so it is
// tabulated per RB over the joint grid index of the active HPNs.
inline BruteForcePower brute_force_power(const Association& a, const GainTensor& g, double noise_w,
                                         PowerLimits limits, int grid_points) {
  a.validate();
  if (grid_points < 2) throw std::invalid_argument("grid needs at least 2 points");
  if (!limits.feasible_for(g.rb_count())) throw std::invalid_argument("infeasible power limits");
  const std::size_t nh = g.hpn_count(), nk = g.rb_count();
  const auto loads = a.loads();
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < nh; ++j)
    if (loads[j] > 0) active.push_back(j);

  const double gp = grid_points;
  double total = 1.0;
  for (std::size_t n = 0; n < active.size() * nk; ++n) {
    total *= gp;
    if (total > 1e7) throw std::invalid_argument("power grid exceeds 1e7 points");
  }

  std::vector<double> levels(grid_points);
  const double ratio = limits.p_max_per_hpn / limits.p_min_per_rb;
  for (int m = 0; m < grid_points; ++m)
    levels[m] = limits.p_min_per_rb * std::pow(ratio, m / (gp - 1.0));
  levels.back() = limits.p_max_per_hpn;

  // Feasible K-tuples of level indices for one HPN.
  std::vector<std::vector<int>> tuples;
  {
    std::vector<int> idx(nk, 0);
    while (true) {
      double sum = 0.0;
      for (int v : idx) sum += levels[v];
      if (sum <= limits.p_max_per_hpn * (1.0 + 1e-12)) tuples.push_back(idx);
      std::size_t pos = 0;
      while (pos < nk && ++idx[pos] == grid_points) idx[pos++] = 0;
      if (pos == nk) break;
    }
  }

  PowerAllocation p = uniform_power(nh, nk, limits);
  for (double& v : p.power.data()) v = limits.p_min_per_rb;

  // table[k][joint index over active HPN levels] = sum over UEs of log(SINR/n).
  const std::size_t na = active.size();
  std::size_t joint = 1;
  for (std::size_t n = 0; n < na; ++n) joint *= grid_points;
  std::vector<std::vector<double>> table(nk, std::vector<double>(joint, 0.0));
  for (std::size_t k = 0; k < nk; ++k) {
    for (std::size_t code = 0; code < joint; ++code) {
      std::size_t c = code;
      for (std::size_t n = 0; n < na; ++n) {
        p.power(active[n], k) = levels[c % grid_points];
        c /= grid_points;
      }
      double v = 0.0;
      for (std::size_t i = 0; i < a.ue_count(); ++i) {
        const std::size_t s = a.assign[i];
        v += std::log(sinr(g, p, noise_w, i, s, k) / static_cast<double>(loads[s]));
      }
      table[k][code] = v;
    }
    for (std::size_t n = 0; n < na; ++n) p.power(active[n], k) = limits.p_min_per_rb;
  }

  // Odometer over one feasible tuple per active HPN.
  std::vector<std::size_t> choice(na, 0);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_choice = choice;
  while (true) {
    double v = 0.0;
    for (std::size_t k = 0; k < nk; ++k) {
      std::size_t code = 0;
      for (std::size_t n = na; n-- > 0;) code = code * grid_points + tuples[choice[n]][k];
      v += table[k][code];
    }
    if (v > best) {
      best = v;
      best_choice = choice;
    }
    std::size_t pos = 0;
    while (pos < na && ++choice[pos] == tuples.size()) choice[pos++] = 0;
    if (pos == na) break;
  }

  for (std::size_t n = 0; n < na; ++n)
    for (std::size_t k = 0; k < nk; ++k) p.power(active[n], k) = levels[tuples[best_choice[n]][k]];
  if (na == 0) best = 0.0;
  return {p, best};
}

}  // namespace cellopt
