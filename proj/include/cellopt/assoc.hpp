#pragma once

// UE association for fixed power.
//
// Both schemes work from the per-pair score w_ij = sum_k log SINR_ijk. With
// loads n_j the association objective is
//   sum_ij theta_ij w_ij - K sum_j n_j log n_j,
// which is concave in fractional theta. The network-centric scheme maximizes
// the relaxation over row-stochastic theta and rounds; the user-centric scheme
// plays a two-strategy crowding game by round-robin best responses.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cellopt/metrics.hpp"
#include "cellopt/powerctl.hpp"

namespace cellopt {

// Score table plus the RB count that weights the load penalty.
struct AssocScores {
  Table<double> w;  // [UE][HPN]
  std::size_t rb_count = 1;

  std::size_t ue_count() const { return w.rows(); }
  std::size_t hpn_count() const { return w.cols(); }

  static AssocScores from(const GainTensor& g, const PowerAllocation& p, double noise_w) {
    return {log_sinr_sums(g, p, noise_w), g.rb_count()};
  }
};

namespace detail {
inline double xlogx(double n) { return n > 0.0 ? n * std::log(n) : 0.0; }
}  // namespace detail

inline double assoc_objective(const FractionalAssociation& f, const AssocScores& s) {
  const auto n = f.loads();
  double v = 0.0;
  for (std::size_t i = 0; i < s.ue_count(); ++i)
    for (std::size_t j = 0; j < s.hpn_count(); ++j)
      if (f.theta(i, j) != 0.0) v += f.theta(i, j) * s.w(i, j);
  double pen = 0.0;
  for (double nj : n) pen += detail::xlogx(nj);
  return v - static_cast<double>(s.rb_count) * pen;
}

inline double assoc_objective(const Association& a, const AssocScores& s) {
  a.validate();
  const auto n = a.loads();
  double v = 0.0;
  for (std::size_t i = 0; i < a.ue_count(); ++i) v += s.w(i, a.assign[i]);
  double pen = 0.0;
  for (std::size_t nj : n) pen += detail::xlogx(static_cast<double>(nj));
  return v - static_cast<double>(s.rb_count) * pen;
}

inline double assoc_objective(const FractionalAssociation& f, const GainTensor& g,
                              const PowerAllocation& p, double noise_w) {
  return assoc_objective(f, AssocScores::from(g, p, noise_w));
}

inline double assoc_objective(const Association& a, const GainTensor& g, const PowerAllocation& p,
                              double noise_w) {
  return assoc_objective(a, AssocScores::from(g, p, noise_w));
}

// Euclidean projection of v onto the probability simplex (sort-based).
inline void project_simplex(double* v, std::size_t n) {
  std::vector<double> u(v, v + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    cum += u[r];
    const double t = (cum - 1.0) / static_cast<double>(r + 1);
    if (u[r] - t > 0.0) tau = t;
  }
  for (std::size_t k = 0; k < n; ++k) v[k] = std::max(v[k] - tau, 0.0);
}

struct RelaxedConfig {
  double rel_tol = 1e-8;
  int max_iterations = 20000;
  double armijo = 1e-4;
  double shrink = 0.5;
};

struct RelaxedResult {
  FractionalAssociation theta;
  double objective = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::kConverged;
};

inline RelaxedResult solve_relaxed_assoc(const AssocScores& s, const RelaxedConfig& cfg = {}) {
  const std::size_t nu = s.ue_count(), nh = s.hpn_count();
  const double kk = static_cast<double>(s.rb_count);
  RelaxedResult res;
  res.theta.theta = Table<double>(nu, nh, 1.0 / static_cast<double>(nh));
  if (nu == 0 || nh == 0) return res;

  auto gradient = [&](const FractionalAssociation& f, Table<double>& grad) {
    const auto n = f.loads();
    grad = Table<double>(nu, nh);
    for (std::size_t j = 0; j < nh; ++j) {
      // d/dn (n log n) = log n + 1, unbounded below at n = 0.
      const double dpen = kk * (std::log(std::max(n[j], 1e-300)) + 1.0);
      for (std::size_t i = 0; i < nu; ++i) grad(i, j) = s.w(i, j) - dpen;
    }
  };

  Table<double> grad, prev_grad;
  Table<double> prev_x;
  gradient(res.theta, grad);
  double f = assoc_objective(res.theta, s);
  double step = 0.0;
  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    double s_try = step > 0.0 ? step : 1.0 / std::max(1.0, kk);
    if (!prev_x.data().empty()) {
      double sy = 0.0, ss = 0.0;
      for (std::size_t n = 0; n < grad.data().size(); ++n) {
        const double dx = res.theta.theta.data()[n] - prev_x.data()[n];
        const double dg = grad.data()[n] - prev_grad.data()[n];
        sy -= dx * dg;
        ss += dx * dx;
      }
      s_try = sy > 0.0 ? ss / sy : s_try * 2.0;
    }
    s_try = std::clamp(s_try, 1e-16, 1e16);

    FractionalAssociation y{Table<double>(nu, nh)};
    double fy = 0.0;
    bool accepted = false;
    for (int tries = 0; tries < 80; ++tries, s_try *= cfg.shrink) {
      double ascent = 0.0;
      for (std::size_t i = 0; i < nu; ++i) {
        for (std::size_t j = 0; j < nh; ++j) y.theta(i, j) = res.theta.theta(i, j) + s_try * grad(i, j);
        project_simplex(y.theta.row(i), nh);
        for (std::size_t j = 0; j < nh; ++j) ascent += grad(i, j) * (y.theta(i, j) - res.theta.theta(i, j));
      }
      fy = assoc_objective(y, s);
      if (fy >= f + cfg.armijo * ascent && ascent > 0.0) {
        accepted = true;
        break;
      }
      if (ascent <= 0.0) break;
    }
    if (!accepted) break;

    prev_x = res.theta.theta;
    prev_grad = grad;
    res.theta = std::move(y);
    gradient(res.theta, grad);
    step = s_try;
    const double change = std::abs(fy - f) / std::max(1.0, std::abs(f));
    f = fy;
    if (change < cfg.rel_tol) {
      ++it;
      break;
    }
  }
  res.iterations = it;
  res.objective = f;
  res.status = it >= cfg.max_iterations ? SolveStatus::kIterationCapped : SolveStatus::kConverged;
  return res;
}

inline RelaxedResult solve_relaxed_assoc(const GainTensor& g, const PowerAllocation& p, double noise_w,
                                         const RelaxedConfig& cfg = {}) {
  return solve_relaxed_assoc(AssocScores::from(g, p, noise_w), cfg);
}

// Argmax per row, lowest HPN index on ties.
inline Association round_assoc(const FractionalAssociation& f) {
  Association a{std::vector<std::size_t>(f.theta.rows(), 0), f.theta.cols()};
  for (std::size_t i = 0; i < f.theta.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < f.theta.cols(); ++j)
      if (f.theta(i, j) > f.theta(i, best)) best = j;
    a.assign[i] = best;
  }
  return a;
}

struct BruteForceAssoc {
  Association assoc;
  double objective = 0.0;
};

// Exhaustive search in lexicographic order (UE 0 most significant); the first
// maximizer wins.
inline BruteForceAssoc brute_force_assoc(const AssocScores& s) {
  const std::size_t nu = s.ue_count(), nh = s.hpn_count();
  double total = 1.0;
  for (std::size_t i = 0; i < nu; ++i) {
    total *= static_cast<double>(nh);
    if (total > 1e7)
      throw std::invalid_argument("association search space " + std::to_string(nh) + "^" +
                                  std::to_string(nu) + " exceeds 1e7");
  }
  Association cur{std::vector<std::size_t>(nu, 0), nh};
  BruteForceAssoc best{cur, -std::numeric_limits<double>::infinity()};
  while (true) {
    const double v = assoc_objective(cur, s);
    if (v > best.objective) best = {cur, v};
    std::size_t pos = nu;
    while (pos > 0 && ++cur.assign[pos - 1] == nh) cur.assign[--pos] = 0;
    if (pos == 0) break;
  }
  return best;
}

inline BruteForceAssoc brute_force_assoc(const GainTensor& g, const PowerAllocation& p, double noise_w) {
  return brute_force_assoc(AssocScores::from(g, p, noise_w));
}

// ---------------------------------------------------------------------------
// User-centric crowding game

using CandidatePair = std::pair<std::size_t, std::size_t>;

// Two highest-scoring HPNs per UE, lower index first among equals.
inline std::vector<CandidatePair> pick_candidates(const AssocScores& s) {
  std::vector<CandidatePair> out(s.ue_count());
  for (std::size_t i = 0; i < s.ue_count(); ++i) {
    std::size_t first = 0;
    for (std::size_t j = 1; j < s.hpn_count(); ++j)
      if (s.w(i, j) > s.w(i, first)) first = j;
    std::size_t second = first;
    for (std::size_t j = 0; j < s.hpn_count(); ++j) {
      if (j == first) continue;
      if (second == first || s.w(i, j) > s.w(i, second)) second = j;
    }
    out[i] = {first, second};
  }
  return out;
}

inline std::vector<CandidatePair> pick_candidates(const GainTensor& g, const PowerAllocation& p,
                                                  double noise_w) {
  return pick_candidates(AssocScores::from(g, p, noise_w));
}

enum class BrRule { kSinrProduct, kUtilityConsistent };

inline const char* to_string(BrRule r) {
  return r == BrRule::kSinrProduct ? "sinr_product" : "utility_consistent";
}

struct SwitchEvent {
  std::size_t ue = 0;
  std::size_t from = 0;
  std::size_t to = 0;
  int round = 0;
};

struct GameState {
  Association assignment;
  std::vector<CandidatePair> candidates;
  int round = 0;
  std::vector<SwitchEvent> switches;

  void validate() const {
    assignment.validate();
    if (candidates.size() != assignment.ue_count())
      throw std::invalid_argument("one candidate pair per UE required");
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto [a, b] = candidates[i];
      if (assignment.assign[i] != a && assignment.assign[i] != b)
        throw std::invalid_argument("UE " + std::to_string(i) + " is not on one of its candidates");
    }
  }
};

// Every UE starts on its better candidate, as if the network were empty.
inline GameState initial_game_state(std::vector<CandidatePair> candidates, std::size_t hpn_count) {
  GameState st;
  st.assignment.hpn_count = hpn_count;
  for (const auto& c : candidates) st.assignment.assign.push_back(c.first);
  st.candidates = std::move(candidates);
  return st;
}

// Payoff of UE i on HPN j when `others` other UEs share j. Under kSinrProduct the
// load enters once (the product-of-SINR comparison); under kUtilityConsistent
// it enters once per RB, which is exactly the per-UE surrogate utility.
inline double br_payoff(const AssocScores& s, BrRule rule, std::size_t i, std::size_t j,
                        std::size_t others) {
  const double e = rule == BrRule::kSinrProduct ? 1.0 : static_cast<double>(s.rb_count);
  return s.w(i, j) - e * std::log(1.0 + static_cast<double>(others));
}

// Per-UE surrogate utility sum_k log(SINR_ijk / (1 + others on j)).
inline double ue_utility(const Association& a, const AssocScores& s, std::size_t i) {
  const auto n = a.loads();
  const std::size_t j = a.assign.at(i);
  return br_payoff(s, BrRule::kUtilityConsistent, i, j, n[j] - 1);
}

namespace detail {

inline std::size_t other_candidate(const CandidatePair& c, std::size_t cur) {
  return cur == c.first ? c.second : c.first;
}

// One best-response move using maintained loads; returns true on a switch.
inline bool br_move(GameState& st, std::vector<std::size_t>& loads, std::size_t i,
                    const AssocScores& s, BrRule rule) {
  const std::size_t cur = st.assignment.assign[i];
  const std::size_t alt = other_candidate(st.candidates[i], cur);
  if (alt == cur) return false;
  const double u_cur = br_payoff(s, rule, i, cur, loads[cur] - 1);
  const double u_alt = br_payoff(s, rule, i, alt, loads[alt]);
  if (!(u_alt > u_cur)) return false;
  --loads[cur];
  ++loads[alt];
  st.assignment.assign[i] = alt;
  st.switches.push_back({i, cur, alt, st.round});
  return true;
}

}  // namespace detail

inline GameState best_response_step(GameState st, std::size_t i, const AssocScores& s, BrRule rule) {
  st.validate();
  auto loads = st.assignment.loads();
  detail::br_move(st, loads, i, s, rule);
  return st;
}

inline GameState best_response_step(GameState st, std::size_t i, const GainTensor& g,
                                    const PowerAllocation& p, double noise_w, BrRule rule) {
  return best_response_step(std::move(st), i, AssocScores::from(g, p, noise_w), rule);
}

enum class GameStatus { kPneReached, kRoundCapped };

inline const char* to_string(GameStatus s) {
  return s == GameStatus::kPneReached ? "PNE-reached" : "round-capped";
}

struct GameResult {
  Association assoc;
  GameState state;
  GameStatus status = GameStatus::kPneReached;
};

// Round-robin sweeps in UE index order until a sweep makes no switch.
inline GameResult run_best_response(GameState st, const AssocScores& s, BrRule rule, int max_rounds) {
  if (max_rounds < 1) throw std::invalid_argument("max_rounds must be at least 1");
  st.validate();
  auto loads = st.assignment.loads();
  GameStatus status = GameStatus::kRoundCapped;
  while (st.round < max_rounds) {
    ++st.round;
    bool moved = false;
    for (std::size_t i = 0; i < st.assignment.ue_count(); ++i)
      moved = detail::br_move(st, loads, i, s, rule) || moved;
    if (!moved) {
      status = GameStatus::kPneReached;
      break;
    }
  }
  return {st.assignment, std::move(st), status};
}

inline bool is_pne(const Association& a, const std::vector<CandidatePair>& candidates,
                   const AssocScores& s, BrRule rule) {
  a.validate();
  const auto loads = a.loads();
  for (std::size_t i = 0; i < a.ue_count(); ++i) {
    const std::size_t cur = a.assign[i];
    const std::size_t alt = detail::other_candidate(candidates.at(i), cur);
    if (alt == cur) continue;
    if (br_payoff(s, rule, i, alt, loads[alt]) > br_payoff(s, rule, i, cur, loads[cur] - 1)) return false;
  }
  return true;
}

inline bool is_pne(const Association& a, const std::vector<CandidatePair>& candidates,
                   const GainTensor& g, const PowerAllocation& p, double noise_w, BrRule rule) {
  return is_pne(a, candidates, AssocScores::from(g, p, noise_w), rule);
}

}  // namespace cellopt
