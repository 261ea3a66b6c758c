#pragma once

// Alternating optimization: association under fixed power, then power under
// fixed association, with the closed-form PF schedule applied at the end.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cellopt/assoc.hpp"
#include "cellopt/metrics.hpp"
#include "cellopt/powerctl.hpp"
#include "cellopt/scenario.hpp"
#include "cellopt/scheduler.hpp"

namespace cellopt {

enum class AssocMode { kCentralized, kDistributed, kBruteForce };

inline const char* to_string(AssocMode m) {
  switch (m) {
    case AssocMode::kCentralized: return "centralized";
    case AssocMode::kDistributed: return "distributed";
    case AssocMode::kBruteForce: return "brute-force";
  }
  return "?";
}

enum class StepOrder { kAssocFirst, kPowerFirst };

struct AlternateConfig {
  double rel_tol = 1e-5;
  int max_outer = 50;
  StepOrder order = StepOrder::kAssocFirst;
  SolverConfig power;
  RelaxedConfig relaxed;
  BrRule rule = BrRule::kUtilityConsistent;
  int max_rounds = 0;  // 0 selects 10 x |I| sweeps
};

struct OuterRecord {
  int iteration = 0;
  double u_bar = 0.0;
  double u_pf = 0.0;
  std::uint64_t power_hash = 0;
  std::uint64_t assoc_hash = 0;
  SolveStatus power_status = SolveStatus::kConverged;
  int power_iterations = 0;
  std::string assoc_status;
  std::size_t assoc_switches = 0;
  bool rounding_rejected = false;
};

struct AlternateResult {
  Association assoc;
  PowerAllocation power;
  Schedule schedule;
  std::vector<OuterRecord> trace;
  bool converged = false;
  double u_bar = 0.0;
  double u_pf = 0.0;
};

// Each UE to the HPN with the largest sum_k log G_ijk; lowest index on ties.
inline Association initial_association(const GainTensor& g) {
  Association a{std::vector<std::size_t>(g.ue_count(), 0), g.hpn_count()};
  for (std::size_t i = 0; i < g.ue_count(); ++i) {
    double best = -INFINITY;
    for (std::size_t j = 0; j < g.hpn_count(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < g.rb_count(); ++k) s += std::log(g(i, j, k));
      if (s > best) {
        best = s;
        a.assign[i] = j;
      }
    }
  }
  return a;
}

namespace detail {

inline std::size_t count_changes(const Association& a, const Association& b) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < a.ue_count(); ++i) c += a.assign[i] != b.assign[i];
  return c;
}

class Alternator {
public:
  Alternator(const Scenario& sc, AssocMode mode, const AlternateConfig& cfg)
      : sc_(sc), mode_(mode), cfg_(cfg) {}

  AlternateResult run() {
    if (cfg_.max_outer < 1) throw std::invalid_argument("max_outer must be at least 1");
    if (!sc_.limits.feasible_for(sc_.rb_count())) throw std::invalid_argument("infeasible power limits");

    AlternateResult res;
    res.assoc = initial_association(sc_.gains);
    res.power = uniform_power(sc_.hpn_count(), sc_.rb_count(), sc_.limits);
    double u = surrogate_utility(res.assoc, sc_.gains, res.power, sc_.noise_w);

    for (int t = 1; t <= cfg_.max_outer; ++t) {
      OuterRecord rec;
      rec.iteration = t;
      const Association before = res.assoc;
      const double u_before = u;
      try {
        if (cfg_.order == StepOrder::kAssocFirst) {
          association_step(res, rec);
          power_step(res, rec);
        } else {
          power_step(res, rec);
          association_step(res, rec);
        }
      } catch (const std::exception& e) {
        throw std::runtime_error("outer iteration " + std::to_string(t) + ": " + e.what());
      }
      u = surrogate_utility(res.assoc, sc_.gains, res.power, sc_.noise_w);
      rec.u_bar = u;
      rec.u_pf = utility_pf(res.assoc, pf_schedule(res.assoc), sc_.gains, res.power, sc_.noise_w);
      rec.power_hash = hash_values(res.power.power.data());
      rec.assoc_hash = hash_values(res.assoc.assign);
      res.trace.push_back(rec);

      if (mode_ != AssocMode::kDistributed && u < u_before - 1e-9)
        throw std::logic_error("surrogate utility decreased at outer iteration " + std::to_string(t));

      const bool same = res.assoc == before;
      if (sc_.hpn_count() == 1 ||
          (same && std::abs(u - u_before) / std::max(1.0, std::abs(u_before)) < cfg_.rel_tol)) {
        res.converged = true;
        break;
      }
    }
    res.schedule = pf_schedule(res.assoc);
    res.u_bar = u;
    res.u_pf = utility_pf(res.assoc, res.schedule, sc_.gains, res.power, sc_.noise_w);
    return res;
  }

private:
  void association_step(AlternateResult& res, OuterRecord& rec) const {
    const AssocScores scores = AssocScores::from(sc_.gains, res.power, sc_.noise_w);
    switch (mode_) {
      case AssocMode::kCentralized: {
        const auto relaxed = solve_relaxed_assoc(scores, cfg_.relaxed);
        Association rounded = round_assoc(relaxed.theta);
        // Keep the incumbent when rounding would lose surrogate utility.
        if (assoc_objective(rounded, scores) < assoc_objective(res.assoc, scores)) {
          rec.rounding_rejected = true;
          rec.assoc_status = "rounding-rejected";
        } else {
          rec.assoc_switches = count_changes(res.assoc, rounded);
          rec.assoc_status = to_string(relaxed.status);
          res.assoc = std::move(rounded);
        }
        break;
      }
      case AssocMode::kDistributed: {
        auto candidates = pick_candidates(scores);
        GameState st = initial_game_state(candidates, sc_.hpn_count());
        // Warm start from the incumbent wherever it is still a candidate.
        for (std::size_t i = 0; i < candidates.size(); ++i) {
          const std::size_t cur = res.assoc.assign[i];
          if (cur == candidates[i].first || cur == candidates[i].second) st.assignment.assign[i] = cur;
        }
        const int rounds = cfg_.max_rounds > 0 ? cfg_.max_rounds
                                               : static_cast<int>(10 * std::max<std::size_t>(1, sc_.ue_count()));
        auto game = run_best_response(std::move(st), scores, cfg_.rule, rounds);
        rec.assoc_switches = game.state.switches.size();
        rec.assoc_status = to_string(game.status);
        res.assoc = std::move(game.assoc);
        break;
      }
      case AssocMode::kBruteForce: {
        auto bf = brute_force_assoc(scores);
        rec.assoc_switches = count_changes(res.assoc, bf.assoc);
        rec.assoc_status = "exhaustive";
        if (bf.objective >= assoc_objective(res.assoc, scores)) res.assoc = std::move(bf.assoc);
        break;
      }
    }
  }

  void power_step(AlternateResult& res, OuterRecord& rec) const {
    auto sol = solve_power(res.assoc, sc_.gains, sc_.noise_w, sc_.limits, cfg_.power, res.power);
    rec.power_status = sol.status;
    rec.power_iterations = sol.iterations;
    res.power = std::move(sol.power);
  }

  const Scenario& sc_;
  AssocMode mode_;
  AlternateConfig cfg_;
};

}  // namespace detail

inline AlternateResult alternate(const Scenario& sc, AssocMode mode, const AlternateConfig& cfg = {}) {
  return detail::Alternator(sc, mode, cfg).run();
}

}  // namespace cellopt
