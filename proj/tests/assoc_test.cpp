#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cellopt/assoc.hpp"
#include "cellopt/orchestrator.hpp"
#include "oracles.hpp"

namespace cellopt {
namespace {

AssocScores scores(std::size_t ues, std::size_t hpns, std::vector<double> w, std::size_t rbs) {
  AssocScores s{Table<double>(ues, hpns), rbs};
  s.w.data() = std::move(w);
  return s;
}

// Exact potential of the crowding game: sum_i w_{i,a_i} - e sum_j log(n_j!).
double potential(const Association& a, const AssocScores& s, BrRule rule) {
  const double e = rule == BrRule::kSinrProduct ? 1.0 : static_cast<double>(s.rb_count);
  double v = 0.0;
  for (std::size_t i = 0; i < a.ue_count(); ++i) v += s.w(i, a.assign[i]);
  for (std::size_t n : a.loads()) v -= e * std::lgamma(static_cast<double>(n) + 1.0);
  return v;
}

TEST(AssocObjective, BinaryMatchesSurrogate) {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 50; ++rep) {
    auto sc = make_line_scenario(3, 4, 7, rep);
    auto a = testing::random_association(7, 3, rng);
    auto p = testing::random_feasible_power(3, 4, sc.limits, rng);
    const double u = surrogate_utility(a, sc.gains, p, sc.noise_w);
    EXPECT_NEAR(assoc_objective(a, sc.gains, p, sc.noise_w), u, 1e-12 * std::max(1.0, std::abs(u)));
    EXPECT_NEAR(assoc_objective(FractionalAssociation::from(a), sc.gains, p, sc.noise_w), u,
                1e-12 * std::max(1.0, std::abs(u)));
  }
}

TEST(AssocObjective, SymmetricHalfSplit) {
  auto s = scores(2, 2, {1.0, 2.0, 3.0, 5.0}, 4);
  FractionalAssociation f{Table<double>(2, 2, 0.5)};
  // Loads are 1 on both HPNs, so the penalty vanishes.
  EXPECT_DOUBLE_EQ(assoc_objective(f, s), 0.5 * (1.0 + 2.0 + 3.0 + 5.0));
}

TEST(AssocObjective, BetterHpnSameLoadsIncreases) {
  auto s = scores(2, 3, {1.0, 4.0, 0.0, 2.0, 2.0, 2.0}, 2);
  Association a{{0, 2}, 3};
  Association b{{1, 2}, 3};
  EXPECT_GT(assoc_objective(b, s), assoc_objective(a, s));
}

TEST(AssocObjective, ConcaveAlongChords) {
  std::mt19937_64 rng(43);
  std::exponential_distribution<double> ex(1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto random_frac = [&](std::size_t n, std::size_t m) {
    FractionalAssociation f{Table<double>(n, m)};
    for (std::size_t i = 0; i < n; ++i) {
      double t = 0.0;
      for (std::size_t j = 0; j < m; ++j) t += (f.theta(i, j) = ex(rng));
      for (std::size_t j = 0; j < m; ++j) f.theta(i, j) /= t;
    }
    return f;
  };
  for (int rep = 0; rep < 200; ++rep) {
    auto sc = make_line_scenario(3, 3, 5, 600 + rep);
    auto s = AssocScores::from(sc.gains, uniform_power(3, 3, sc.limits), sc.noise_w);
    auto f1 = random_frac(5, 3), f2 = random_frac(5, 3);
    const double l = u(rng);
    FractionalAssociation mid{Table<double>(5, 3)};
    for (std::size_t n = 0; n < 15; ++n)
      mid.theta.data()[n] = l * f1.theta.data()[n] + (1 - l) * f2.theta.data()[n];
    EXPECT_GE(assoc_objective(mid, s), l * assoc_objective(f1, s) + (1 - l) * assoc_objective(f2, s) - 1e-9);
  }
}

TEST(SimplexProjection, ProjectsOntoSimplex) {
  std::vector<double> v{0.2, 0.9, -0.4};
  project_simplex(v.data(), 3);
  EXPECT_NEAR(v[0], 0.15, 1e-15);
  EXPECT_NEAR(v[1], 0.85, 1e-15);
  EXPECT_DOUBLE_EQ(v[2], 0.0);
}

TEST(RelaxedAssoc, SingleUeClosedForm) {
  // With one UE the load penalty is K times the entropy of its row, so the
  // optimum is a softmax: theta_0 / theta_1 = exp((w_0 - w_1) / K).
  auto s = scores(1, 2, {5.0, 1.0}, 2);
  auto r = solve_relaxed_assoc(s);
  const double t0 = 1.0 / (1.0 + std::exp(-2.0));
  EXPECT_NEAR(r.theta.theta(0, 0), t0, 1e-4);
  EXPECT_NEAR(r.theta.theta(0, 1), 1.0 - t0, 1e-4);
  EXPECT_EQ(round_assoc(r.theta).assign[0], 0u);
}

TEST(RelaxedAssoc, SymmetricSplit) {
  auto s = scores(2, 2, {3.0, 3.0, 3.0, 3.0}, 4);
  auto r = solve_relaxed_assoc(s);
  for (std::size_t n = 0; n < 4; ++n) EXPECT_NEAR(r.theta.theta.data()[n], 0.5, 1e-9);
  EXPECT_TRUE(r.theta.valid());
}

TEST(RelaxedAssoc, UpperBoundsBinaryOptimum) {
  std::mt19937_64 rng(47);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t hpns = 2 + rep % 2, ues = 3 + rep % 4;
    auto sc = make_line_scenario(hpns, 3, ues, 700 + rep);
    auto p = testing::random_feasible_power(hpns, 3, sc.limits, rng);
    auto s = AssocScores::from(sc.gains, p, sc.noise_w);
    auto relaxed = solve_relaxed_assoc(s);
    auto bf = brute_force_assoc(s);
    auto rounded = round_assoc(relaxed.theta);
    EXPECT_TRUE(relaxed.theta.valid());
    EXPECT_GE(relaxed.objective, bf.objective - 1e-9 * std::abs(bf.objective));
    EXPECT_GE(bf.objective, assoc_objective(rounded, s));
  }
}

TEST(RoundAssoc, ArgmaxWithLowIndexTies) {
  FractionalAssociation f{Table<double>(3, 2)};
  f.theta.data() = {0.9, 0.1, 0.5, 0.5, 0.0, 1.0};
  auto a = round_assoc(f);
  EXPECT_EQ(a.assign, (std::vector<std::size_t>{0, 0, 1}));
  EXPECT_EQ(round_assoc(FractionalAssociation::from(a)), a);
}

TEST(BruteForceAssoc, SingleUePicksBestScore) {
  auto s = scores(1, 3, {1.0, 4.0, 2.0}, 5);
  auto bf = brute_force_assoc(s);
  EXPECT_EQ(bf.assoc.assign[0], 1u);
  EXPECT_DOUBLE_EQ(bf.objective, 4.0);
}

TEST(BruteForceAssoc, IdenticalPairSplits) {
  // Enumerate the four profiles by hand: split keeps both scores, co-location
  // pays K * 2 log 2.
  auto s = scores(2, 2, {2.0, 2.0, 2.0, 2.0}, 3);
  const double split = 4.0, together = 4.0 - 3 * 2 * std::log(2.0);
  auto bf = brute_force_assoc(s);
  EXPECT_EQ(bf.assoc.assign, (std::vector<std::size_t>{0, 1}));
  EXPECT_DOUBLE_EQ(bf.objective, split);
  EXPECT_GT(split, together);
}

TEST(BruteForceAssoc, GuardsSize) {
  auto s = scores(24, 2, std::vector<double>(48, 1.0), 1);
  EXPECT_THROW(brute_force_assoc(s), std::invalid_argument);
}

TEST(Candidates, TopTwoByScore) {
  std::vector<double> w(7, 0.0);
  w[3] = 10.0;
  w[5] = 8.0;
  w[1] = 7.0;
  auto c = pick_candidates(scores(1, 7, w, 1));
  EXPECT_EQ(c[0], (CandidatePair{3, 5}));
  auto tie = pick_candidates(scores(1, 3, {0.0, 5.0, 5.0}, 1));
  EXPECT_EQ(tie[0], (CandidatePair{1, 2}));
  auto single = pick_candidates(scores(1, 1, {1.0}, 1));
  EXPECT_EQ(single[0], (CandidatePair{0, 0}));
}

TEST(Candidates, NearestSitesUnderFlatPower) {
  auto t = build_hex_topology(7, 500.0);
  UeSet u{{{240.0, 0.0}}, {0}, {0}};
  ChannelConfig ch;
  ch.rb_count = 2;
  auto g = compute_gains(t, u, ch, 1);
  auto c = pick_candidates(g, uniform_power(7, 2, PowerLimits{}), ch.noise_watt());
  // Site 0 at the origin, site 1 at (500, 0).
  EXPECT_EQ(c[0], (CandidatePair{0, 1}));
}

TEST(Candidates, InvariantToCommonScaling) {
  auto sc = make_line_scenario(4, 3, 6, 9);
  std::mt19937_64 rng(3);
  auto p = testing::random_feasible_power(4, 3, sc.limits, rng);
  auto q = p;
  for (double& v : q.power.data()) v *= 7.0;
  EXPECT_EQ(pick_candidates(sc.gains, p, sc.noise_w), pick_candidates(sc.gains, q, 7.0 * sc.noise_w));
}

TEST(BestResponse, LoneUePicksBetter) {
  auto s = scores(1, 2, {3.0, 1.0}, 2);
  GameState st = initial_game_state({{0, 1}}, 2);
  st.assignment.assign[0] = 1;
  auto next = best_response_step(st, 0, s, BrRule::kSinrProduct);
  EXPECT_EQ(next.assignment.assign[0], 0u);
  ASSERT_EQ(next.switches.size(), 1u);
  EXPECT_EQ(next.switches[0].from, 1u);
}

TEST(BestResponse, SecondMoverDefects) {
  // Both prefer HPN 0 alone. UE 0: rho ratio 10/2 = 5 > load ratio 2, stays.
  // UE 1: ratio 10/6 < 2, so 10/(1+1) < 6/(0+1) and it defects.
  const double r0 = std::log(10.0);
  auto s = scores(2, 2, {r0, std::log(2.0), r0, std::log(6.0)}, 1);
  GameState st = initial_game_state({{0, 1}, {0, 1}}, 2);
  ASSERT_GT(10.0 / 2.0, 2.0 / 1.0);
  ASSERT_LT(10.0 / 2.0, 6.0 / 1.0);
  st = best_response_step(st, 0, s, BrRule::kSinrProduct);
  EXPECT_EQ(st.assignment.assign[0], 0u);
  st = best_response_step(st, 1, s, BrRule::kSinrProduct);
  EXPECT_EQ(st.assignment.assign[1], 1u);
}

TEST(BestResponse, RulesAgreeForOneRb) {
  std::mt19937_64 rng(53);
  std::normal_distribution<double> nd(0.0, 2.0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> w(12);
    for (double& v : w) v = nd(rng);
    auto s = scores(4, 3, w, 1);
    auto cands = pick_candidates(s);
    auto a = run_best_response(initial_game_state(cands, 3), s, BrRule::kSinrProduct, 100);
    auto b = run_best_response(initial_game_state(cands, 3), s, BrRule::kUtilityConsistent, 100);
    EXPECT_EQ(a.assoc, b.assoc);
  }
}

TEST(BestResponse, EqualityKeepsCurrent) {
  auto s = scores(1, 2, {2.0, 2.0}, 3);
  GameState st = initial_game_state({{0, 1}}, 2);
  st.assignment.assign[0] = 1;
  EXPECT_EQ(best_response_step(st, 0, s, BrRule::kUtilityConsistent).assignment.assign[0], 1u);
}

TEST(BestResponse, OffCandidateStateRejected) {
  auto s = scores(1, 3, {2.0, 1.0, 0.0}, 1);
  GameState st = initial_game_state({{0, 1}}, 3);
  st.assignment.assign[0] = 2;
  EXPECT_THROW(best_response_step(st, 0, s, BrRule::kSinrProduct), std::invalid_argument);
}

TEST(RunBestResponse, FixedPointNeedsOneSweep) {
  auto s = scores(2, 2, {5.0, 0.0, 0.0, 5.0}, 2);
  auto r = run_best_response(initial_game_state(pick_candidates(s), 2), s, BrRule::kUtilityConsistent, 10);
  EXPECT_EQ(r.status, GameStatus::kPneReached);
  EXPECT_EQ(r.state.round, 1);
  EXPECT_TRUE(r.state.switches.empty());
}

TEST(RunBestResponse, SymmetricContentionSplits) {
  // Improvement paths from (0, 0): UE 0 moves to HPN 1 (gains K log 2), then
  // nobody can improve. Every path ends one UE per HPN.
  auto s = scores(2, 2, {1.0, 1.0, 1.0, 1.0}, 4);
  auto r = run_best_response(initial_game_state(pick_candidates(s), 2), s, BrRule::kUtilityConsistent, 10);
  EXPECT_EQ(r.status, GameStatus::kPneReached);
  EXPECT_EQ(r.assoc.loads(), (std::vector<std::size_t>{1, 1}));
}

TEST(RunBestResponse, SwitchesImproveMoverAndPotential) {
  for (BrRule rule : {BrRule::kUtilityConsistent, BrRule::kSinrProduct}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      ScenarioConfig cfg;
      cfg.ues_per_cell = {4, 14};
      auto sc = make_scenario(cfg, seed);
      auto s = AssocScores::from(sc.gains, uniform_power(9, 25, sc.limits), sc.noise_w);
      const auto cands = pick_candidates(s);
      const GameState start = initial_game_state(cands, 9);
      auto r = run_best_response(start, s, rule, static_cast<int>(10 * sc.ue_count()));
      ASSERT_EQ(r.status, GameStatus::kPneReached);
      EXPECT_TRUE(is_pne(r.assoc, cands, s, rule));
      // Replay the switch log.
      Association cur = start.assignment;
      int last_round = 0;
      for (const auto& sw : r.state.switches) {
        EXPECT_GE(sw.round, last_round);
        last_round = sw.round;
        const double before = br_payoff(s, rule, sw.ue, sw.from, cur.loads()[sw.from] - 1);
        const double phi_before = potential(cur, s, rule);
        cur.assign[sw.ue] = sw.to;
        const double after = br_payoff(s, rule, sw.ue, sw.to, cur.loads()[sw.to] - 1);
        EXPECT_GT(after, before);
        EXPECT_GT(potential(cur, s, rule), phi_before);
      }
      EXPECT_EQ(cur, r.assoc);
    }
  }
}

TEST(RunBestResponse, SurrogateSumCanDropOnAProfitableSwitch) {
  // UE 0 alone on HPN 0 (score 0) moves next to UE 1 on HPN 1 (score 1 with
  // K = 1): its own payoff goes 0 -> 1 - log 2 > 0, but UE 1 loses log 2, so
  // the summed utility falls by 2 log 2 - 1.
  auto s = scores(2, 2, {0.0, 1.0, -50.0, 5.0}, 1);
  GameState st;
  st.assignment = {{0, 1}, 2};
  st.candidates = {{1, 0}, {1, 0}};
  const double before = assoc_objective(st.assignment, s);
  st = best_response_step(st, 0, s, BrRule::kUtilityConsistent);
  ASSERT_EQ(st.assignment.assign[0], 1u);
  EXPECT_LT(assoc_objective(st.assignment, s), before);
}

TEST(IsPne, ForcedWorseCandidateIsNotEquilibrium) {
  auto s = scores(1, 2, {4.0, 1.0}, 2);
  EXPECT_FALSE(is_pne(Association{{1}, 2}, {{0, 1}}, s, BrRule::kUtilityConsistent));
  EXPECT_TRUE(is_pne(Association{{0}, 2}, {{0, 1}}, s, BrRule::kUtilityConsistent));
}

TEST(IsPne, AgreesWithExhaustiveDeviationCheck) {
  std::mt19937_64 rng(59);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t K = 1 + rep % 3;
    std::vector<double> w(4);
    for (double& v : w) v = nd(rng);
    auto s = scores(2, 2, w, K);
    const std::vector<CandidatePair> c{{0, 1}, {0, 1}};
    for (std::size_t a0 = 0; a0 < 2; ++a0)
      for (std::size_t a1 = 0; a1 < 2; ++a1) {
        const std::size_t prof[2] = {a0, a1};
        bool stable = true;
        for (std::size_t i = 0; i < 2; ++i) {
          const std::size_t other = prof[1 - i];
          auto u = [&](std::size_t j) { return w[i * 2 + j] - K * std::log(1.0 + (other == j ? 1 : 0)); };
          if (u(1 - prof[i]) > u(prof[i])) stable = false;
        }
        EXPECT_EQ(is_pne(Association{{a0, a1}, 2}, c, s, BrRule::kUtilityConsistent), stable);
      }
  }
}

}  // namespace
}  // namespace cellopt
