#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cellopt/campaign.hpp"

namespace cellopt {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("cellopt_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

bool mentions(const ConfigResult& r, const std::string& needle) {
  for (const auto& e : r.errors)
    if (e.find(needle) != std::string::npos) return true;
  return false;
}

TEST(ValidateConfig, EmptyTextGivesDefaults) {
  auto r = validate_config("");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.config.scenario.cell_count, 9u);
  EXPECT_EQ(r.config.scenario.channel.rb_count, 25u);
  EXPECT_EQ(r.config.campaign.seed_list().size(), 25u);
  EXPECT_EQ(r.config.campaign.modes.size(), 2u);
}

TEST(ValidateConfig, DefaultLimitsAreFeasible) {
  auto r = validate_config("[scenario]\np_max_dbm = 43\np_min_rb_dbm = 15\nrb_count = 25\n");
  ASSERT_TRUE(r.ok());
  const auto& lim = r.config.scenario.limits;
  EXPECT_NEAR(25 * lim.p_min_per_rb, 25 * std::pow(10.0, -1.5), 1e-12);
  EXPECT_NEAR(25 * lim.p_min_per_rb, 0.79, 0.005);
  EXPECT_NEAR(lim.p_max_per_hpn, 19.95, 0.005);
}

TEST(ValidateConfig, InfeasibleFloorRejected) {
  auto r = validate_config("[scenario]\np_min_rb_dbm = 30\n");
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(mentions(r, "scenario.p_min_rb_dbm"));
  EXPECT_TRUE(mentions(r, "infeasible"));
}

TEST(ValidateConfig, UnknownKeyNamed) {
  auto r = validate_config("[sheduler]\ntol = 1e-3\n");
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(mentions(r, "sheduler.tol"));
  auto typo = validate_config("[power]\nrel_tl = 1e-3\n");
  EXPECT_TRUE(mentions(typo, "power.rel_tl"));
}

TEST(ValidateConfig, DiagnosticsAggregate) {
  auto r = validate_config("[scenario]\ncell_count = 4\nrb_count = zero\n[campaign]\nmodes = centralised\n");
  EXPECT_EQ(r.errors.size(), 3u);
  EXPECT_TRUE(mentions(r, "scenario.cell_count"));
  EXPECT_TRUE(mentions(r, "scenario.rb_count"));
  EXPECT_TRUE(mentions(r, "campaign.modes"));
}

TEST(ValidateConfig, RejectsTrailingJunkAndBadRanges) {
  EXPECT_FALSE(validate_config("[power]\nrel_tol = 1e-6x\n").ok());
  EXPECT_FALSE(validate_config("[power]\nrel_tol = 2\n").ok());
  EXPECT_FALSE(validate_config("[scenario]\nues_per_cell = 9-3\n").ok());
  EXPECT_FALSE(validate_config("[campaign]\nreplicas = 0\n").ok());
  EXPECT_FALSE(validate_config("[campaign]\nseeds = 1, 2, 1\n").ok());
  EXPECT_FALSE(validate_config("stray = 1\n").ok());
}

TEST(ValidateConfig, ExplicitPathlossCoefficientsWinOverModel) {
  auto a = validate_config("[scenario]\npathloss_intercept_db = 120\npathloss_model = macro_rural\n");
  ASSERT_TRUE(a.ok());
  EXPECT_DOUBLE_EQ(a.config.scenario.channel.pathloss.intercept_db, 120.0);
  EXPECT_DOUBLE_EQ(a.config.scenario.channel.pathloss.slope_db, 34.1);
}

TEST(ValidateConfig, SweepAndRange) {
  auto r = validate_config("[scenario]\nues_per_cell = 6\n[campaign]\nue_per_cell = 4, 8\nseeds = 5, 9\n");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.config.scenario.ues_per_cell.lo, 6);
  EXPECT_EQ(r.config.scenario.ues_per_cell.hi, 6);
  EXPECT_EQ(r.config.campaign.ue_per_cell, (std::vector<int>{4, 8}));
  EXPECT_EQ(r.config.campaign.seed_list(), (std::vector<std::uint64_t>{5, 9}));
}

ExperimentConfig small_campaign(const fs::path& out) {
  auto r = validate_config(
      "[scenario]\ncell_count = 7\nues_per_cell = 2-4\nrb_count = 6\n"
      "[campaign]\nreplicas = 3\nue_per_cell = 2, 3\n");
  EXPECT_TRUE(r.ok());
  r.config.campaign.output_dir = out.string();
  return r.config;
}

TEST(Campaign, DegenerateSingleCellSingleUe) {
  auto out = scratch_dir("degenerate");
  auto r = validate_config("[scenario]\ncell_count = 1\nues_per_cell = 1\n[campaign]\nreplicas = 1\nmodes = centralized\n");
  ASSERT_TRUE(r.ok());
  r.config.campaign.output_dir = out.string();
  auto rep = run_campaign(r.config);
  ASSERT_EQ(rep.rows.size(), 1u);
  const auto& row = rep.rows[0];
  ASSERT_TRUE(row.ok) << row.error;
  EXPECT_EQ(row.outer_iters, 1);
  // Full power split evenly over the 25 RBs, with no interference.
  auto sc = make_scenario(r.config.scenario, row.seed);
  const double p = sc.limits.p_max_per_hpn / 25.0;
  double expect = 0.0, rate = 0.0;
  for (std::size_t k = 0; k < 25; ++k) {
    expect += std::log(p * sc.gains(0, 0, k) / sc.noise_w);
    rate += p * sc.gains(0, 0, k) / sc.noise_w;
  }
  EXPECT_NEAR(row.u_bar, expect, 1e-6 * std::abs(expect));
  EXPECT_NEAR(row.rates[0], rate, 1e-5 * rate);  // alpha = 1
  EXPECT_EQ(read_csv(out / "results.csv").size(), 1u);
  EXPECT_EQ(rep.exit_code(), 0);
}

TEST(Campaign, RowCountAndOrdering) {
  auto out = scratch_dir("rows");
  auto cfg = small_campaign(out);
  auto rep = run_campaign(cfg);
  ASSERT_EQ(rep.rows.size(), 3u * 2u * 2u);
  auto rows = read_csv(out / "results.csv");
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[0][0], "1");
  EXPECT_EQ(rows[0][1], "centralized");
  EXPECT_EQ(rows[0][2], "2");
  EXPECT_EQ(rows[1][2], "3");
  EXPECT_EQ(rows[2][1], "distributed");
  EXPECT_EQ(rows[4][0], "2");
  EXPECT_EQ(read_csv(out / "summary.csv").size(), 4u);
  EXPECT_TRUE(fs::exists(out / "config.json"));
}

TEST(Campaign, ByteIdenticalAcrossRunsAndWorkerCounts) {
  auto a = scratch_dir("det_a"), b = scratch_dir("det_b");
  setenv("CELLOPT_JOBS", "1", 1);
  run_campaign(small_campaign(a));
  setenv("CELLOPT_JOBS", "3", 1);
  run_campaign(small_campaign(b));
  unsetenv("CELLOPT_JOBS");
  for (const char* f : {"summary.csv", "trace.csv", "rates.csv", "errors.csv"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  auto ra = read_csv(a / "results.csv"), rb = read_csv(b / "results.csv");
  ASSERT_EQ(ra.size(), rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i)
    for (std::size_t c = 0; c + 1 < ra[i].size(); ++c) EXPECT_EQ(ra[i][c], rb[i][c]);
}

TEST(Campaign, SummaryMatchesRecomputedMeans) {
  auto out = scratch_dir("summary");
  run_campaign(small_campaign(out));
  auto results = read_csv(out / "results.csv");
  for (const auto& s : read_csv(out / "summary.csv")) {
    std::vector<double> ub, up;
    for (const auto& r : results)
      if (r[1] == s[0] && r[2] == s[1]) {
        ub.push_back(std::stod(r[3]));
        up.push_back(std::stod(r[4]));
      }
    ASSERT_EQ(std::to_string(ub.size()), s[2]);
    double m = 0.0;
    for (double x : ub) m += x / ub.size();
    double q = 0.0;
    for (double x : ub) q += (x - m) * (x - m);
    EXPECT_NEAR(std::stod(s[3]), m, 1e-12 * std::abs(m));
    EXPECT_NEAR(std::stod(s[4]), std::sqrt(q / (ub.size() - 1)), 1e-9 * std::abs(m));
    double mp = 0.0;
    for (double x : up) mp += x / up.size();
    EXPECT_NEAR(std::stod(s[5]), mp, 1e-12 * std::abs(mp));
  }
}

TEST(Campaign, FailedReplicaKeepsOtherRows) {
  auto out = scratch_dir("partial");
  auto r = validate_config(
      "[scenario]\ncell_count = 7\nues_per_cell = 3\nrb_count = 4\n"
      "[campaign]\nreplicas = 2\nmodes = centralized, brute-force\n");
  ASSERT_TRUE(r.ok());
  r.config.campaign.output_dir = out.string();
  // 7^21 associations trips the exhaustive search guard.
  auto rep = run_campaign(r.config);
  EXPECT_EQ(rep.failures(), 2u);
  EXPECT_EQ(rep.exit_code(), 2);
  auto rows = read_csv(out / "results.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][1], "centralized");
  EXPECT_EQ(rows[1][1], "centralized");
  EXPECT_EQ(read_csv(out / "errors.csv").size(), 2u);
  auto summary = read_csv(out / "summary.csv");
  EXPECT_EQ(summary[1][2], "0");
}

}  // namespace
}  // namespace cellopt
