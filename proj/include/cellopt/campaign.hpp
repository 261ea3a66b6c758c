#pragma once

// Seeded Monte Carlo campaigns over (seed, mode, UEs-per-cell) points.
//
// Replicas run on a small worker pool; rows are stored by index and written
// by one writer, so file contents never depend on completion order.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "cellopt/config.hpp"
#include "cellopt/orchestrator.hpp"
#include "cellopt/scenario.hpp"

namespace cellopt {

struct ReplicaRow {
  std::uint64_t seed = 0;
  AssocMode mode = AssocMode::kCentralized;
  std::string ue_per_cell;
  bool ok = false;
  std::string error;
  double u_bar = 0.0;
  double u_pf = 0.0;
  int outer_iters = 0;
  double jain = 0.0;
  double wall_ms = 0.0;
  std::vector<OuterRecord> trace;
  std::vector<std::size_t> serving;
  std::vector<double> rates;
};

struct SummaryRow {
  AssocMode mode = AssocMode::kCentralized;
  std::string ue_per_cell;
  std::size_t replicas = 0;
  double u_bar_mean = 0.0;
  double u_bar_std = 0.0;
  double u_pf_mean = 0.0;
  double u_pf_std = 0.0;
  double jain_mean = 0.0;
};

struct RunReport {
  std::vector<ReplicaRow> rows;
  std::vector<SummaryRow> summary;

  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += !r.ok;
    return n;
  }
  int exit_code() const { return failures() == 0 ? 0 : 2; }
};

// Sample mean and (n - 1) standard deviation, accumulated in row order.
inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double s = 0.0;
  for (double x : v) s += x;
  const double m = s / static_cast<double>(v.size());
  if (v.size() < 2) return {m, 0.0};
  double q = 0.0;
  for (double x : v) q += (x - m) * (x - m);
  return {m, std::sqrt(q / static_cast<double>(v.size() - 1))};
}

inline std::vector<SummaryRow> summarize(const std::vector<ReplicaRow>& rows, const std::vector<AssocMode>& modes,
                                         const std::vector<std::string>& sweep) {
  std::vector<SummaryRow> out;
  for (AssocMode m : modes)
    for (const auto& label : sweep) {
      std::vector<double> ub, up, jn;
      for (const auto& r : rows)
        if (r.ok && r.mode == m && r.ue_per_cell == label) {
          ub.push_back(r.u_bar);
          up.push_back(r.u_pf);
          jn.push_back(r.jain);
        }
      SummaryRow s;
      s.mode = m;
      s.ue_per_cell = label;
      s.replicas = ub.size();
      std::tie(s.u_bar_mean, s.u_bar_std) = mean_std(ub);
      std::tie(s.u_pf_mean, s.u_pf_std) = mean_std(up);
      s.jain_mean = mean_std(jn).first;
      out.push_back(s);
    }
  return out;
}

namespace detail {

struct SweepPoint {
  std::string label;
  UeRange range;
};

inline std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg) {
  std::vector<SweepPoint> out;
  if (cfg.campaign.ue_per_cell.empty()) {
    out.push_back({ue_range_label(cfg.scenario.ues_per_cell), cfg.scenario.ues_per_cell});
  } else {
    for (int n : cfg.campaign.ue_per_cell) out.push_back({std::to_string(n), UeRange{n, n}});
  }
  return out;
}

inline int worker_count(const ExperimentConfig& cfg, std::size_t tasks) {
  int jobs = cfg.campaign.jobs;
  if (const char* env = std::getenv("CELLOPT_JOBS")) {
    try {
      jobs = parse_number<int>(env);
    } catch (const std::exception&) {
      jobs = 0;
    }
  }
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return std::max(1, std::min<int>(jobs, static_cast<int>(tasks)));
}

inline void run_replica(const ExperimentConfig& cfg, const SweepPoint& pt, ReplicaRow& row) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    ScenarioConfig sc_cfg = cfg.scenario;
    sc_cfg.ues_per_cell = pt.range;
    const Scenario sc = make_scenario(sc_cfg, row.seed);
    const AlternateResult res = alternate(sc, row.mode, cfg.solver);
    row.u_bar = res.u_bar;
    row.u_pf = res.u_pf;
    row.outer_iters = static_cast<int>(res.trace.size());
    row.trace = res.trace;
    row.serving = res.assoc.assign;
    row.rates = mean_rates(res.assoc, res.schedule, sc.gains, res.power, sc.noise_w);
    row.jain = jain_index(row.rates);
    row.ok = true;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace detail

// Runs every replica; never throws for replica-level failures, which become
// rows with ok = false. `log` receives one progress line per replica.
inline RunReport run_replicas(const ExperimentConfig& cfg, std::ostream* log = nullptr) {
  const auto seeds = cfg.campaign.seed_list();
  const auto points = detail::sweep_points(cfg);
  RunReport rep;
  std::vector<const detail::SweepPoint*> point_of;
  for (auto seed : seeds)
    for (AssocMode m : cfg.campaign.modes)
      for (const auto& pt : points) {
        ReplicaRow r;
        r.seed = seed;
        r.mode = m;
        r.ue_per_cell = pt.label;
        rep.rows.push_back(std::move(r));
        point_of.push_back(&pt);
      }

  std::atomic<std::size_t> next{0}, done{0};
  std::mutex log_mu;
  auto worker = [&] {
    for (std::size_t t = next++; t < rep.rows.size(); t = next++) {
      auto& row = rep.rows[t];
      detail::run_replica(cfg, *point_of[t], row);
      const std::size_t d = ++done;
      if (log) {
        std::lock_guard<std::mutex> lock(log_mu);
        *log << "[" << d << "/" << rep.rows.size() << "] seed " << row.seed << " " << to_string(row.mode) << " "
             << row.ue_per_cell << ": "
             << (row.ok ? "u_bar " + detail::num(row.u_bar) : "FAILED " + row.error) << "\n";
      }
    }
  };
  const int n = detail::worker_count(cfg, rep.rows.size());
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<std::string> labels;
  for (const auto& pt : points) labels.push_back(pt.label);
  rep.summary = summarize(rep.rows, cfg.campaign.modes, labels);
  return rep;
}

inline void write_report(const RunReport& rep, const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  using detail::num;

  auto results = open("results.csv");
  results << "seed,mode,ue_per_cell,u_bar,u_pf,outer_iters,jain_index,wall_ms\n";
  auto trace = open("trace.csv");
  trace << "seed,mode,outer_iter,u_bar,pc_iters,assoc_switches\n";
  auto rates = open("rates.csv");
  rates << "seed,mode,ue_per_cell,ue,hpn,mean_rate\n";
  auto errors = open("errors.csv");
  errors << "seed,mode,ue_per_cell,message\n";
  for (const auto& r : rep.rows) {
    const std::string key = std::to_string(r.seed) + "," + to_string(r.mode);
    if (!r.ok) {
      errors << key << "," << r.ue_per_cell << "," << detail::csv_escape(r.error) << "\n";
      continue;
    }
    results << key << "," << r.ue_per_cell << "," << num(r.u_bar) << "," << num(r.u_pf) << "," << r.outer_iters
            << "," << num(r.jain) << "," << num(r.wall_ms) << "\n";
    for (const auto& t : r.trace)
      trace << key << "," << t.iteration << "," << num(t.u_bar) << "," << t.power_iterations << ","
            << t.assoc_switches << "\n";
    for (std::size_t i = 0; i < r.rates.size(); ++i)
      rates << key << "," << r.ue_per_cell << "," << i << "," << r.serving[i] << "," << num(r.rates[i]) << "\n";
  }

  auto summary = open("summary.csv");
  summary << "mode,ue_per_cell,replicas,u_bar_mean,u_bar_std,u_pf_mean,u_pf_std,jain_mean\n";
  for (const auto& s : rep.summary)
    summary << to_string(s.mode) << "," << s.ue_per_cell << "," << s.replicas << "," << num(s.u_bar_mean) << ","
            << num(s.u_bar_std) << "," << num(s.u_pf_mean) << "," << num(s.u_pf_std) << "," << num(s.jain_mean)
            << "\n";

  open("config.json") << to_json(cfg).dump(2) << "\n";
}

inline RunReport run_campaign(const ExperimentConfig& cfg, std::ostream* log = nullptr) {
  RunReport rep = run_replicas(cfg, log);
  write_report(rep, cfg, cfg.campaign.output_dir);
  return rep;
}

}  // namespace cellopt
