#pragma once

// Experiment configuration: INI text with one section per module.
//
//   [scenario]      cell_count, isd_m, ues_per_cell, pathloss_model, ...
//   [power]         method, max_iterations, rel_tol, barrier_*, armijo, shrink
//   [assoc]         br_rule, max_rounds, relaxed_rel_tol, relaxed_max_iterations
//   [orchestrator]  rel_tol, max_outer, order
//   [campaign]      base_seed, replicas, seeds, ue_per_cell, modes, jobs, output_dir
//
// Every key is optional; missing keys keep the defaults below. Unknown
// sections or keys are errors.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "cellopt/orchestrator.hpp"
#include "cellopt/scenario.hpp"

namespace cellopt {

struct CampaignConfig {
  std::uint64_t base_seed = 1;
  int replicas = 25;
  std::vector<std::uint64_t> seeds;  // when set, replaces base_seed + replicas
  std::vector<int> ue_per_cell;      // empty: use the scenario range
  std::vector<AssocMode> modes{AssocMode::kCentralized, AssocMode::kDistributed};
  int jobs = 0;  // 0: hardware concurrency
  std::string output_dir = "results";

  std::vector<std::uint64_t> seed_list() const {
    if (!seeds.empty()) return seeds;
    std::vector<std::uint64_t> out;
    for (int r = 0; r < replicas; ++r) out.push_back(base_seed + static_cast<std::uint64_t>(r));
    return out;
  }
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  AlternateConfig solver;
  CampaignConfig campaign;
};

struct ConfigResult {
  ExperimentConfig config;
  std::vector<std::string> errors;

  bool ok() const { return errors.empty(); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw std::invalid_argument("cannot parse '" + s + "' as a number");
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(v)) throw std::invalid_argument("value must be finite");
  return v;
}

inline bool parse_bool(const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + s + "'");
}

inline UeRange parse_ue_range(const std::string& raw) {
  const std::string s = trim(raw);
  const auto dash = s.find('-');
  UeRange r;
  if (dash == std::string::npos) {
    r.lo = r.hi = parse_number<int>(s);
  } else {
    r.lo = parse_number<int>(s.substr(0, dash));
    r.hi = parse_number<int>(s.substr(dash + 1));
  }
  if (r.lo < 1 || r.hi > 64 || r.lo > r.hi)
    throw std::invalid_argument("UE range must satisfy 1 <= lo <= hi <= 64");
  return r;
}

inline AssocMode parse_mode(const std::string& s) {
  if (s == "centralized") return AssocMode::kCentralized;
  if (s == "distributed") return AssocMode::kDistributed;
  if (s == "brute-force") return AssocMode::kBruteForce;
  throw std::invalid_argument("unknown mode '" + s + "' (centralized, distributed, brute-force)");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

inline const std::map<std::string, Setter>& config_setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> m;
    auto positive_double = [](const std::string& v, const char* what) {
      const double d = parse_number<double>(v);
      if (!(d > 0.0)) throw std::invalid_argument(what);
      return d;
    };
    auto unit_open = [](const std::string& v, const char* what) {
      const double d = parse_number<double>(v);
      if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument(what);
      return d;
    };
    auto positive_int = [](const std::string& v, const char* what) {
      const int i = parse_number<int>(v);
      if (i < 1) throw std::invalid_argument(what);
      return i;
    };

    m["scenario.cell_count"] = [](ExperimentConfig& c, const std::string& v) {
      const auto n = parse_number<std::size_t>(v);
      if (n != 1 && n != 7 && n != 9 && n != 19) throw std::invalid_argument("supported cell counts: 1, 7, 9, 19");
      c.scenario.cell_count = n;
    };
    m["scenario.isd_m"] = [=](ExperimentConfig& c, const std::string& v) {
      c.scenario.isd_m = positive_double(v, "must be positive");
    };
    m["scenario.ues_per_cell"] = [](ExperimentConfig& c, const std::string& v) {
      c.scenario.ues_per_cell = parse_ue_range(v);
    };
    m["scenario.pathloss_model"] = [](ExperimentConfig& c, const std::string& v) {
      c.scenario.channel.pathloss = named_pathloss(trim(v));
    };
    m["scenario.pathloss_intercept_db"] = [](ExperimentConfig& c, const std::string& v) {
      c.scenario.channel.pathloss.intercept_db = parse_number<double>(v);
    };
    m["scenario.pathloss_slope_db"] = [=](ExperimentConfig& c, const std::string& v) {
      c.scenario.channel.pathloss.slope_db = positive_double(v, "must be positive");
    };
    m["scenario.shadowing_sigma_db"] = [](ExperimentConfig& c, const std::string& v) {
      const double d = parse_number<double>(v);
      if (d < 0.0) throw std::invalid_argument("must be >= 0");
      c.scenario.channel.shadowing_sigma_db = d;
    };
    m["scenario.rb_fading"] = [](ExperimentConfig& c, const std::string& v) {
      c.scenario.channel.rb_fading = parse_bool(v);
    };
    m["scenario.rb_count"] = [=](ExperimentConfig& c, const std::string& v) {
      c.scenario.channel.rb_count = static_cast<std::size_t>(positive_int(v, "must be at least 1"));
    };
    m["scenario.noise_dbm"] = [](ExperimentConfig& c, const std::string& v) {
      c.scenario.channel.noise_dbm = parse_number<double>(v);
    };
    m["scenario.noise_figure_db"] = [](ExperimentConfig& c, const std::string& v) {
      c.scenario.channel.noise_figure_db = parse_number<double>(v);
    };
    m["scenario.p_max_dbm"] = [](ExperimentConfig& c, const std::string& v) {
      c.scenario.limits.p_max_per_hpn = dbm_to_watt(parse_number<double>(v));
    };
    m["scenario.p_min_rb_dbm"] = [](ExperimentConfig& c, const std::string& v) {
      c.scenario.limits.p_min_per_rb = dbm_to_watt(parse_number<double>(v));
    };

    m["power.method"] = [](ExperimentConfig& c, const std::string& v) {
      const std::string s = trim(v);
      if (s == "projection") c.solver.power.method = PowerMethod::kProjection;
      else if (s == "barrier") c.solver.power.method = PowerMethod::kBarrier;
      else throw std::invalid_argument("expected projection or barrier");
    };
    m["power.max_iterations"] = [=](ExperimentConfig& c, const std::string& v) {
      c.solver.power.max_iterations = positive_int(v, "must be at least 1");
    };
    m["power.rel_tol"] = [=](ExperimentConfig& c, const std::string& v) {
      c.solver.power.rel_tol = unit_open(v, "must lie in (0, 1)");
    };
    m["power.barrier_init"] = [=](ExperimentConfig& c, const std::string& v) {
      c.solver.power.barrier_init = positive_double(v, "must be positive");
    };
    m["power.barrier_decay"] = [=](ExperimentConfig& c, const std::string& v) {
      c.solver.power.barrier_decay = unit_open(v, "must lie in (0, 1)");
    };
    m["power.armijo"] = [=](ExperimentConfig& c, const std::string& v) {
      c.solver.power.armijo = unit_open(v, "must lie in (0, 1)");
    };
    m["power.shrink"] = [=](ExperimentConfig& c, const std::string& v) {
      c.solver.power.shrink = unit_open(v, "must lie in (0, 1)");
    };

    m["assoc.br_rule"] = [](ExperimentConfig& c, const std::string& v) {
      const std::string s = trim(v);
      if (s == "utility_consistent") c.solver.rule = BrRule::kUtilityConsistent;
      else if (s == "sinr_product") c.solver.rule = BrRule::kSinrProduct;
      else throw std::invalid_argument("expected utility_consistent or sinr_product");
    };
    m["assoc.max_rounds"] = [](ExperimentConfig& c, const std::string& v) {
      const int i = parse_number<int>(v);
      if (i < 0) throw std::invalid_argument("must be >= 0 (0 selects 10 x UE count)");
      c.solver.max_rounds = i;
    };
    m["assoc.relaxed_rel_tol"] = [=](ExperimentConfig& c, const std::string& v) {
      c.solver.relaxed.rel_tol = unit_open(v, "must lie in (0, 1)");
    };
    m["assoc.relaxed_max_iterations"] = [=](ExperimentConfig& c, const std::string& v) {
      c.solver.relaxed.max_iterations = positive_int(v, "must be at least 1");
    };

    m["orchestrator.rel_tol"] = [=](ExperimentConfig& c, const std::string& v) {
      c.solver.rel_tol = unit_open(v, "must lie in (0, 1)");
    };
    m["orchestrator.max_outer"] = [=](ExperimentConfig& c, const std::string& v) {
      c.solver.max_outer = positive_int(v, "must be at least 1");
    };
    m["orchestrator.order"] = [](ExperimentConfig& c, const std::string& v) {
      const std::string s = trim(v);
      if (s == "assoc_first") c.solver.order = StepOrder::kAssocFirst;
      else if (s == "power_first") c.solver.order = StepOrder::kPowerFirst;
      else throw std::invalid_argument("expected assoc_first or power_first");
    };

    m["campaign.base_seed"] = [](ExperimentConfig& c, const std::string& v) {
      c.campaign.base_seed = parse_number<std::uint64_t>(v);
    };
    m["campaign.replicas"] = [=](ExperimentConfig& c, const std::string& v) {
      c.campaign.replicas = positive_int(v, "must be at least 1");
    };
    m["campaign.seeds"] = [](ExperimentConfig& c, const std::string& v) {
      c.campaign.seeds.clear();
      for (const auto& s : split_list(v)) c.campaign.seeds.push_back(parse_number<std::uint64_t>(s));
    };
    m["campaign.ue_per_cell"] = [](ExperimentConfig& c, const std::string& v) {
      c.campaign.ue_per_cell.clear();
      for (const auto& s : split_list(v)) {
        const int n = parse_number<int>(s);
        if (n < 1 || n > 64) throw std::invalid_argument("sweep values must lie in [1, 64]");
        c.campaign.ue_per_cell.push_back(n);
      }
    };
    m["campaign.modes"] = [](ExperimentConfig& c, const std::string& v) {
      c.campaign.modes.clear();
      for (const auto& s : split_list(v)) c.campaign.modes.push_back(parse_mode(s));
      if (c.campaign.modes.empty()) throw std::invalid_argument("at least one mode required");
    };
    m["campaign.jobs"] = [](ExperimentConfig& c, const std::string& v) {
      const int i = parse_number<int>(v);
      if (i < 0) throw std::invalid_argument("must be >= 0 (0 selects hardware concurrency)");
      c.campaign.jobs = i;
    };
    m["campaign.output_dir"] = [](ExperimentConfig& c, const std::string& v) {
      const std::string s = trim(v);
      if (s.empty()) throw std::invalid_argument("must not be empty");
      c.campaign.output_dir = s;
    };
    return m;
  }();
  return table;
}

inline std::string format_dbm(double watt) {
  std::ostringstream os;
  os.precision(4);
  os << watt_to_dbm(watt) << " dBm";
  return os.str();
}

}  // namespace detail

// Parses and checks the whole text, collecting every problem instead of
// stopping at the first one. Diagnostics are prefixed with "section.key".
inline ConfigResult validate_config(const std::string& text) {
  ConfigResult res;
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    res.errors.push_back("line " + std::to_string(e.line()) + ": " + e.message());
    return res;
  }

  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      res.errors.push_back(section + ": key outside any section");
      continue;
    }
    for (const auto& [key, node] : body) entries.emplace_back(section + "." + key, node.data());
  }
  // A named path-loss model sets both coefficients; explicit coefficients
  // override it wherever they appear in the file.
  std::stable_partition(entries.begin(), entries.end(),
                        [](const auto& e) { return e.first == "scenario.pathloss_model"; });

  const auto& setters = detail::config_setters();
  for (const auto& [path, value] : entries) {
    const auto it = setters.find(path);
    if (it == setters.end()) {
      res.errors.push_back(path + ": unknown key");
      continue;
    }
    try {
      it->second(res.config, value);
    } catch (const std::exception& e) {
      res.errors.push_back(path + ": " + e.what());
    }
  }

  const auto& sc = res.config.scenario;
  if (!sc.limits.feasible_for(sc.channel.rb_count)) {
    std::ostringstream os;
    os.precision(4);
    os << "scenario.p_min_rb_dbm: infeasible power limits: " << sc.channel.rb_count << " RBs x "
       << detail::format_dbm(sc.limits.p_min_per_rb) << " = "
       << static_cast<double>(sc.channel.rb_count) * sc.limits.p_min_per_rb << " W exceeds p_max "
       << detail::format_dbm(sc.limits.p_max_per_hpn) << " = " << sc.limits.p_max_per_hpn << " W";
    res.errors.push_back(os.str());
  }
  const auto& seeds = res.config.campaign.seeds;
  for (std::size_t a = 0; a < seeds.size(); ++a)
    for (std::size_t b = a + 1; b < seeds.size(); ++b)
      if (seeds[a] == seeds[b]) res.errors.push_back("campaign.seeds: duplicate seed " + std::to_string(seeds[a]));
  return res;
}

inline std::string ue_range_label(const UeRange& r) {
  return r.lo == r.hi ? std::to_string(r.lo) : std::to_string(r.lo) + "-" + std::to_string(r.hi);
}

inline nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  const auto& s = c.scenario;
  j["scenario"] = {{"cell_count", s.cell_count},
                   {"isd_m", s.isd_m},
                   {"ues_per_cell", ue_range_label(s.ues_per_cell)},
                   {"pathloss_model", s.channel.pathloss.name},
                   {"pathloss_intercept_db", s.channel.pathloss.intercept_db},
                   {"pathloss_slope_db", s.channel.pathloss.slope_db},
                   {"shadowing_sigma_db", s.channel.shadowing_sigma_db},
                   {"rb_fading", s.channel.rb_fading},
                   {"rb_count", s.channel.rb_count},
                   {"noise_dbm", s.channel.noise_dbm},
                   {"noise_figure_db", s.channel.noise_figure_db},
                   {"p_max_dbm", watt_to_dbm(s.limits.p_max_per_hpn)},
                   {"p_min_rb_dbm", watt_to_dbm(s.limits.p_min_per_rb)}};
  const auto& p = c.solver.power;
  j["power"] = {{"method", to_string(p.method)},     {"max_iterations", p.max_iterations},
                {"rel_tol", p.rel_tol},              {"barrier_init", p.barrier_init},
                {"barrier_decay", p.barrier_decay},  {"armijo", p.armijo},
                {"shrink", p.shrink}};
  j["assoc"] = {{"br_rule", to_string(c.solver.rule)},
                {"max_rounds", c.solver.max_rounds},
                {"relaxed_rel_tol", c.solver.relaxed.rel_tol},
                {"relaxed_max_iterations", c.solver.relaxed.max_iterations}};
  j["orchestrator"] = {{"rel_tol", c.solver.rel_tol},
                       {"max_outer", c.solver.max_outer},
                       {"order", c.solver.order == StepOrder::kAssocFirst ? "assoc_first" : "power_first"}};
  std::vector<std::string> modes;
  for (auto m : c.campaign.modes) modes.push_back(to_string(m));
  j["campaign"] = {{"seeds", c.campaign.seed_list()},
                   {"ue_per_cell", c.campaign.ue_per_cell},
                   {"modes", modes},
                   {"output_dir", c.campaign.output_dir}};
  return j;
}

}  // namespace cellopt
