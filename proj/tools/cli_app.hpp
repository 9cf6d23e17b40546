#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hetexp/mc_oracle.hpp"
#include "hetexp/order_stats.hpp"
#include "hetexp/orders.hpp"
#include "hetexp/suites.hpp"
#include "hetexp/symfun.hpp"
#include "json.hpp"

namespace hetexp::cli {

using nlohmann::json;

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFails = 1;
inline constexpr int kConfigError = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct JobConfig {
  std::vector<double> rates;
  std::optional<double> gamma;
  std::optional<int> k, n, m;
  std::optional<std::string> relation;
  int grid_size = 512;
  std::uint64_t seed = 0;
  std::optional<std::string> output;
  std::string suite = "all";
  int instances = 50;
  std::size_t draws = 1000;
};

namespace detail {

template <class T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key) || j[key].is_null()) return;
  try {
    out = j[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

template <class T>
void read_field(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key) || j[key].is_null()) return;
  T v{};
  read_field(j, key, v);
  out = v;
}

inline void merge_file(JobConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file '" + path + "' cannot be opened");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  read_field(j, "rates", cfg.rates);
  read_field(j, "gamma", cfg.gamma);
  read_field(j, "k", cfg.k);
  read_field(j, "n", cfg.n);
  read_field(j, "m", cfg.m);
  read_field(j, "relation", cfg.relation);
  read_field(j, "grid_size", cfg.grid_size);
  read_field(j, "seed", cfg.seed);
  read_field(j, "output", cfg.output);
  read_field(j, "suite", cfg.suite);
  read_field(j, "instances", cfg.instances);
  read_field(j, "draws", cfg.draws);
}

inline json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline json optional_number(const std::optional<double>& v) {
  return v ? number_or_null(*v) : json(nullptr);
}

inline RateVector require_rates(const JobConfig& cfg) {
  if (cfg.rates.empty()) throw ConfigError("field 'rates' is required");
  try {
    return RateVector(cfg.rates);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("field 'rates': ") + e.what());
  }
}

inline int require_int(const std::optional<int>& v, const char* name) {
  if (!v) throw ConfigError(std::string("field '") + name + "' is required");
  return *v;
}

inline double require_gamma(const JobConfig& cfg) {
  if (!cfg.gamma) throw ConfigError("field 'gamma' is required");
  if (!(*cfg.gamma > 0.0) || !std::isfinite(*cfg.gamma)) {
    throw ConfigError("field 'gamma' must be a positive finite number");
  }
  return *cfg.gamma;
}

// Sample size: --n if given (must match the rates), else the rate count.
inline int sample_size(const JobConfig& cfg) {
  if (!cfg.rates.empty()) {
    const int len = static_cast<int>(cfg.rates.size());
    if (cfg.n && *cfg.n != len) throw ConfigError("field 'n' differs from the length of 'rates'");
    return len;
  }
  const int n = require_int(cfg.n, "n");
  if (n < 1) throw ConfigError("field 'n' must be >= 1");
  return n;
}

inline void check_indices(const JobConfig& cfg, int n) {
  const int k = require_int(cfg.k, "k");
  if (k < 1 || k > n) throw ConfigError("field 'k' must satisfy 1 <= k <= n");
  if (cfg.m && (*cfg.m < 1 || *cfg.m >= k)) {
    throw ConfigError("field 'm' must satisfy 1 <= m < k");
  }
}

inline json to_json(const ThresholdReport& r) {
  json j;
  j["critical_gamma"] = r.critical_gamma;
  j["tau_star"] = optional_number(r.tau_star);
  j["tau_low"] = optional_number(r.tau_low);
  j["method"] = to_string(r.method);
  j["k"] = r.k;
  j["n"] = r.n;
  j["m"] = r.m ? json(*r.m) : json(nullptr);
  return j;
}

inline json to_json(const OrderVerdict& v) {
  json j;
  j["relation"] = to_string(v.relation);
  j["holds"] = v.holds;
  j["margin"] = number_or_null(v.margin);
  j["tolerance"] = v.tolerance;
  j["points"] = v.points;
  j["skipped"] = v.skipped;
  if (v.witness) {
    j["witness"] = {{"x_prev", v.witness->x_prev},
                    {"x", v.witness->x},
                    {"lhs", number_or_null(v.witness->lhs)},
                    {"rhs", number_or_null(v.witness->rhs)}};
  } else {
    j["witness"] = nullptr;
  }
  j["truncated_at"] = optional_number(v.truncated_at);
  j["cv_lhs"] = optional_number(v.cv_lhs);
  j["cv_rhs"] = optional_number(v.cv_rhs);
  return j;
}

template <Distribution L, Distribution R>
OrderVerdict run_check(Relation rel, const L& lhs, const R& rhs, const CheckOptions& opt) {
  switch (rel) {
    case Relation::st: return check_st(lhs, rhs, opt);
    case Relation::hr: return check_hr(lhs, rhs, opt);
    case Relation::disp: return check_disp(lhs, rhs, opt);
    case Relation::star: return check_star(lhs, rhs, opt);
    case Relation::lorenz: return check_lorenz(lhs, rhs, opt);
  }
  throw ConfigError("field 'relation' is unknown");
}

// Heterogeneous statistic when rates are given, otherwise homogeneous.
inline OrderStatSpec order_spec(const JobConfig& cfg) {
  const int n = sample_size(cfg);
  check_indices(cfg, n);
  if (!cfg.rates.empty()) return OrderStatSpec::heterogeneous(require_rates(cfg), *cfg.k);
  return OrderStatSpec::homogeneous(require_gamma(cfg), n, *cfg.k);
}

inline SpacingSpec spacing_spec(const JobConfig& cfg) {
  const int n = sample_size(cfg);
  check_indices(cfg, n);
  if (!cfg.rates.empty()) return SpacingSpec::heterogeneous(require_rates(cfg), *cfg.m, *cfg.k);
  return SpacingSpec::homogeneous(require_gamma(cfg), n, *cfg.m, *cfg.k);
}

inline std::string statistic_name(const JobConfig& cfg) {
  return cfg.m ? "spacing" : "order_stat";
}

inline json cmd_threshold(const JobConfig& cfg) {
  const auto rates = require_rates(cfg);
  check_indices(cfg, sample_size(cfg));
  if (cfg.m) return to_json(threshold_spacing(rates, *cfg.m, *cfg.k));
  return to_json(threshold_order_stat(rates, *cfg.k));
}

inline std::pair<json, int> cmd_check(const JobConfig& cfg) {
  if (!cfg.relation) throw ConfigError("field 'relation' is required");
  const auto rel = parse_relation(*cfg.relation);
  if (!rel) throw ConfigError("field 'relation' must be one of st, hr, disp, star, lorenz");
  const auto rates = require_rates(cfg);
  const double gamma = require_gamma(cfg);
  const int n = sample_size(cfg);
  check_indices(cfg, n);
  CheckOptions opt;
  opt.base_points = static_cast<std::size_t>(cfg.grid_size);
  OrderVerdict v;
  if (cfg.m) {
    v = run_check(*rel, SpacingDistribution(SpacingSpec::homogeneous(gamma, n, *cfg.m, *cfg.k)),
                  SpacingDistribution(SpacingSpec::heterogeneous(rates, *cfg.m, *cfg.k)), opt);
  } else {
    v = run_check(*rel, OrderStatistic(OrderStatSpec::homogeneous(gamma, n, *cfg.k)),
                  OrderStatistic(OrderStatSpec::heterogeneous(rates, *cfg.k)), opt);
  }
  json j = to_json(v);
  j["statistic"] = statistic_name(cfg);
  j["gamma"] = gamma;
  j["k"] = *cfg.k;
  j["n"] = n;
  j["m"] = cfg.m ? json(*cfg.m) : json(nullptr);
  return {j, v.holds ? kOk : kFails};
}

template <Distribution D>
void write_curve(const D& d, int points, std::ostream& out) {
  out << "x,cdf,pdf,hazard\n";
  for (int i = 0; i < points; ++i) {
    const double u = (i + 0.5) / points;
    const double x = quantile(d, u);
    const TailPair t = d.evaluate(x);
    const double f = d.pdf(x);
    out << json(x).dump() << ',' << json(t.lower).dump() << ',' << json(f).dump() << ','
        << json(f / t.upper).dump() << '\n';
  }
}

inline void cmd_curve(const JobConfig& cfg, std::ostream& out) {
  if (cfg.grid_size < 1) throw ConfigError("field 'grid_size' must be >= 1");
  if (cfg.m) {
    write_curve(SpacingDistribution(spacing_spec(cfg)), cfg.grid_size, out);
  } else {
    write_curve(OrderStatistic(order_spec(cfg)), cfg.grid_size, out);
  }
}

inline json cmd_sample(const JobConfig& cfg) {
  if (cfg.draws < 1) throw ConfigError("field 'draws' must be >= 1");
  if (cfg.draws > kMaxDraws) throw ConfigError("field 'draws' exceeds the sampling limit");
  const SampleBatch b = cfg.m ? sample_spacing(spacing_spec(cfg), cfg.draws, cfg.seed)
                              : sample_order_stat(order_spec(cfg), cfg.draws, cfg.seed);
  return {{"statistic", b.statistic}, {"seed", b.seed}, {"draws", b.draws}};
}

inline std::pair<json, int> cmd_verify_paper(const JobConfig& cfg) {
  std::vector<std::string> names;
  if (cfg.suite == "all") {
    names = suites::suite_names();
  } else {
    const auto& a = suites::suite_names();
    const auto& b = suites::extra_suite_names();
    if (std::find(a.begin(), a.end(), cfg.suite) == a.end() &&
        std::find(b.begin(), b.end(), cfg.suite) == b.end()) {
      throw ConfigError("field 'suite' names an unknown suite '" + cfg.suite + "'");
    }
    names = {cfg.suite};
  }
  if (cfg.instances < 1) throw ConfigError("field 'instances' must be >= 1");
  suites::SuiteConfig sc;
  sc.seed = cfg.seed;
  sc.instances = cfg.instances;
  if (cfg.n) {
    if (*cfg.n < sc.min_n || *cfg.n > kMaxSymbolicRates) {
      throw ConfigError("field 'n' must lie in [2, 16] for verify-paper");
    }
    sc.max_n = *cfg.n;
    sc.spacing_max_n = std::min(sc.spacing_max_n, *cfg.n);
  }
  json list = json::array();
  bool all_ok = true;
  for (const auto& name : names) {
    const auto r = suites::run_suite(name, sc);
    json stats = json::object();
    for (const auto& [key, value] : r->stats) {
      if (key != "seconds") stats[key] = number_or_null(value);
    }
    list.push_back({{"suite", r->name},
                    {"ok", r->ok()},
                    {"passed", r->passed},
                    {"failed", r->failed},
                    {"worst_margin", number_or_null(r->worst_margin)},
                    {"worst_case", r->worst_case},
                    {"failures", r->failures},
                    {"stats", stats}});
    all_ok = all_ok && r->ok();
  }
  json j = {{"seed", cfg.seed},
            {"instances", cfg.instances},
            {"max_n", sc.max_n},
            {"suites", list},
            {"all_passed", all_ok}};
  return {j, all_ok ? kOk : kFails};
}

}  // namespace detail

/// Runs one subcommand; args exclude the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Order statistics of heterogeneous exponential samples"};
  app.require_subcommand(1);

  std::string config_path, rates_text, relation, suite, out_path;
  double gamma = 0.0;
  int k = 0, n = 0, m = 0, grid = 512, instances = 100;
  std::uint64_t seed = 0;
  std::size_t draws = 1000;

  struct Flags {
    CLI::Option *config, *rates, *gamma, *k, *n, *m, *relation, *grid, *seed, *out, *suite,
        *instances, *draws;
  };
  std::vector<std::pair<CLI::App*, Flags>> subs;
  auto add = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    Flags f{};
    f.config = s->add_option("--config", config_path, "JSON config file");
    f.rates = s->add_option("--rates", rates_text, "comma-separated component rates");
    f.gamma = s->add_option("--gamma", gamma, "homogeneous rate");
    f.k = s->add_option("--k", k, "order statistic index");
    f.n = s->add_option("--n", n, "sample size (verify-paper: largest n)");
    f.m = s->add_option("--m", m, "lower index of a spacing");
    f.relation = s->add_option("--relation", relation, "st, hr, disp, star or lorenz");
    f.grid = s->add_option("--grid", grid, "grid size");
    f.seed = s->add_option("--seed", seed, "random seed");
    f.out = s->add_option("--out", out_path, "output file");
    f.suite = s->add_option("--suite", suite, "suite name or all");
    f.instances = s->add_option("--instances", instances, "random instances per suite");
    f.draws = s->add_option("--draws", draws, "Monte Carlo draws");
    subs.emplace_back(s, f);
  };
  add("threshold", "critical homogeneous rate");
  add("check", "check an order relation between Y and X");
  add("curve", "CSV of cdf, pdf and hazard");
  add("sample", "Monte Carlo draws");
  add("verify-paper", "run the randomized verification suites");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  Flags f{};
  for (const auto& [s, flags] : subs) {
    if (s == chosen) f = flags;
  }
  const std::string cmd = chosen->get_name();

  try {
    JobConfig cfg;
    if (f.config->count()) detail::merge_file(cfg, config_path);
    if (f.rates->count()) {
      cfg.rates.clear();
      std::stringstream ss(rates_text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          std::size_t used = 0;
          cfg.rates.push_back(std::stod(item, &used));
          if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
          throw ConfigError("field 'rates' has a malformed entry '" + item + "'");
        }
      }
      if (cfg.rates.empty()) throw ConfigError("field 'rates' is empty");
    }
    if (f.gamma->count()) cfg.gamma = gamma;
    if (f.k->count()) cfg.k = k;
    if (f.n->count()) cfg.n = n;
    if (f.m->count()) cfg.m = m;
    if (f.relation->count()) cfg.relation = relation;
    if (f.grid->count()) cfg.grid_size = grid;
    if (f.seed->count()) cfg.seed = seed;
    if (f.out->count()) cfg.output = out_path;
    if (f.suite->count()) cfg.suite = suite;
    if (f.instances->count()) cfg.instances = instances;
    if (f.draws->count()) cfg.draws = draws;
    if (cfg.grid_size < 2 && cmd == "check") throw ConfigError("field 'grid_size' must be >= 2");

    std::ostringstream body;
    int code = kOk;
    if (cmd == "threshold") {
      body << detail::cmd_threshold(cfg).dump(2) << '\n';
    } else if (cmd == "check") {
      auto [j, c] = detail::cmd_check(cfg);
      body << j.dump(2) << '\n';
      code = c;
    } else if (cmd == "curve") {
      detail::cmd_curve(cfg, body);
    } else if (cmd == "sample") {
      body << detail::cmd_sample(cfg).dump(2) << '\n';
    } else {
      auto [j, c] = detail::cmd_verify_paper(cfg);
      body << j.dump(2) << '\n';
      code = c;
    }

    if (cfg.output && *cfg.output != "-") {
      std::ofstream file(*cfg.output);
      if (!file) throw ConfigError("field 'output': cannot open '" + *cfg.output + "'");
      file << body.str();
    } else {
      out << body.str();
    }
    return code;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
  }
  return kConfigError;
}

}  // namespace hetexp::cli
