#include "powerutil/cli.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "powerutil/error.hpp"

namespace powerutil::cli {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::config_error, "config: " + key + ": " + what);
}

json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

// Flat view of the INI file that records every key it hands out.
class Reader {
 public:
  explicit Reader(const boost::property_tree::ptree& tree) {
    for (const auto& [name, node] : tree) {
      if (node.empty()) {
        values_[{"", name}] = node.data();
        continue;
      }
      for (const auto& [key, leaf] : node) values_[{name, key}] = leaf.data();
    }
  }

  bool has(const std::string& section, const std::string& key) const {
    return values_.count({section, key}) > 0;
  }

  bool has_section(const std::string& section) const {
    for (const auto& [k, v] : values_) {
      if (k.first == section) return true;
    }
    return false;
  }

  std::string text(const std::string& section, const std::string& key,
                   const std::optional<std::string>& fallback = std::nullopt) {
    const auto it = values_.find({section, key});
    if (it == values_.end()) {
      if (!fallback) config_error(name(section, key), "missing required key");
      record(section, key, *fallback);
      return *fallback;
    }
    used_.insert(it->first);
    record(section, key, it->second);
    return it->second;
  }

  double number(const std::string& section, const std::string& key,
                std::optional<double> fallback = std::nullopt) {
    const auto it = values_.find({section, key});
    if (it == values_.end()) {
      if (!fallback) config_error(name(section, key), "missing required key");
      record(section, key, num(*fallback));
      return *fallback;
    }
    used_.insert(it->first);
    const double x = parse_number(name(section, key), it->second);
    record(section, key, x);
    return x;
  }

  std::int64_t integer(const std::string& section, const std::string& key, std::int64_t fallback) {
    const auto it = values_.find({section, key});
    if (it == values_.end()) {
      record(section, key, fallback);
      return fallback;
    }
    used_.insert(it->first);
    const std::string& s = it->second;
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0' || errno != 0) {
      config_error(name(section, key), "expected an integer, got '" + s + "'");
    }
    record(section, key, static_cast<std::int64_t>(v));
    return v;
  }

  std::uint64_t unsigned_integer(const std::string& section, const std::string& key,
                                 std::uint64_t fallback) {
    const auto it = values_.find({section, key});
    if (it == values_.end()) {
      record(section, key, fallback);
      return fallback;
    }
    used_.insert(it->first);
    const std::string& s = it->second;
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || s[0] == '-' || *end != '\0' || errno != 0) {
      config_error(name(section, key), "expected an unsigned integer, got '" + s + "'");
    }
    record(section, key, static_cast<std::uint64_t>(v));
    return v;
  }

  bool flag(const std::string& section, const std::string& key, bool fallback) {
    const std::string s = text(section, key, fallback ? "true" : "false");
    bool v = false;
    if (s == "true" || s == "1" || s == "yes") {
      v = true;
    } else if (!(s == "false" || s == "0" || s == "no")) {
      config_error(name(section, key), "expected true or false, got '" + s + "'");
    }
    record(section, key, v);
    return v;
  }

  std::vector<double> list(const std::string& section, const std::string& key) {
    const std::string s = text(section, key);
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(name(section, key), trim(item)));
    record(section, key, out);
    return out;
  }

  /// Reads a key without recording it in the resolved config.
  std::optional<std::string> hidden(const std::string& section, const std::string& key) {
    const auto it = values_.find({section, key});
    if (it == values_.end()) return std::nullopt;
    used_.insert(it->first);
    return it->second;
  }

  void record(const std::string& section, const std::string& key, json value) {
    if (section.empty()) {
      resolved_[key] = std::move(value);
    } else {
      resolved_[section][key] = std::move(value);
    }
  }

  void reject_unused() const {
    for (const auto& [k, v] : values_) {
      if (used_.count(k) == 0) config_error(name(k.first, k.second), "unknown key");
    }
  }

  static std::string name(const std::string& section, const std::string& key) {
    return section.empty() ? key : section + "." + key;
  }

  static double parse_number(const std::string& key, const std::string& s) {
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(x)) {
      config_error(key, "expected a finite number, got '" + s + "'");
    }
    return x;
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }

  json& resolved() { return resolved_; }

 private:
  std::map<std::pair<std::string, std::string>, std::string> values_;
  std::set<std::pair<std::string, std::string>> used_;
  json resolved_ = json::object();
};

JumpScale read_scale(Reader& r, const std::string& prefix) {
  const std::string s = r.text("model", prefix + ".scale", "additive");
  if (s == "additive") return JumpScale::additive;
  if (s == "log") return JumpScale::log;
  config_error("model." + prefix + ".scale", "expected additive or log, got '" + s + "'");
}

// `explosion_C` supplies C when the file says "auto".
LevyMeasure read_measure(Reader& r, const std::string& prefix, double default_lambda,
                         const std::function<double()>& explosion_C) {
  const std::string key = prefix + ".";
  const std::string kind = r.text("model", key + "measure", "zero");
  try {
    if (kind == "zero") return LevyMeasure::zero();
    if (kind == "atoms") {
      const std::string s = r.text("model", key + "atoms");
      std::vector<Atom> atoms;
      std::stringstream ss(s);
      std::string item;
      json rec = json::array();
      while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
          config_error("model." + key + "atoms", "expected location:weight pairs");
        }
        const double loc = Reader::parse_number("model." + key + "atoms",
                                                Reader::trim(item.substr(0, colon)));
        const double w = Reader::parse_number("model." + key + "atoms",
                                              Reader::trim(item.substr(colon + 1)));
        atoms.push_back({loc, w});
        rec.push_back({loc, w});
      }
      r.record("model", key + "atoms", rec);
      return LevyMeasure::atoms(std::move(atoms));
    }
    if (kind == "kou") {
      const double intensity = r.number("model", key + "intensity");
      const double p_up = r.number("model", key + "p_up");
      const double up = r.number("model", key + "eta_up");
      const double down = r.number("model", key + "eta_down");
      return LevyMeasure::kou(intensity, p_up, up, down, read_scale(r, prefix));
    }
    if (kind == "normal") {
      const double intensity = r.number("model", key + "intensity");
      const double mean = r.number("model", key + "mean");
      const double sd = r.number("model", key + "stddev");
      return LevyMeasure::normal(intensity, mean, sd, read_scale(r, prefix));
    }
    if (kind == "gamma") {
      const double shape = r.number("model", key + "shape");
      const double rate = r.number("model", key + "rate");
      return LevyMeasure::gamma(shape, rate);
    }
    if (kind == "cp_exp") {
      const double intensity = r.number("model", key + "intensity");
      const double rate = r.number("model", key + "jump_rate");
      return LevyMeasure::compound_poisson_exp(intensity, rate);
    }
    if (kind == "explosion") {
      double C = 0.0;
      if (r.has("model", key + "C") && r.hidden("model", key + "C") == std::string("auto")) {
        C = explosion_C();
        r.record("model", key + "C", "auto");
        r.record("model", key + "C_resolved", num(C));
      } else {
        C = r.number("model", key + "C");
      }
      const double lambda = r.number("model", key + "lambda", default_lambda);
      return LevyMeasure::explosion(C, lambda);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config_error) throw;
    config_error("model." + key + "measure", e.what());
  }
  config_error("model." + key + "measure", "unknown measure '" + kind + "'");
}

LevyTriplet read_triplet(Reader& r, const std::string& prefix, Truncation default_tag,
                         double default_lambda = 1.0,
                         const std::function<double()>& explosion_C = {}) {
  const std::string key = prefix + ".";
  const double drift = r.number("model", key + "drift", 0.0);
  const double diffusion = r.number("model", key + "diffusion", 0.0);
  const std::string tag_name =
      r.text("model", key + "truncation", default_tag == Truncation::zero ? "zero" : "standard");
  Truncation tag = Truncation::standard;
  if (tag_name == "zero") {
    tag = Truncation::zero;
  } else if (tag_name != "standard") {
    config_error("model." + key + "truncation", "expected standard or zero");
  }
  LevyMeasure K = read_measure(r, prefix, default_lambda, explosion_C);
  try {
    return make_triplet(drift, diffusion, std::move(K), tag);
  } catch (const Error& e) {
    config_error("model." + key + "diffusion", e.what());
  }
}

FactorProcessSpec read_factor(Reader& r) {
  const std::string kind = r.text("model", "factor", "constant");
  if (kind == "constant") return ConstantFactor{r.number("model", "factor.y", 1.0)};
  if (kind == "ou") {
    const double lambda = r.number("model", "lambda");
    const double y0 = r.number("model", "y0");
    return OUSubordinator{lambda, read_triplet(r, "Z", Truncation::zero), y0};
  }
  if (kind == "path") {
    UserPath path{r.list("model", "path.times"), r.list("model", "path.values")};
    if (path.times.size() != path.values.size() || path.times.empty()) {
      config_error("model.path.values", "needs one value per time");
    }
    return path;
  }
  config_error("model.factor", "expected constant, ou or path, got '" + kind + "'");
}

Command read_command(Reader& r, const Overrides& o) {
  std::string name;
  if (o.command) {
    name = *o.command;
    r.hidden("", "command");
    r.record("", "command", name);
  } else {
    name = r.text("", "command", "solve");
  }
  const auto c = parse_command(name);
  if (!c) config_error("command", "unknown command '" + name + "'");
  return *c;
}

double initial_state(const FactorProcessSpec& f) {
  return std::visit(
      [](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ConstantFactor>) {
          return x.y;
        } else if constexpr (std::is_same_v<T, OUSubordinator>) {
          return x.y0;
        } else {
          return x.values.front();
        }
      },
      f);
}

const char* module_of(Command c) {
  switch (c) {
    case Command::solve:
      return "merton_solver";
    case Command::value:
    case Command::explode:
      return "closed_form_value";
    case Command::simulate:
      return "mc_oracle";
    case Command::verify:
      return "merton_solver";
  }
  return "cli";
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json estimate_json(const UtilityEstimate& e) {
  return {{"mean", num(e.mean)},
          {"std_error", num(e.std_error)},
          {"n_effective", e.n_effective},
          {"n_discarded", e.n_discarded},
          {"reliable", e.reliable}};
}

json solve_result(const OptimalFractionResult& r, double y) {
  return {{"pi", num(r.pi)},         {"location", to_string(r.location)},
          {"g_residual", num(r.g_residual)}, {"g_scale", num(r.g_scale)},
          {"alpha", num(r.alpha_value)},     {"y", num(y)}};
}

const TimeChangedLevy& require_time_changed(const RunConfig& cfg, const char* what) {
  const auto* tc = std::get_if<TimeChangedLevy>(&cfg.model.family);
  if (tc == nullptr) {
    throw Error(ErrorCode::not_closed_form,
                std::string(what) + ": closed form needs the time_changed family");
  }
  require(tc->mu == 0.0, ErrorCode::not_closed_form,
          std::string(what) + ": closed form needs mu = 0");
  return *tc;
}

json result_for(const RunConfig& cfg, std::string& csv) {
  const FactorModelSpec& model = cfg.model;
  const Preferences& prefs = model.prefs;
  const double y0 = initial_state(factor_of(model));
  switch (cfg.command) {
    case Command::solve: {
      const auto r = optimal_fraction(local_triplet(model, y0), prefs.p);
      json out = solve_result(r, y0);
      const FactorProcessSpec factor = factor_of(model);
      {
        if (const auto* path = std::get_if<UserPath>(&factor)) {
          const auto fp = optimal_fraction_path(model, path->times, path->values);
          out["fraction_path"] = {{"time", fp.time}, {"y", fp.y}, {"pi", fp.pi}};
          std::ostringstream os;
          os << "time,y,pi,S,V,alpha\n";
          for (std::size_t k = 0; k < fp.time.size(); ++k) {
            const double a = growth_exponent_alpha(local_triplet(model, fp.y[k]), prefs.p, fp.pi[k]);
            os << format_double(fp.time[k]) << ',' << format_double(fp.y[k]) << ','
               << format_double(fp.pi[k]) << ",,," << format_double(a) << '\n';
          }
          csv = os.str();
        }
      }
      return out;
    }
    case Command::value: {
      const auto& tc = require_time_changed(cfg, "value");
      const double pi = optimal_fraction(tc.B, prefs.p).pi;
      const ValueResult v = value_closed_form(tc, pi, prefs);
      json out = {{"pi", num(pi)},
                  {"C", num(v.C)},
                  {"finite", v.finite},
                  {"explosion_time", num(v.explosion_time)}};
      out["value"] = v.finite ? num(v.value) : json("inf");
      return out;
    }
    case Command::explode: {
      const auto& tc = require_time_changed(cfg, "explode");
      const double pi = optimal_fraction(tc.B, prefs.p).pi;
      const double C = constant_C(tc.B, pi, prefs.p);
      const double t_inf = explosion_time(tc.Z, C, tc.lambda);
      json out = {{"pi", num(pi)},
                  {"C", num(C)},
                  {"explosion_time", num(t_inf)},
                  {"T", num(prefs.T)},
                  {"finite_at_T", value_finite_at(tc.Z, C, tc.lambda, prefs.T)}};
      const auto* ex = std::get_if<ExplosionMeasure>(&tc.Z.jumps.kind());
      if (ex != nullptr && ex->C == C && ex->lambda == tc.lambda && prefs.p < 1.0) {
        out["bound"] = num(explosion_example_bound(C, tc.lambda, tc.y0, prefs));
      }
      return out;
    }
    case Command::simulate: {
      require(cfg.sim.has_value(), ErrorCode::config_error,
              "config: simulation: section required for simulate");
      const SimConfig& sim = *cfg.sim;
      StrategyRule rule;
      if (cfg.pi) {
        const double pi = *cfg.pi;
        rule = [pi](double) { return pi; };
      } else {
        rule = fraction_rule(model);
      }
      const UtilityEstimate e = estimate_utility(model, rule, sim);
      json out = estimate_json(e);
      out["strategy"] = cfg.pi ? "constant" : "optimal";
      out["utility_of_initial_wealth"] = num(power_utility(prefs.v, prefs.p));
      if (cfg.output.format == Format::csv) csv = path_csv(simulate_path(model, rule, sim, 0));
      return out;
    }
    case Command::verify: {
      const LevyTriplet t = local_triplet(model, y0);
      const auto r = optimal_fraction(t, prefs.p);
      const ConditionReport c = verify_conditions(t, prefs.p, r.pi);
      const double oracle =
          grid_oracle_optimal_fraction(t, prefs.p, cfg.grid_resolution / 10.0, cfg.grid_window);
      const double delta = std::abs(oracle - r.pi);
      return {{"solver", solve_result(r, y0)},
              {"conditions",
               {{"cond1", c.cond1},
                {"cond2", c.cond2},
                {"cond3", c.cond3},
                {"cond3_residual", num(c.cond3_residual)},
                {"cond4_alpha_finite", c.cond4_alpha_finite},
                {"alpha", num(c.alpha)},
                {"all_pass", c.all_pass()}}},
              {"oracle_pi", num(oracle)},
              {"delta_pi", num(delta)},
              {"grid_resolution", num(cfg.grid_resolution)},
              {"agree", delta < cfg.grid_resolution}};
    }
  }
  return nullptr;
}

json empty_report(const std::string& command, json config) {
  return {{"command", command},
          {"config", std::move(config)},
          {"result", nullptr},
          {"warnings", json::array()},
          {"errors", json::array()}};
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::solve:
      return "solve";
    case Command::value:
      return "value";
    case Command::explode:
      return "explode";
    case Command::simulate:
      return "simulate";
    case Command::verify:
      return "verify";
  }
  return "unknown";
}

std::optional<Command> parse_command(const std::string& name) {
  for (Command c : {Command::solve, Command::value, Command::explode, Command::simulate,
                    Command::verify}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

RunConfig parse_config(const std::string& text, const Overrides& overrides) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::config_error, std::string("config: ") + e.what());
  }
  Reader r(tree);
  RunConfig cfg;
  cfg.command = read_command(r, overrides);

  Preferences prefs;
  prefs.p = r.number("preferences", "p", 2.0);
  prefs.v = r.number("preferences", "v", 1.0);
  prefs.T = r.number("preferences", "T", 1.0);
  try {
    validate(prefs);
  } catch (const Error& e) {
    config_error("preferences", e.what());
  }

  const std::string family = r.text("model", "family");
  const double S0 = r.number("model", "S0", 1.0);
  ModelFamily fam;
  if (family == "genbs") {
    const double mu0 = r.number("model", "mu0", 0.0);
    const double mu1 = r.number("model", "mu1", 0.0);
    const double var0 = r.number("model", "var0", 0.0);
    const double var1 = r.number("model", "var1", 0.0);
    fam = genbs_affine(mu0, mu1, var0, var1, read_factor(r));
  } else if (family == "bns") {
    BNS m;
    m.kappa = r.number("model", "kappa", 0.0);
    m.delta = r.number("model", "delta", 0.0);
    m.lambda = r.number("model", "lambda");
    m.y0 = r.number("model", "y0");
    m.Z = read_triplet(r, "Z", Truncation::zero);
    fam = m;
  } else if (family == "integrated_levy") {
    LevyTriplet B = read_triplet(r, "B", Truncation::standard);
    fam = IntegratedLevy{std::move(B), read_factor(r)};
  } else if (family == "time_changed") {
    TimeChangedLevy m;
    m.mu = r.number("model", "mu", 0.0);
    m.lambda = r.number("model", "lambda");
    m.y0 = r.number("model", "y0");
    m.B = read_triplet(r, "B", Truncation::standard);
    auto auto_C = [&]() {
      try {
        return constant_C(m.B, optimal_fraction(m.B, prefs.p).pi, prefs.p);
      } catch (const Error& e) {
        config_error("model.Z.C", std::string("cannot resolve auto: ") + e.what());
      }
    };
    m.Z = read_triplet(r, "Z", Truncation::zero, m.lambda, auto_C);
    fam = m;
  } else {
    config_error("model.family",
                 "expected genbs, bns, integrated_levy or time_changed, got '" + family + "'");
  }
  cfg.model = FactorModelSpec{std::move(fam), prefs, S0};
  try {
    validate(cfg.model);
  } catch (const Error& e) {
    config_error("model", e.what());
  }

  if (r.has_section("simulation") || cfg.command == Command::simulate) {
    SimConfig sim;
    sim.n_paths = r.integer("simulation", "n_paths", sim.n_paths);
    sim.n_steps = static_cast<int>(r.integer("simulation", "n_steps", sim.n_steps));
    sim.seed = r.unsigned_integer("simulation", "seed", sim.seed);
    if (overrides.seed) {
      sim.seed = *overrides.seed;
      r.record("simulation", "seed", sim.seed);
    }
    sim.small_jump_cutoff = r.number("simulation", "small_jump_cutoff", sim.small_jump_cutoff);
    sim.antithetic = r.flag("simulation", "antithetic", sim.antithetic);
    sim.budget = r.integer("simulation", "budget", sim.budget);
    if (const auto w = r.hidden("simulation", "workers")) {
      sim.workers = static_cast<int>(Reader::parse_number("simulation.workers", *w));
    }
    if (overrides.workers) sim.workers = *overrides.workers;
    const std::string strategy = r.text("simulation", "strategy", "optimal");
    if (strategy == "constant") {
      cfg.pi = r.number("simulation", "pi");
    } else if (strategy != "optimal") {
      config_error("simulation.strategy", "expected optimal or constant");
    }
    try {
      validate(sim);
    } catch (const Error& e) {
      config_error("simulation", e.what());
    }
    cfg.sim = sim;
  }
  cfg.grid_resolution = r.number("verify", "grid_resolution", 1e-6);
  cfg.grid_window = r.number("verify", "grid_window", 50.0);
  if (!(cfg.grid_resolution > 0.0) || !(cfg.grid_window > 0.0)) {
    config_error("verify.grid_resolution", "resolution and window must be positive");
  }

  cfg.output.path = overrides.out ? *overrides.out : r.text("output", "path", "");
  if (overrides.out) r.hidden("output", "path");
  const std::string fmt = overrides.format ? *overrides.format : r.text("output", "format", "json");
  if (overrides.format) r.hidden("output", "format");
  if (fmt == "csv") {
    cfg.output.format = Format::csv;
  } else if (fmt != "json") {
    config_error("output.format", "expected csv or json, got '" + fmt + "'");
  }
  r.record("output", "format", fmt);
  r.record("output", "path", cfg.output.path);
  r.reject_unused();
  cfg.resolved = r.resolved();
  return cfg;
}

RunConfig load_config(const std::string& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_error, "config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

RunOutput run(const RunConfig& config) {
  RunOutput out;
  out.report = empty_report(to_string(config.command), config.resolved);
  if (const auto w = nflvr_warning(config.model)) out.report["warnings"].push_back(*w);
  try {
    out.report["result"] = result_for(config, out.csv);
  } catch (const Error& e) {
    const std::string prefix = e.code() == ErrorCode::config_error ? "" : std::string(module_of(config.command)) + ": ";
    out.report["errors"].push_back({{"code", powerutil::to_string(e.code())}, {"message", prefix + e.what()}});
  } catch (const std::exception& e) {
    out.report["errors"].push_back(
        {{"code", "INTERNAL"}, {"message", std::string(module_of(config.command)) + ": " + e.what()}});
  }
  if (!out.report["errors"].empty()) {
    out.report["result"] = nullptr;
    out.csv.clear();
  }
  out.exit_status = out.report["errors"].empty() ? 0 : 1;
  return out;
}

RunOutput failed_run(const std::string& command, const std::string& code,
                     const std::string& message) {
  RunOutput out;
  out.report = empty_report(command, json::object());
  out.report["errors"].push_back({{"code", code}, {"message", message}});
  out.exit_status = 1;
  return out;
}

std::vector<std::string> validate_report(const json& report) {
  std::vector<std::string> problems;
  auto fail = [&](const std::string& s) { problems.push_back(s); };
  if (!report.is_object()) return {"report is not an object"};
  for (const char* key : {"command", "config", "result", "warnings", "errors"}) {
    if (!report.contains(key)) fail(std::string("missing key '") + key + "'");
  }
  if (!problems.empty()) return problems;
  for (const auto& [key, value] : report.items()) {
    if (key != "command" && key != "config" && key != "result" && key != "warnings" &&
        key != "errors") {
      fail("unexpected key '" + key + "'");
    }
  }
  if (!report["command"].is_string()) fail("command must be a string");
  if (!report["config"].is_object()) fail("config must be an object");
  if (!report["warnings"].is_array()) {
    fail("warnings must be an array");
  } else {
    for (const auto& w : report["warnings"]) {
      if (!w.is_string()) fail("warnings must hold strings");
    }
  }
  static const std::set<std::string> codes = {
      "INVALID_ARGUMENT", "DIVERGENT",     "QUADRATURE_FAILURE", "OUT_OF_DOMAIN",
      "INADMISSIBLE_MODEL", "NO_BRACKET",  "BANKRUPTCY_STEP",    "UNRELIABLE",
      "NOT_CLOSED_FORM",  "CONFIG_ERROR",  "INTERNAL"};
  if (!report["errors"].is_array()) {
    fail("errors must be an array");
    return problems;
  }
  for (const auto& e : report["errors"]) {
    if (!e.is_object() || !e.contains("code") || !e.contains("message") || e.size() != 2 ||
        !e["code"].is_string() || !e["message"].is_string()) {
      fail("error records must be {code, message} strings");
      continue;
    }
    if (codes.count(e["code"].get<std::string>()) == 0) fail("unknown error code");
  }
  const json& result = report["result"];
  if (!report["errors"].empty()) {
    if (!result.is_null()) fail("result must be null when errors are present");
    return problems;
  }
  if (!result.is_object()) {
    fail("result must be an object when there are no errors");
    return problems;
  }
  auto number_like = [](const json& v) {
    return v.is_number() || (v.is_string() && (v == "inf" || v == "-inf" || v == "nan"));
  };
  auto need = [&](const json& obj, std::initializer_list<const char*> keys, bool numeric) {
    for (const char* k : keys) {
      if (!obj.contains(k)) {
        fail(std::string("result lacks '") + k + "'");
      } else if (numeric && !number_like(obj[k])) {
        fail(std::string("result field '") + k + "' must be numeric");
      }
    }
  };
  const auto command = report["command"].is_string() ? parse_command(report["command"]) : std::nullopt;
  if (!command) {
    fail("unknown command");
    return problems;
  }
  switch (*command) {
    case Command::solve:
      need(result, {"pi", "g_residual", "g_scale", "alpha", "y"}, true);
      need(result, {"location"}, false);
      break;
    case Command::value:
      need(result, {"pi", "C", "explosion_time", "value"}, true);
      need(result, {"finite"}, false);
      break;
    case Command::explode:
      need(result, {"pi", "C", "explosion_time", "T"}, true);
      need(result, {"finite_at_T"}, false);
      break;
    case Command::simulate:
      need(result, {"mean", "std_error", "n_effective", "n_discarded"}, true);
      need(result, {"reliable", "strategy"}, false);
      break;
    case Command::verify:
      need(result, {"oracle_pi", "delta_pi", "grid_resolution"}, true);
      need(result, {"solver", "conditions", "agree"}, false);
      break;
  }
  return problems;
}

std::string render(const json& report) { return report.dump(2) + "\n"; }

std::string path_csv(const SimulatedPath& path) {
  std::ostringstream os;
  os << "time,y,pi,S,V,alpha\n";
  for (std::size_t k = 0; k < path.time.size(); ++k) {
    os << format_double(path.time[k]) << ',' << format_double(path.y[k]) << ','
       << format_double(path.pi[k]) << ',' << format_double(path.S[k]) << ','
       << format_double(path.V[k]) << ',' << format_double(path.alpha[k]) << '\n';
  }
  return os.str();
}

}  // namespace powerutil::cli
