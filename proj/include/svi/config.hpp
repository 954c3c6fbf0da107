#ifndef SVI_CONFIG_HPP
#define SVI_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "svi/error.hpp"
#include "svi/oracle.hpp"
#include "svi/problems.hpp"
#include "svi/solvers.hpp"

namespace svi {

// Key-value configuration with [section] headers and '#' comments; one file
// describes one experiment end to end so a run is reproducible from the
// config alone.

class config_file {
 public:
  static config_file parse_string(const std::string& text, const std::string& origin = "<string>") {
    config_file cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        require(line.back() == ']', errc::invalid_parameter,
                origin + ":" + std::to_string(lineno) + ": unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      require(eq != std::string::npos, errc::invalid_parameter,
              origin + ":" + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      require(!key.empty(), errc::invalid_parameter,
              origin + ":" + std::to_string(lineno) + ": empty key");
      cfg.values_[section + "." + key] = val;
    }
    return cfg;
  }

  static config_file parse_file(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), errc::io_error, "cannot open config " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_string(buf.str(), path);
  }

  bool has(const std::string& section, const std::string& key) const {
    return values_.count(section + "." + key) > 0;
  }

  std::string get(const std::string& section, const std::string& key) const {
    auto it = values_.find(section + "." + key);
    require(it != values_.end(), errc::invalid_parameter,
            "missing config key [" + section + "] " + key);
    return it->second;
  }

  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& dflt) const {
    auto it = values_.find(section + "." + key);
    return it == values_.end() ? dflt : it->second;
  }

  double get_num(const std::string& section, const std::string& key, double dflt) const {
    if (!has(section, key)) return dflt;
    return parse_num(get(section, key), section + "." + key);
  }

  double get_num(const std::string& section, const std::string& key) const {
    return parse_num(get(section, key), section + "." + key);
  }

  long long get_int(const std::string& section, const std::string& key, long long dflt) const {
    if (!has(section, key)) return dflt;
    return parse_int(get(section, key), section + "." + key);
  }

  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t dflt) const {
    if (!has(section, key)) return dflt;
    const std::string s = get(section, key);
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      fail(errc::invalid_parameter, "bad integer for " + section + "." + key + ": " + s);
    }
  }

  const std::map<std::string, std::string>& all() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static double parse_num(const std::string& s, const std::string& what) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      require(pos == s.size(), errc::invalid_parameter, "trailing junk in " + what + ": " + s);
      return v;
    } catch (const error&) {
      throw;
    } catch (const std::exception&) {
      fail(errc::invalid_parameter, "bad number for " + what + ": " + s);
    }
  }

  static long long parse_int(const std::string& s, const std::string& what) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(s, &pos);
      require(pos == s.size(), errc::invalid_parameter, "trailing junk in " + what + ": " + s);
      return v;
    } catch (const error&) {
      throw;
    } catch (const std::exception&) {
      fail(errc::invalid_parameter, "bad integer for " + what + ": " + s);
    }
  }

  std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------------------
// Typed experiment description assembled from a config file.

enum class algorithm_kind { algorithm1, egls, mpsa, deterministic_eg };

struct experiment_config {
  // problem
  std::string problem_kind = "affine";
  int n = 20;
  int firms = 10;
  int markets = 10;
  double condition = 10.0;
  double lipschitz = 1.2;
  double noise = 0.1;
  double box_halfwidth = 2.0;
  std::uint64_t instance_seed = 1;

  // geometry
  std::string geometry_kind = "euclidean";
  double alpha = 2.0;
  double sigma = 0.01;
  double coord_bound = 1.0;

  // algorithm + schedule
  algorithm_kind algorithm = algorithm_kind::algorithm1;
  algorithm1_config a1;
  egls_config egls;
  mpsa_config mpsa;
  double det_gamma = 0.1;
  sample_schedule schedule = sample_schedule::power08();

  // run
  long long iterations = 1000;
  int paths = 20;
  std::uint64_t base_seed = 1;
  bool record_gap = true;
  std::string label;
};

inline sample_schedule parse_schedule(const config_file& c) {
  const std::string kind = c.get_or("schedule", "kind", "power08");
  sample_schedule s;
  if (kind == "constant") {
    s = sample_schedule::constant(c.get_int("schedule", "n", 1));
  } else if (kind == "power08") {
    s = sample_schedule::power08(c.get_int("schedule", "multiplier", 1));
  } else if (kind == "power32") {
    s = sample_schedule::power32(c.get_num("schedule", "d", 1.0),
                                 c.get_int("schedule", "multiplier", 1));
  } else if (kind == "log_power") {
    s = sample_schedule::log_power(c.get_int("schedule", "n", 1),
                                   c.get_num("schedule", "lambda", 2.05),
                                   c.get_num("schedule", "b", 1e-4),
                                   c.get_num("schedule", "inner_scale", 1.0));
  } else {
    fail(errc::invalid_parameter, "unknown schedule kind: " + kind);
  }
  s.validate();
  return s;
}

inline experiment_config parse_experiment(const config_file& c) {
  experiment_config e;
  e.problem_kind = c.get_or("problem", "kind", "affine");
  e.n = static_cast<int>(c.get_int("problem", "n", 20));
  e.firms = static_cast<int>(c.get_int("problem", "firms", 10));
  e.markets = static_cast<int>(c.get_int("problem", "markets", 10));
  e.condition = c.get_num("problem", "condition", 10.0);
  e.lipschitz = c.get_num("problem", "lipschitz", 1.2);
  e.noise = c.get_num("problem", "noise", 0.1);
  e.box_halfwidth = c.get_num("problem", "box_halfwidth", 2.0);
  e.instance_seed = c.get_u64("problem", "instance_seed", 1);

  e.geometry_kind = c.get_or("geometry", "kind", "euclidean");
  e.alpha = c.get_num("geometry", "alpha", 2.0);
  e.sigma = c.get_num("geometry", "sigma", 0.01);
  e.coord_bound = c.get_num("geometry", "coord_bound", 1.0);

  const std::string alg = c.get_or("algorithm", "kind", "algorithm1");
  if (alg == "algorithm1")
    e.algorithm = algorithm_kind::algorithm1;
  else if (alg == "egls")
    e.algorithm = algorithm_kind::egls;
  else if (alg == "mpsa")
    e.algorithm = algorithm_kind::mpsa;
  else if (alg == "deterministic")
    e.algorithm = algorithm_kind::deterministic_eg;
  else
    fail(errc::invalid_parameter, "unknown algorithm kind: " + alg);

  e.schedule = parse_schedule(c);
  e.iterations = c.get_int("run", "iterations", 1000);
  e.paths = static_cast<int>(c.get_int("run", "paths", 20));
  e.base_seed = c.get_u64("run", "base_seed", 1);
  e.record_gap = c.get_int("run", "record_gap", 1) != 0;
  e.label = c.get_or("run", "label", alg);
  require(e.iterations >= 1 && e.paths >= 1, errc::invalid_parameter,
          "run.iterations and run.paths must be >= 1");

  e.a1.gamma0 = c.get_num("algorithm", "gamma0", 0.99);
  e.a1.theta = c.get_num("algorithm", "theta", 0.01);
  e.a1.alpha = e.alpha;
  e.a1.schedule = e.schedule;
  e.a1.max_iterations = e.iterations;
  e.a1.linesearch_cap = static_cast<int>(c.get_int("algorithm", "linesearch_cap", 100));
  e.a1.regen_cap = static_cast<int>(c.get_int("algorithm", "regen_cap", 5));
  e.a1.fixed_point_tol = c.get_num("algorithm", "fixed_point_tol", 0.0);
  e.a1.prox_tol = c.get_num("algorithm", "prox_tol", 1e-8);

  e.egls.gamma0 = e.a1.gamma0;
  e.egls.theta = e.a1.theta;
  e.egls.mu = c.get_num("algorithm", "mu", 0.3);
  e.egls.schedule = e.schedule;
  e.egls.max_iterations = e.iterations;
  e.egls.linesearch_cap = e.a1.linesearch_cap;
  e.egls.prox_tol = e.a1.prox_tol;

  e.mpsa.gamma0 = e.a1.gamma0;
  e.mpsa.max_iterations = e.iterations;
  e.mpsa.prox_tol = e.a1.prox_tol;
  e.mpsa.vrf_gamma0 = e.a1.gamma0;
  e.mpsa.vrf_theta = e.a1.theta;

  e.det_gamma = c.get_num("algorithm", "gamma", 0.1);
  return e;
}

inline problem_instance build_problem(const experiment_config& e) {
  if (e.problem_kind == "affine") {
    affine_problem_options o;
    o.n = e.n;
    o.condition = e.condition;
    o.lipschitz = e.lipschitz;
    o.noise = e.noise;
    o.box_halfwidth = e.box_halfwidth;
    return make_affine(o, e.instance_seed);
  }
  if (e.problem_kind == "fractional_quadratic")
    return make_fractional_quadratic(e.n, e.instance_seed);
  if (e.problem_kind == "fractional_nonlinear")
    return make_fractional_nonlinear(e.n, e.instance_seed);
  if (e.problem_kind == "nash_cournot")
    return make_nash_cournot(e.firms, e.markets, e.instance_seed);
  fail(errc::invalid_parameter, "unknown problem kind: " + e.problem_kind);
}

inline distance_generator build_geometry(const experiment_config& e) {
  if (e.geometry_kind == "euclidean") return distance_generator::euclidean(e.alpha);
  if (e.geometry_kind == "shifted_entropy")
    return distance_generator::shifted_entropy(e.alpha, e.sigma, e.coord_bound);
  if (e.geometry_kind == "p_norm")
    return distance_generator::p_norm(e.n, e.alpha, e.coord_bound);
  fail(errc::invalid_parameter, "unknown geometry kind: " + e.geometry_kind);
}

}  // namespace svi

#endif  // SVI_CONFIG_HPP
