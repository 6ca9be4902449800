#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "corrlab/corrspec.hpp"
#include "corrlab/error.hpp"
#include "corrlab/grid.hpp"
#include "corrlab/pauli.hpp"
#include "corrlab/states.hpp"

namespace corrlab {

using json = nlohmann::ordered_json;

inline constexpr const char* kConfigEnvVar = "CORRLAB_CONFIG";

// Schema (INI):
//   [grid]     n, length, hbar, mass           n and length default per command
//   [state]    kind = gaussian|hermite|random, x0, p0, alpha, beta, order, seed, smoothness
//   [evolve]   t_start, t_end, steps, dispersion_scale
//   [spectrum] c_half_range, c_points, bins
//   [pauli]    trials, first_seed, max_iter, tol, eps_marginal, eps_fidelity, method
//   [run]      threads
//   [output]   csv, json                      empty means stdout
struct RunConfig {
  struct Grid {
    std::optional<std::size_t> n;
    std::optional<double> length;
    double hbar = 1.0;
    double mass = 1.0;
  } grid;
  struct State {
    std::string kind = "gaussian";
    double x0 = 0.0;
    double p0 = 0.0;
    double alpha = 1.0;
    double beta = 1.0;
    int order = 0;
    std::uint64_t seed = 1;
    double smoothness = 1.0;
  } state;
  struct Evolve {
    double t_start = 0.0;
    double t_end = 4.0;
    std::size_t steps = 41;
    double dispersion_scale = 1.0;
  } evolve;
  struct Spectrum {
    double c_half_range = 20.0;
    std::size_t c_points = 1024;
    std::size_t bins = kDefaultBins;
  } spectrum;
  struct Pauli {
    std::size_t trials = 100;
    std::uint64_t first_seed = 1;
    std::size_t max_iter = 5000;
    double tol = 1e-8;
    double eps_marginal = kPartnerMarginalEps;
    double eps_fidelity = kPartnerFidelityEps;
    std::string method = "accelerated";
  } pauli;
  std::size_t threads = 1;
  std::string csv_path;
  std::string json_path;
};

struct GridDefaults {
  std::size_t n;
  double length;
};

/// Grid used by each command when [grid] n / length are not set.
inline GridDefaults grid_defaults(const std::string& command) {
  if (command == "evolve") return {1024, 120.0};
  if (command == "spectrum" || command == "transform") return {2048, 40.0};
  return {512, 40.0};
}

namespace detail {

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "grid.n",           "grid.length",         "grid.hbar",          "grid.mass",
      "state.kind",       "state.x0",            "state.p0",           "state.alpha",
      "state.beta",       "state.order",         "state.seed",         "state.smoothness",
      "evolve.t_start",   "evolve.t_end",        "evolve.steps",       "evolve.dispersion_scale",
      "spectrum.c_half_range", "spectrum.c_points", "spectrum.bins",
      "pauli.trials",     "pauli.first_seed",    "pauli.max_iter",     "pauli.tol",
      "pauli.eps_marginal", "pauli.eps_fidelity", "pauli.method",
      "run.threads",      "output.csv",          "output.json"};
  return keys;
}

template <class T>
void read_key(const boost::property_tree::ptree& tree, const std::string& key, T& out) {
  const auto node = tree.get_child_optional(boost::property_tree::ptree::path_type(key, '.'));
  if (!node) return;
  try {
    out = node->get_value<T>();
  } catch (const boost::property_tree::ptree_error&) {
    throw Error(ErrorKind::Config, "config key " + key + " has invalid value '" + node->data() + "'");
  }
}

template <class T>
void read_key(const boost::property_tree::ptree& tree, const std::string& key, std::optional<T>& out) {
  if (!tree.get_child_optional(boost::property_tree::ptree::path_type(key, '.'))) return;
  T value{};
  read_key(tree, key, value);
  out = value;
}

inline void check_known(const boost::property_tree::ptree& tree) {
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw Error(ErrorKind::Config, "config key '" + section + "' must live in a section");
    for (const auto& [key, value] : body) {
      (void)value;
      if (!known_keys().count(section + "." + key))
        throw Error(ErrorKind::Config, "unknown config key " + section + "." + key);
    }
  }
}

}  // namespace detail

inline boost::property_tree::ptree read_config_file(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorKind::Config, std::string("cannot read config: ") + e.what());
  }
  return tree;
}

/// Applies "section.key=value" on top of the tree.
inline void apply_override(boost::property_tree::ptree& tree, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error(ErrorKind::Config, "override must look like section.key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  if (!detail::known_keys().count(key)) throw Error(ErrorKind::Config, "unknown config key " + key);
  tree.put(boost::property_tree::ptree::path_type(key, '.'), assignment.substr(eq + 1));
}

inline void validate(const RunConfig& c) {
  auto need = [](bool ok, const std::string& msg) { detail::require(ok, ErrorKind::Config, msg); };
  if (c.grid.n) need(*c.grid.n >= 16 && *c.grid.n % 2 == 0, "grid.n must be even and at least 16");
  if (c.grid.length) need(*c.grid.length > 0.0, "grid.length must be positive");
  need(c.grid.hbar > 0.0 && c.grid.mass > 0.0, "grid.hbar and grid.mass must be positive");
  need(c.state.kind == "gaussian" || c.state.kind == "hermite" || c.state.kind == "random",
       "state.kind must be gaussian, hermite or random");
  need(c.state.alpha > 0.0, "state.alpha must be positive");
  need(c.state.order >= 0, "state.order must be nonnegative");
  need(c.state.smoothness > 0.0, "state.smoothness must be positive");
  need(c.evolve.steps >= 3, "evolve.steps must be at least 3");
  need(c.evolve.t_end > c.evolve.t_start, "evolve.t_end must exceed evolve.t_start");
  need(c.spectrum.c_half_range > 0.0 && c.spectrum.c_points >= 2, "spectrum c-grid is degenerate");
  need(c.spectrum.bins >= 1 && c.spectrum.c_points % c.spectrum.bins == 0,
       "spectrum.bins must divide spectrum.c_points");
  need(c.pauli.trials >= 1, "pauli.trials must be positive");
  need(c.pauli.tol > 0.0 && c.pauli.eps_marginal > 0.0 && c.pauli.eps_fidelity > 0.0,
       "pauli tolerances must be positive");
  need(c.pauli.method == "accelerated" || c.pauli.method == "error_reduction",
       "pauli.method must be accelerated or error_reduction");
  need(c.threads >= 1, "run.threads must be positive");
}

inline RunConfig config_from_tree(const boost::property_tree::ptree& tree) {
  detail::check_known(tree);
  RunConfig c;
  using detail::read_key;
  read_key(tree, "grid.n", c.grid.n);
  read_key(tree, "grid.length", c.grid.length);
  read_key(tree, "grid.hbar", c.grid.hbar);
  read_key(tree, "grid.mass", c.grid.mass);
  read_key(tree, "state.kind", c.state.kind);
  read_key(tree, "state.x0", c.state.x0);
  read_key(tree, "state.p0", c.state.p0);
  read_key(tree, "state.alpha", c.state.alpha);
  read_key(tree, "state.beta", c.state.beta);
  read_key(tree, "state.order", c.state.order);
  read_key(tree, "state.seed", c.state.seed);
  read_key(tree, "state.smoothness", c.state.smoothness);
  read_key(tree, "evolve.t_start", c.evolve.t_start);
  read_key(tree, "evolve.t_end", c.evolve.t_end);
  read_key(tree, "evolve.steps", c.evolve.steps);
  read_key(tree, "evolve.dispersion_scale", c.evolve.dispersion_scale);
  read_key(tree, "spectrum.c_half_range", c.spectrum.c_half_range);
  read_key(tree, "spectrum.c_points", c.spectrum.c_points);
  read_key(tree, "spectrum.bins", c.spectrum.bins);
  read_key(tree, "pauli.trials", c.pauli.trials);
  read_key(tree, "pauli.first_seed", c.pauli.first_seed);
  read_key(tree, "pauli.max_iter", c.pauli.max_iter);
  read_key(tree, "pauli.tol", c.pauli.tol);
  read_key(tree, "pauli.eps_marginal", c.pauli.eps_marginal);
  read_key(tree, "pauli.eps_fidelity", c.pauli.eps_fidelity);
  read_key(tree, "pauli.method", c.pauli.method);
  read_key(tree, "run.threads", c.threads);
  read_key(tree, "output.csv", c.csv_path);
  read_key(tree, "output.json", c.json_path);
  validate(c);
  return c;
}

/// File named by `path`, else by $CORRLAB_CONFIG, else built-in defaults; then overrides.
inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  boost::property_tree::ptree tree;
  std::string source = path;
  if (source.empty()) {
    if (const char* env = std::getenv(kConfigEnvVar)) source = env;
  }
  if (!source.empty()) tree = read_config_file(source);
  for (const auto& o : overrides) apply_override(tree, o);
  return config_from_tree(tree);
}

inline SpatialGrid resolve_grid(const RunConfig& c, const std::string& command) {
  const GridDefaults d = grid_defaults(command);
  try {
    return make_grid(c.grid.n.value_or(d.n), c.grid.length.value_or(d.length), c.grid.hbar, c.grid.mass);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
}

inline StateVector make_configured_state(const RunConfig& c, const SpatialGrid& grid) {
  const auto& s = c.state;
  if (s.kind == "hermite") return hermite_gaussian(grid, s.order, s.alpha, s.x0);
  if (s.kind == "random") return random_state(grid, s.seed, s.smoothness);
  return gaussian(grid, s.x0, s.p0, s.alpha, s.beta);
}

inline CGrid configured_cgrid(const RunConfig& c) {
  return make_cgrid(c.spectrum.c_half_range, c.spectrum.c_points);
}

/// Resolved configuration as echoed into reports. Thread count and output
/// paths are execution details and are left out so reports stay byte-identical.
inline json config_echo(const RunConfig& c, const std::string& command) {
  const SpatialGrid g = resolve_grid(c, command);
  json j;
  j["command"] = command;
  j["grid"] = {{"n", g.n}, {"length", g.length}, {"hbar", g.hbar}, {"mass", g.mass}};
  j["state"] = {{"kind", c.state.kind}, {"x0", c.state.x0},       {"p0", c.state.p0},
                {"alpha", c.state.alpha}, {"beta", c.state.beta}, {"order", c.state.order},
                {"seed", c.state.seed},  {"smoothness", c.state.smoothness}};
  j["evolve"] = {{"t_start", c.evolve.t_start},
                 {"t_end", c.evolve.t_end},
                 {"steps", c.evolve.steps},
                 {"dispersion_scale", c.evolve.dispersion_scale}};
  j["spectrum"] = {{"c_half_range", c.spectrum.c_half_range},
                   {"c_points", c.spectrum.c_points},
                   {"bins", c.spectrum.bins}};
  j["pauli"] = {{"trials", c.pauli.trials},       {"first_seed", c.pauli.first_seed},
                {"max_iter", c.pauli.max_iter},   {"tol", c.pauli.tol},
                {"eps_marginal", c.pauli.eps_marginal}, {"eps_fidelity", c.pauli.eps_fidelity},
                {"method", c.pauli.method}};
  return j;
}

}  // namespace corrlab
