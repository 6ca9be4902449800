// corrlab_cli: experiment commands over the corrlab library.
//
//   corrlab_cli <evolve|spectrum|pauli|check|transform|moments> [options]
//
// Config comes from --config, else $CORRLAB_CONFIG, else built-in defaults;
// --set section.key=value and the shortcut flags override it. CSV goes to
// --csv (or stdout); JSON goes to --json, else stdout, else stderr when the
// CSV already took stdout. Exit codes: 0 ok, 1 precondition/config error,
// 2 acceptance failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "corrlab/corrlab.hpp"

namespace {

struct Flags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::size_t> n, threads, trials;
  std::optional<double> length, alpha, beta;
  std::optional<std::string> kind, csv, json;
  std::optional<std::uint64_t> seed;
  std::vector<int> criteria;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("-c,--config", f.config, "INI config file (default: $CORRLAB_CONFIG)");
  sub->add_option("--set", f.sets, "override, section.key=value (repeatable)");
  sub->add_option("--n", f.n, "grid points");
  sub->add_option("--length", f.length, "box length");
  sub->add_option("--kind", f.kind, "state kind: gaussian, hermite, random");
  sub->add_option("--alpha", f.alpha, "Gaussian width parameter");
  sub->add_option("--beta", f.beta, "Gaussian chirp");
  sub->add_option("--seed", f.seed, "random state seed");
  sub->add_option("--trials", f.trials, "pauli search trials");
  sub->add_option("--threads", f.threads, "worker threads (outputs do not depend on it)");
  sub->add_option("--csv", f.csv, "CSV output path");
  sub->add_option("--json", f.json, "JSON output path");
}

std::vector<std::string> overrides(const Flags& f) {
  std::vector<std::string> out = f.sets;
  auto put = [&](const char* key, const auto& v) {
    if (v) {
      std::ostringstream os;
      os.precision(17);
      os << *v;
      out.push_back(std::string(key) + "=" + os.str());
    }
  };
  put("grid.n", f.n);
  put("grid.length", f.length);
  put("state.kind", f.kind);
  put("state.alpha", f.alpha);
  put("state.beta", f.beta);
  put("state.seed", f.seed);
  put("pauli.trials", f.trials);
  put("run.threads", f.threads);
  put("output.csv", f.csv);
  put("output.json", f.json);
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw corrlab::Error(corrlab::ErrorKind::Config, "cannot write " + path);
  os << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlation-observable toolkit: dynamics, correlation spectra, Pauli partners"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"evolve", "track moments of a freely evolving state (CSV + JSON)"},
      {"spectrum", "sigma(c) by transform and matrix routes (CSV + JSON)"},
      {"pauli", "alternating-projection Pauli partner search (JSON)"},
      {"check", "acceptance suite (JSON); exit 2 on any failure"},
      {"transform", "raw correlation transform amplitudes (CSV + JSON)"},
      {"moments", "moments of a single state (JSON)"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, flags);
    if (std::string(name) == "check") sub->add_option("--criterion", flags.criteria, "run only these criteria");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    const corrlab::RunConfig cfg = corrlab::load_config(flags.config, overrides(flags));
    corrlab::CommandOutput out;
    if (command == "evolve") out = corrlab::cmd_evolve(cfg);
    else if (command == "spectrum") out = corrlab::cmd_spectrum(cfg);
    else if (command == "pauli") out = corrlab::cmd_pauli(cfg);
    else if (command == "transform") out = corrlab::cmd_transform(cfg);
    else if (command == "moments") out = corrlab::cmd_moments(cfg);
    else out = corrlab::cmd_check(cfg, flags.criteria);

    const std::string report = out.report.dump(2) + "\n";
    bool stdout_taken = false;
    if (!out.csv.empty()) {
      if (cfg.csv_path.empty()) {
        std::cout << out.csv;
        stdout_taken = true;
      } else {
        write_file(cfg.csv_path, out.csv);
      }
    }
    if (!cfg.json_path.empty()) write_file(cfg.json_path, report);
    else (stdout_taken ? std::cerr : std::cout) << report;
    return out.exit_code;
  } catch (const corrlab::Error& e) {
    std::cout << corrlab::error_json(e).dump(2) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cout << corrlab::json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump(2) << "\n";
    return 1;
  }
}
