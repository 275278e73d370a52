// spinseq: command-line front end for the spin-sequence simulator.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "spinseq/config.hpp"

using namespace spinseq;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output;
  int threads = 0;
  bool print_config = false;
};

void add_common(CLI::App* sub, CommonArgs& a) {
  sub->add_option("-c,--config", a.config_path, "JSON run config (schema/config.schema.json)");
  sub->add_option("-s,--set", a.overrides, "override a config field, e.g. scheme.omega_rabi=100")
      ->take_all();
  sub->add_option("-o,--output", a.output, "output path prefix (default: spinseq)");
  sub->add_option("-j,--threads", a.threads,
                  "worker threads for scans; overrides SPINSEQ_THREADS");
  sub->add_flag("--print-config", a.print_config,
                "print the effective config with defaults filled in and exit");
}

json error_json(const Error& e) {
  return {{"error", std::string(to_string(e.code()))}, {"message", e.what()}, {"path", e.path()}};
}

int run_mode(const std::string& mode, const CommonArgs& a) {
  try {
    json doc = json::object();
    if (!a.config_path.empty()) {
      std::ifstream f(a.config_path);
      if (!f) throw Error(ErrorCode::Io, "cannot read config '" + a.config_path + "'", "config");
      std::stringstream ss;
      ss << f.rdbuf();
      try {
        doc = json::parse(ss.str());
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::BadValue, std::string("invalid JSON: ") + e.what(), "$");
      }
    }
    doc["mode"] = mode;
    if (!a.output.empty()) doc["output"] = a.output;
    for (const auto& o : a.overrides) apply_override(doc, o);

    const RunConfig cfg = parse_config(doc);
    if (a.print_config) {
      std::cout << config_to_json(cfg).dump(2) << "\n";
      return 0;
    }
    for (const auto& w : cfg.warnings()) std::cerr << "warning: " << w << "\n";
    const RunResult r = run(cfg, a.threads);
    json summary = r.summary;
    summary["files"] = r.files;
    (r.exit_code == 0 ? std::cout : std::cerr) << summary.dump(2) << "\n";
    return r.exit_code;
  } catch (const Error& e) {
    std::cerr << error_json(e).dump(2) << "\n";
    return 2;
  }
}

void print_schemes() {
  json rows = json::array();
  for (const auto& s : scheme_table()) {
    rows.push_back({{"scheme", std::string(to_string(s.kind))},
                    {"phip", s.phip_name},
                    {"dnp", s.dnp_name},
                    {"description", s.description}});
  }
  std::cout << rows.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coherent polarization-transfer sequences on coupled spin-1/2 systems"};
  app.set_version_flag("--version", SPINSEQ_VERSION);
  app.require_subcommand(1);
  app.footer(
      "Frequencies are angular and normalized to a_perp = 1 unless units=hz.\n"
      "Defaults: grid delta/omega in [-0.5, 0.5] and rabi error in [-0.3, 0.3], 41 x 41;\n"
      "n_reps 0 selects the first transfer maximum; threads from SPINSEQ_THREADS.");

  CommonArgs args;
  const char* modes[][2] = {
      {"simulate", "propagate one schedule and write its trajectory CSV"},
      {"scan", "polarization heatmap over detuning and Rabi error"},
      {"multiscan", "heatmaps with a_perp and omega_I repeatedly halved"},
      {"verify", "check the pseudo-spin identities and the three-spin/two-spin equivalence"},
      {"astar", "effective couplings by first maximum and cycle logarithm"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& m : modes) {
    CLI::App* sub = app.add_subcommand(m[0], m[1]);
    add_common(sub, args);
    subs.push_back(sub);
  }
  CLI::App* schemes = app.add_subcommand("schemes", "list the supported schemes");

  CLI11_PARSE(app, argc, argv);

  if (schemes->parsed()) {
    print_schemes();
    return 0;
  }
  for (CLI::App* sub : subs) {
    if (sub->parsed()) return run_mode(sub->get_name(), args);
  }
  return 1;
}
