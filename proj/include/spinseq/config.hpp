#pragma once

// Run configuration for the command-line front end.
//
// Config documents are JSON objects; see schema/config.schema.json. All
// frequencies are angular and normalized to A = 1 unless "units" is "hz",
// in which case every frequency field is multiplied by 2 pi on ingest.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spinseq/robustness.hpp"

namespace spinseq {

enum class RunMode { Simulate, Scan, Multiscan, Verify, Astar };
std::string_view to_string(RunMode m);
RunMode parse_mode(std::string_view s);

struct GridSpec {
  double delta_min = -0.5;
  double delta_max = 0.5;
  int delta_n = 41;
  double rabi_min = -0.3;
  double rabi_max = 0.3;
  int rabi_n = 41;

  ScanGrid grid() const;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct RunConfig {
  RunMode mode = RunMode::Simulate;
  std::optional<DnpParams> dnp;
  std::optional<PhipParams> phip;
  SchemeSpec scheme;
  bool all_schemes = false;  // astar over every repeated scheme
  ErrorModel error;
  GridSpec grid;
  int a_halvings = 1;
  int omega_halvings = 1;
  std::string output = "spinseq";
  int threads = 0;  // 0: SPINSEQ_THREADS or hardware concurrency
  int n_max = 0;
  int ramp_substeps = 1;
  int verify_segments = 100;

  // Two-spin parameters, mapped from the three-spin ones when needed.
  DnpParams system() const;
  std::vector<std::string> warnings() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Throws MissingField / BadValue carrying the offending key path.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config(std::string_view text);

// Fully expanded config in angular units; parse_config(config_to_json(c)) == c.
nlohmann::json config_to_json(const RunConfig& c);

// Applies "a.b.c=value" to the document; value is read as JSON when it
// parses, otherwise as a string.
void apply_override(nlohmann::json& doc, std::string_view assignment);

// Flag (if > 0), then SPINSEQ_THREADS, then the config value, then the
// hardware concurrency.
int resolve_threads(int flag, int config_value);

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> files;
  nlohmann::json summary;
};

// Executes the configured mode and writes its output files under the
// config's output prefix. Failures are reported in <prefix>_error.json and
// a nonzero exit code rather than thrown.
RunResult run(const RunConfig& cfg, int threads_flag = 0);

// Identity and equivalence report used by the verify mode.
nlohmann::json verify_report(const PhipParams& p, int segments);

}  // namespace spinseq
