#include "spinseq/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <thread>

#include "spinseq/analysis.hpp"

namespace spinseq {

namespace {

using nlohmann::json;

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

// Reads fields of one JSON object, remembering which keys were consumed so
// that leftovers can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw Error(ErrorCode::BadValue, "expected an object", path_.empty() ? "$" : path_);
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& child(const std::string& key) {
    if (!j_.contains(key)) throw Error(ErrorCode::MissingField, "missing field", join(path_, key));
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt,
                bool allow_inf = false) {
    if (!j_.contains(key)) {
      if (fallback) return *fallback;
      throw Error(ErrorCode::MissingField, "missing field", join(path_, key));
    }
    used_.insert(key);
    const json& v = j_.at(key);
    if (allow_inf && v.is_string() && v.get<std::string>() == "inf") {
      return std::numeric_limits<double>::infinity();
    }
    if (!v.is_number()) throw Error(ErrorCode::BadValue, "expected a number", join(path_, key));
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw Error(ErrorCode::BadValue, "value is not finite", join(path_, key));
    return x;
  }

  int integer(const std::string& key, int fallback) {
    if (!j_.contains(key)) return fallback;
    used_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_number_integer()) {
      throw Error(ErrorCode::BadValue, "expected an integer", join(path_, key));
    }
    return v.get<int>();
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    if (!j_.contains(key)) {
      if (fallback) return *fallback;
      throw Error(ErrorCode::MissingField, "missing field", join(path_, key));
    }
    used_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_string()) throw Error(ErrorCode::BadValue, "expected a string", join(path_, key));
    return v.get<std::string>();
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!used_.count(item.key())) {
        throw Error(ErrorCode::BadValue, "unknown key", join(path_, item.key()));
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// Re-tags errors raised by validators with the config path they belong to.
template <class F>
void with_path(const std::string& prefix, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    throw Error(e.code(), e.what(), e.path().empty() ? prefix : join(prefix, e.path()));
  }
}

json inf_or_number(double v) { return std::isinf(v) ? json("inf") : json(v); }

}  // namespace

std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::Simulate: return "simulate";
    case RunMode::Scan: return "scan";
    case RunMode::Multiscan: return "multiscan";
    case RunMode::Verify: return "verify";
    case RunMode::Astar: return "astar";
  }
  return "unknown";
}

RunMode parse_mode(std::string_view s) {
  for (RunMode m : {RunMode::Simulate, RunMode::Scan, RunMode::Multiscan, RunMode::Verify,
                    RunMode::Astar}) {
    if (s == to_string(m)) return m;
  }
  throw Error(ErrorCode::BadValue, "unknown mode '" + std::string(s) + "'", "mode");
}

ScanGrid GridSpec::grid() const {
  return ScanGrid::linspace(delta_min, delta_max, delta_n, rabi_min, rabi_max, rabi_n);
}

DnpParams RunConfig::system() const {
  if (dnp) return *dnp;
  if (phip) return map_phip_to_dnp(*phip).dnp;
  throw Error(ErrorCode::MissingField, "no system parameters", "dnp");
}

std::vector<std::string> RunConfig::warnings() const {
  std::vector<std::string> w;
  if (phip) {
    w = map_phip_to_dnp(*phip).warnings;
  }
  if (dnp || phip) {
    const DnpParams p = system();
    for (auto& s : p.regime_warnings()) w.push_back(std::move(s));
    if (mode != RunMode::Verify && !all_schemes) {
      for (auto& s : scheme.warnings(p)) w.push_back(std::move(s));
    }
  }
  return w;
}

RunConfig parse_config(const json& doc) {
  ObjectReader top(doc, "");
  RunConfig c;
  c.mode = parse_mode(top.text("mode"));
  const std::string units = top.text("units", "angular");
  if (units != "angular" && units != "hz") {
    throw Error(ErrorCode::BadValue, "units must be 'angular' or 'hz'", "units");
  }
  const double f = units == "hz" ? 2.0 * std::numbers::pi : 1.0;

  if (top.has("dnp") && top.has("phip")) {
    throw Error(ErrorCode::BadValue, "give either dnp or phip parameters, not both", "phip");
  }
  if (top.has("dnp")) {
    ObjectReader r(top.child("dnp"), "dnp");
    DnpParams p{f * r.number("omega_I"), f * r.number("a_perp"), f * r.number("omega_S", 0.0)};
    r.finish();
    with_path("dnp", [&] { p.validate(); });
    c.dnp = p;
  } else if (top.has("phip")) {
    ObjectReader r(top.child("phip"), "phip");
    PhipParams p{f * r.number("omega_I0"), f * r.number("omega_S"), f * r.number("j"),
                 f * r.number("j1"), f * r.number("j2")};
    r.finish();
    with_path("phip", [&] { p.validate(); });
    c.phip = p;
  } else {
    throw Error(ErrorCode::MissingField, "one of dnp or phip is required", "dnp");
  }
  if (c.mode == RunMode::Verify && !c.phip) {
    throw Error(ErrorCode::BadValue, "verify mode needs phip parameters", "phip");
  }

  if (top.has("scheme")) {
    ObjectReader r(top.child("scheme"), "scheme");
    const std::string name = r.text("name", c.mode == RunMode::Astar ? "all" : std::string{});
    if (name.empty()) throw Error(ErrorCode::MissingField, "missing field", "scheme.name");
    if (name == "all") {
      if (c.mode != RunMode::Astar) {
        throw Error(ErrorCode::BadValue, "'all' is only valid in astar mode", "scheme.name");
      }
      c.all_schemes = true;
    } else {
      try {
        c.scheme.scheme = parse_scheme(name);
      } catch (const Error& e) {
        throw Error(e.code(), e.what(), "scheme.name");
      }
    }
    SchemeSpec& s = c.scheme;
    s.omega_rabi = f * r.number("omega_rabi", std::nullopt, true);
    s.n_reps = r.integer("n_reps", s.n_reps);
    s.pulses_per_train = r.integer("pulses_per_train", s.pulses_per_train);
    s.sweep_lo = r.number("sweep_lo", s.sweep_lo);
    s.sweep_hi = r.number("sweep_hi", s.sweep_hi);
    s.sweep_segments = r.integer("sweep_segments", s.sweep_segments);
    s.sweep_rate = f * r.number("sweep_rate", s.sweep_rate / f);
    s.sweep_duration = r.number("sweep_duration", s.sweep_duration);
    s.phase_shift = r.number("phase_shift", s.phase_shift);
    s.tau_factor = r.number("tau_factor", s.tau_factor);
    r.finish();
    with_path("scheme", [&] { s.validate(); });
  } else if (c.mode != RunMode::Verify) {
    throw Error(ErrorCode::MissingField, "missing field", "scheme");
  }

  if (top.has("error")) {
    ObjectReader r(top.child("error"), "error");
    c.error.delta = f * r.number("delta", 0.0);
    c.error.rabi_rel = r.number("rabi_rel", 0.0);
    r.finish();
  }
  if (top.has("grid")) {
    ObjectReader r(top.child("grid"), "grid");
    GridSpec& g = c.grid;
    g.delta_min = r.number("delta_min", g.delta_min);
    g.delta_max = r.number("delta_max", g.delta_max);
    g.delta_n = r.integer("delta_n", g.delta_n);
    g.rabi_min = r.number("rabi_min", g.rabi_min);
    g.rabi_max = r.number("rabi_max", g.rabi_max);
    g.rabi_n = r.integer("rabi_n", g.rabi_n);
    r.finish();
    with_path("grid", [&] { (void)g.grid(); });
  }
  if (top.has("halvings")) {
    ObjectReader r(top.child("halvings"), "halvings");
    c.a_halvings = r.integer("a_perp", c.a_halvings);
    c.omega_halvings = r.integer("omega_I", c.omega_halvings);
    r.finish();
    if (c.a_halvings < 0 || c.omega_halvings < 0) {
      throw Error(ErrorCode::BadValue, "halvings must be >= 0", "halvings");
    }
  }
  c.output = top.text("output", c.output);
  if (c.output.empty()) throw Error(ErrorCode::BadValue, "output prefix is empty", "output");
  c.threads = top.integer("threads", c.threads);
  c.n_max = top.integer("n_max", c.n_max);
  c.ramp_substeps = top.integer("ramp_substeps", c.ramp_substeps);
  c.verify_segments = top.integer("verify_segments", c.verify_segments);
  if (c.threads < 0) throw Error(ErrorCode::BadValue, "threads must be >= 0", "threads");
  if (c.n_max < 0) throw Error(ErrorCode::BadValue, "n_max must be >= 0", "n_max");
  if (c.ramp_substeps < 1) {
    throw Error(ErrorCode::BadValue, "ramp_substeps must be >= 1", "ramp_substeps");
  }
  if (c.verify_segments < 1) {
    throw Error(ErrorCode::BadValue, "verify_segments must be >= 1", "verify_segments");
  }
  top.finish();
  return c;
}

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::BadValue, std::string("invalid JSON: ") + e.what(), "$");
  }
  return parse_config(doc);
}

json config_to_json(const RunConfig& c) {
  json j{{"mode", std::string(to_string(c.mode))}, {"units", "angular"}};
  if (c.dnp) {
    j["dnp"] = {{"omega_I", c.dnp->omega_I}, {"a_perp", c.dnp->a_perp},
                {"omega_S", c.dnp->omega_S}};
  }
  if (c.phip) {
    j["phip"] = {{"omega_I0", c.phip->omega_I0}, {"omega_S", c.phip->omega_S},
                 {"j", c.phip->j},               {"j1", c.phip->j1},
                 {"j2", c.phip->j2}};
  }
  if (c.mode != RunMode::Verify || c.scheme.omega_rabi > 0.0) {
    const SchemeSpec& s = c.scheme;
    j["scheme"] = {{"name", c.all_schemes ? std::string("all") : std::string(to_string(s.scheme))},
                   {"omega_rabi", inf_or_number(s.omega_rabi)},
                   {"n_reps", s.n_reps},
                   {"pulses_per_train", s.pulses_per_train},
                   {"sweep_lo", s.sweep_lo},
                   {"sweep_hi", s.sweep_hi},
                   {"sweep_segments", s.sweep_segments},
                   {"sweep_rate", s.sweep_rate},
                   {"sweep_duration", s.sweep_duration},
                   {"phase_shift", s.phase_shift},
                   {"tau_factor", s.tau_factor}};
  }
  j["error"] = {{"delta", c.error.delta}, {"rabi_rel", c.error.rabi_rel}};
  j["grid"] = {{"delta_min", c.grid.delta_min}, {"delta_max", c.grid.delta_max},
               {"delta_n", c.grid.delta_n},     {"rabi_min", c.grid.rabi_min},
               {"rabi_max", c.grid.rabi_max},   {"rabi_n", c.grid.rabi_n}};
  j["halvings"] = {{"a_perp", c.a_halvings}, {"omega_I", c.omega_halvings}};
  j["output"] = c.output;
  j["threads"] = c.threads;
  j["n_max"] = c.n_max;
  j["ramp_substeps"] = c.ramp_substeps;
  j["verify_segments"] = c.verify_segments;
  return j;
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(ErrorCode::BadValue, "override must look like key.path=value",
                std::string(assignment));
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw Error(ErrorCode::BadValue, "empty path component", key);
    if (!node->is_object()) {
      throw Error(ErrorCode::BadValue, "cannot descend into a non-object", key);
    }
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

int resolve_threads(int flag, int config_value) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("SPINSEQ_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  if (config_value > 0) return config_value;
  return std::max(1u, std::thread::hardware_concurrency());
}

json verify_report(const PhipParams& p, int segments) {
  const IdentityReport ids = pseudospin_identities_report(p);
  json checks = json::array();
  for (const auto& c : ids.checks) {
    checks.push_back({{"name", c.name}, {"residual", c.residual}, {"passed", c.passed}});
  }

  // Fixed-seed drive program; the check is deterministic.
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double scale = std::max({std::abs(p.j), std::abs(p.omega_S), 1.0});
  std::vector<EquivalenceSegment> segs;
  for (int k = 0; k < segments; ++k) {
    const double duration = unit(rng) * 0.5 / scale;
    const double amp = unit(rng) * 2.0 * scale;
    const double phase = unit(rng) * 2.0 * std::numbers::pi;
    segs.push_back({duration, {amp, phase}});
  }
  const EquivalenceResult eq = check_dynamical_equivalence(p, segs, dnp_initial_state());
  const bool eq_ok = eq.max_sz_deviation <= 1e-10 && eq.max_iz_deviation <= 1e-10 &&
                     eq.max_leakage <= 1e-12;
  const MappedParams mapped = map_phip_to_dnp(p);
  return {{"identities", std::move(checks)},
          {"identities_passed", ids.all_passed()},
          {"equivalence",
           {{"boundaries", eq.boundaries},
            {"max_sz_deviation", eq.max_sz_deviation},
            {"max_iz_deviation", eq.max_iz_deviation},
            {"max_leakage", eq.max_leakage},
            {"passed", eq_ok}}},
          {"mapped_dnp", mapped.dnp},
          {"warnings", mapped.warnings},
          {"passed", ids.all_passed() && eq_ok}};
}

namespace {

void write_text(const std::string& path, const std::string& body, RunResult& out) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing", path);
  f << body;
  if (!f) throw Error(ErrorCode::Io, "failed writing '" + path + "'", path);
  out.files.push_back(path);
}

template <class Writer>
void write_stream(const std::string& path, Writer&& w, RunResult& out) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing", path);
  w(f);
  if (!f) throw Error(ErrorCode::Io, "failed writing '" + path + "'", path);
  out.files.push_back(path);
}

void run_simulate(const RunConfig& cfg, RunResult& out) {
  const DnpParams p = cfg.system();
  Schedule sch = build_schedule(p, cfg.scheme);
  sch.n_reps = cfg.scheme.n_reps > 0 ? cfg.scheme.n_reps : select_repetitions(sch, p, cfg.n_max);
  SimulateOptions opt;
  opt.ramp_substeps = cfg.ramp_substeps;
  const Trajectory tr = simulate(sch, p, cfg.error, dnp_initial_state(), opt);
  write_stream(cfg.output + "_trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, tr); },
               out);
  write_text(cfg.output + "_schedule.json", json(sch).dump(2) + "\n", out);
  out.summary = {{"mode", "simulate"},
                 {"scheme", std::string(to_string(sch.scheme))},
                 {"n_reps", sch.n_reps},
                 {"duration", sch.total_duration()},
                 {"transferred_polarization", tr.transferred_polarization},
                 {"abs_polarization", std::abs(tr.transferred_polarization)}};
}

void run_scan(const RunConfig& cfg, int threads, RunResult& out) {
  ScanOptions opt;
  opt.threads = threads;
  opt.n_max = cfg.n_max;
  const Heatmap h = scan(cfg.scheme, cfg.system(), cfg.grid.grid(), opt);
  write_stream(cfg.output + "_heatmap.csv", [&](std::ostream& os) { write_heatmap_csv(os, h); },
               out);
  write_text(cfg.output + "_heatmap.json", heatmap_metadata(h).dump(2) + "\n", out);
  out.summary = {{"mode", "scan"},
                 {"scheme", std::string(to_string(cfg.scheme.scheme))},
                 {"n_reps", h.meta.n_reps},
                 {"points", h.values.size()},
                 {"failures", h.failures()}};
}

void run_multiscan(const RunConfig& cfg, int threads, RunResult& out) {
  ScanOptions opt;
  opt.threads = threads;
  opt.n_max = cfg.n_max;
  const auto panels = multi_regime_scan(cfg.scheme, cfg.system(), cfg.a_halvings,
                                        cfg.omega_halvings, cfg.grid.grid(), opt);
  json meta = multi_regime_metadata(panels);
  for (std::size_t k = 0; k < panels.size(); ++k) {
    const auto& panel = panels[k];
    const std::string path = cfg.output + "_a" + std::to_string(panel.a_halvings) + "_w" +
                             std::to_string(panel.omega_halvings) + ".csv";
    write_stream(path, [&](std::ostream& os) { write_heatmap_csv(os, panel.heatmap); }, out);
    meta["panels"][k]["csv"] = path;
  }
  write_text(cfg.output + "_multiscan.json", meta.dump(2) + "\n", out);
  out.summary = {{"mode", "multiscan"}, {"panels", panels.size()}};
}

void run_verify(const RunConfig& cfg, RunResult& out) {
  json report = verify_report(*cfg.phip, cfg.verify_segments);
  write_text(cfg.output + "_verify.json", report.dump(2) + "\n", out);
  out.summary = {{"mode", "verify"}, {"passed", report["passed"]}};
  if (!report["passed"].get<bool>()) out.exit_code = 3;
}

void run_astar(const RunConfig& cfg, RunResult& out) {
  const DnpParams p = cfg.system();
  std::vector<SchemeKind> kinds;
  if (cfg.all_schemes) {
    for (SchemeKind k : all_schemes()) {
      if (k != SchemeKind::B1Sweep) kinds.push_back(k);
    }
  } else {
    kinds.push_back(cfg.scheme.scheme);
  }
  json reports = json::array();
  for (SchemeKind k : kinds) {
    SchemeSpec s = cfg.scheme;
    s.scheme = k;
    json entry{{"scheme", std::string(to_string(k))}};
    if (const auto ratio = a_star_theory_ratio(k)) entry["theory_ratio"] = *ratio;
    try {
      entry["first_maximum"] = to_json(estimate_a_star(s, p, cfg.n_max));
    } catch (const Error& e) {
      entry["first_maximum"] = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
    }
    if (k != SchemeKind::S2hmPlain) {
      try {
        entry["cycle_log"] = to_json(cycle_a_star(s, p));
      } catch (const Error& e) {
        entry["cycle_log"] = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
      }
    }
    reports.push_back(std::move(entry));
  }
  const json doc{{"params", p},
                 {"omega_rabi", inf_or_number(cfg.scheme.omega_rabi)},
                 {"theory",
                  {{"SLIC_NOVEL", *a_star_theory_ratio(SchemeKind::SlicNovel)},
                   {"S2HM_PLAIN", *a_star_theory_ratio(SchemeKind::S2hmPlain)},
                   {"PULSEPOL", *a_star_theory_ratio(SchemeKind::PulsePol)}}},
                 {"reports", std::move(reports)}};
  write_text(cfg.output + "_astar.json", doc.dump(2) + "\n", out);
  out.summary = {{"mode", "astar"}, {"schemes", kinds.size()}};
}

}  // namespace

RunResult run(const RunConfig& cfg, int threads_flag) {
  RunResult out;
  try {
    const int threads = resolve_threads(threads_flag, cfg.threads);
    switch (cfg.mode) {
      case RunMode::Simulate: run_simulate(cfg, out); break;
      case RunMode::Scan: run_scan(cfg, threads, out); break;
      case RunMode::Multiscan: run_multiscan(cfg, threads, out); break;
      case RunMode::Verify: run_verify(cfg, out); break;
      case RunMode::Astar: run_astar(cfg, out); break;
    }
    out.summary["warnings"] = cfg.warnings();
  } catch (const Error& e) {
    out.exit_code = 2;
    out.summary = {{"error", std::string(to_string(e.code()))},
                   {"message", e.what()},
                   {"path", e.path()}};
  } catch (const std::exception& e) {
    out.exit_code = 2;
    out.summary = {{"error", "Internal"}, {"message", e.what()}, {"path", ""}};
  }
  if (out.exit_code == 2) {
    const std::string path = cfg.output + "_error.json";
    std::ofstream f(path, std::ios::binary);
    if (f) {
      f << out.summary.dump(2) << "\n";
      out.files.push_back(path);
    }
  }
  return out;
}

}  // namespace spinseq
