#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "spinseq/config.hpp"

using namespace spinseq;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json base_doc(const char* mode = "simulate") {
  return {{"mode", mode},
          {"dnp", {{"omega_I", 24.0}, {"a_perp", 1.0}}},
          {"scheme", {{"name", "SLIC_NOVEL"}, {"omega_rabi", 100.0}}}};
}

Error parse_error(const json& doc) {
  try {
    parse_config(doc);
  } catch (const Error& e) {
    return e;
  }
  FAIL("config accepted");
  return Error(ErrorCode::Io, "");
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("spinseq_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("minimal config and defaults") {
  const RunConfig c = parse_config(base_doc());
  CHECK(c.mode == RunMode::Simulate);
  CHECK(c.dnp->omega_I == 24.0);
  CHECK(c.scheme.scheme == SchemeKind::SlicNovel);
  CHECK(c.scheme.n_reps == 0);
  CHECK(c.grid == GridSpec{});
  CHECK(c.output == "spinseq");
  CHECK(c.verify_segments == 100);
  CHECK(c.system() == DnpParams{24.0, 1.0, 0.0});
}

TEST_CASE("config errors carry the field path") {
  json both = base_doc();
  both["phip"] = {{"omega_I0", 1000}, {"omega_S", 250}, {"j", 24}, {"j1", 2}, {"j2", 1}};
  Error e = parse_error(both);
  CHECK(e.code() == ErrorCode::BadValue);

  json unknown = base_doc();
  unknown["scheme"]["omega_rab"] = 3;
  e = parse_error(unknown);
  CHECK(e.code() == ErrorCode::BadValue);
  CHECK(e.path() == "scheme.omega_rab");

  unknown = base_doc();
  unknown["scheme"]["colour"] = "red";
  e = parse_error(unknown);
  CHECK(e.path() == "scheme.colour");

  json missing = base_doc();
  missing["dnp"].erase("a_perp");
  e = parse_error(missing);
  CHECK(e.code() == ErrorCode::MissingField);
  CHECK(e.path() == "dnp.a_perp");

  json wrong = base_doc();
  wrong["dnp"]["omega_I"] = "fast";
  e = parse_error(wrong);
  CHECK(e.code() == ErrorCode::BadValue);
  CHECK(e.path() == "dnp.omega_I");

  json scheme = base_doc();
  scheme["scheme"]["name"] = "WOBBLE";
  CHECK(parse_error(scheme).path() == "scheme.name");

  json all = base_doc();
  all["scheme"]["name"] = "all";
  CHECK(parse_error(all).path() == "scheme.name");

  json grid = base_doc("scan");
  grid["grid"] = {{"delta_n", 0}};
  CHECK(parse_error(grid).path().rfind("grid", 0) == 0);

  json verify = base_doc("verify");
  CHECK(parse_error(verify).path() == "phip");

  CHECK(parse_error(json::array()).code() == ErrorCode::BadValue);
  CHECK_THROWS_AS(parse_config(std::string_view("{not json")), Error);
}

TEST_CASE("round trip and overrides") {
  json doc = base_doc("scan");
  doc["scheme"]["omega_rabi"] = "inf";
  doc["grid"] = {{"delta_n", 11}, {"rabi_n", 5}};
  doc["threads"] = 3;
  const RunConfig c = parse_config(doc);
  CHECK(std::isinf(c.scheme.omega_rabi));
  CHECK(parse_config(config_to_json(c)) == c);

  json astar = base_doc("astar");
  astar["scheme"].erase("name");
  const RunConfig a = parse_config(astar);
  CHECK(a.all_schemes);
  CHECK(parse_config(config_to_json(a)) == a);

  apply_override(doc, "scheme.omega_rabi=250");
  apply_override(doc, "scheme.name=pulsepol");
  apply_override(doc, "grid.delta_max=0.25");
  const RunConfig o = parse_config(doc);
  CHECK(o.scheme.omega_rabi == 250.0);
  CHECK(o.scheme.scheme == SchemeKind::PulsePol);
  CHECK(o.grid.delta_max == 0.25);
  CHECK_THROWS_AS(apply_override(doc, "novalue"), Error);
}

TEST_CASE("hz units scale every frequency") {
  json doc = base_doc();
  doc["units"] = "hz";
  doc["error"] = {{"delta", 2.0}, {"rabi_rel", 0.1}};
  const RunConfig c = parse_config(doc);
  const double f = 2 * std::numbers::pi;
  CHECK(c.dnp->omega_I == doctest::Approx(24.0 * f));
  CHECK(c.dnp->a_perp == doctest::Approx(f));
  CHECK(c.scheme.omega_rabi == doctest::Approx(100.0 * f));
  CHECK(c.error.delta == doctest::Approx(2.0 * f));
  CHECK(c.error.rabi_rel == 0.1);
  doc["units"] = "furlongs";
  CHECK(parse_error(doc).path() == "units");
}

TEST_CASE("thread count precedence") {
  ::unsetenv("SPINSEQ_THREADS");
  CHECK(resolve_threads(0, 3) == 3);
  CHECK(resolve_threads(0, 0) >= 1);
  ::setenv("SPINSEQ_THREADS", "5", 1);
  CHECK(resolve_threads(0, 3) == 5);
  CHECK(resolve_threads(2, 3) == 2);
  ::setenv("SPINSEQ_THREADS", "junk", 1);
  CHECK(resolve_threads(0, 3) == 3);
  ::unsetenv("SPINSEQ_THREADS");
}

TEST_CASE("run: simulate writes trajectory and schedule") {
  const fs::path dir = scratch("simulate");
  json doc = base_doc();
  doc["output"] = (dir / "run").string();
  const RunResult r = run(parse_config(doc));
  CHECK(r.exit_code == 0);
  CHECK(r.files.size() == 2);
  CHECK(read_file(dir / "run_trajectory.csv").rfind("time,sz,iz\n", 0) == 0);
  const json sch = json::parse(read_file(dir / "run_schedule.json"));
  CHECK(sch.at("n_reps") == 24);
  CHECK(r.summary.at("transferred_polarization").get<double>() >= 0.99);
}

TEST_CASE("run: scan output is deterministic") {
  const fs::path dir = scratch("scan");
  json doc = base_doc("scan");
  doc["scheme"]["name"] = "PULSEPOL";
  doc["output"] = (dir / "a").string();
  const RunResult a = run(parse_config(doc), 1);
  doc["output"] = (dir / "b").string();
  const RunResult b = run(parse_config(doc), 8);
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  const std::string csv = read_file(dir / "a_heatmap.csv");
  CHECK(csv == read_file(dir / "b_heatmap.csv"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1682);
  const json meta = json::parse(read_file(dir / "a_heatmap.json"));
  CHECK(meta.at("rows") == 41);
  CHECK(meta.at("failures").empty());
}

TEST_CASE("run: verify and astar") {
  const fs::path dir = scratch("verify");
  const json v{{"mode", "verify"},
               {"phip", {{"omega_I0", 1000}, {"omega_S", 250}, {"j", 24}, {"j1", 2}, {"j2", 1}}},
               {"output", (dir / "v").string()}};
  const RunResult r = run(parse_config(v));
  CHECK(r.exit_code == 0);
  const json rep = json::parse(read_file(dir / "v_verify.json"));
  CHECK(rep.at("passed") == true);
  CHECK(rep.at("mapped_dnp").at("omega_I") == 24.0);
  CHECK(rep.at("equivalence").at("boundaries") == 100);

  json a = base_doc("astar");
  a["scheme"]["name"] = "all";
  a["output"] = (dir / "a").string();
  const RunResult ra = run(parse_config(a));
  CHECK(ra.exit_code == 0);
  const json doc = json::parse(read_file(dir / "a_astar.json"));
  CHECK(doc.at("reports").size() == 5);
  CHECK(doc.at("theory").at("PULSEPOL").get<double>() == doctest::Approx(0.7245).epsilon(1e-4));
}

TEST_CASE("run: failures produce an error file") {
  const fs::path dir = scratch("error");
  json doc = base_doc();
  doc["scheme"] = {{"name", "ADAPT_TOPDNP"}, {"omega_rabi", 10.0}};
  doc["output"] = (dir / "bad").string();
  const RunResult r = run(parse_config(doc));
  CHECK(r.exit_code == 2);
  const json err = json::parse(read_file(dir / "bad_error.json"));
  CHECK(err.at("error") == "NegativeWait");
  CHECK(err.contains("path"));
}
