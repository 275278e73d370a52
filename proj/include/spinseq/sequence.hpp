#pragma once

// Piecewise-constant drive schedules and the builders for the supported
// polarization-transfer sequences.
//
// Phase convention: phase 0 drives along +x ("X"), pi/2 along +y ("Y"),
// pi along -x ("-X"), 3pi/2 along -y ("-Y"). Rotation segments carry labels
// of the form "<angle>@<phase>", e.g. "pi/2@Y", "pi@X", "2pi@X"; waits are
// labelled "wait" and sweep steps "sweep[k]".
//
// An infinite omega_rabi selects ideal instantaneous pulses: pulse segments
// then have zero duration and infinite amplitude, and the propagator applies
// them as exact rotations by the labelled angle.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "spinseq/spin_model.hpp"

namespace spinseq {

enum class SchemeKind { SlicNovel, S2hmPlain, S2hmXy8, PulsePol, AdaptTopDnp, B1Sweep };

std::string_view to_string(SchemeKind kind);
// Accepts the canonical upper-case names and lower-case aliases
// (slic, novel, s2hm, s2hm_plain, s2hm_xy8, pulsepol, adapt, top_dnp, b1_sweep).
SchemeKind parse_scheme(std::string_view name);
const std::vector<SchemeKind>& all_schemes();

struct SchemeCorrespondence {
  SchemeKind kind;
  std::string phip_name;
  std::string dnp_name;
  std::string description;
};
const std::vector<SchemeCorrespondence>& scheme_table();

struct SchemeSpec {
  SchemeKind scheme = SchemeKind::SlicNovel;
  double omega_rabi = 0.0;

  int n_reps = 0;             // 0: choose by first-maximum search
  int pulses_per_train = 0;   // S2HM_PLAIN; 0: round(pi wI / (2 A))
  double sweep_lo = 0.6;      // B1_SWEEP range, as fractions of wI
  double sweep_hi = 1.4;
  int sweep_segments = 150;
  double sweep_rate = 0.0;      // 0: A^2 / (2 pi)
  double sweep_duration = 0.0;  // 0: derived from range and rate
  double phase_shift = 1.5707963267948966;  // PULSEPOL sub-block shift magnitude
  double tau_factor = 3.0;                  // PULSEPOL tau = tau_factor * pi / wI

  void validate() const;
  std::vector<std::string> warnings(const DnpParams& p) const;

  friend bool operator==(const SchemeSpec&, const SchemeSpec&) = default;
};

struct Segment {
  double duration = 0.0;
  double amp_start = 0.0;
  double amp_end = 0.0;
  double phase = 0.0;
  std::string label;

  bool is_ramp() const { return amp_start != amp_end; }
  bool is_wait() const { return amp_start == 0.0 && amp_end == 0.0; }
  bool is_instantaneous() const { return duration == 0.0 && !is_wait(); }

  friend bool operator==(const Segment&, const Segment&) = default;
};

std::string rotation_label(double angle, double phase);
// Angle named by a "<angle>@<phase>" label, if the label is of that form.
std::optional<double> labelled_angle(std::string_view label);
double normalize_phase(double phase);

struct Schedule {
  SchemeKind scheme = SchemeKind::SlicNovel;
  DnpParams system;
  double omega_rabi = 0.0;
  std::vector<Segment> prelude;
  std::vector<Segment> block;
  std::vector<Segment> postlude;
  int n_reps = 1;
  bool fixed_reps = false;  // the scheme does not rely on repetition
  double tau = 0.0;
  double tau_multiple = 1.0;  // block duration / tau

  double prelude_duration() const;
  double block_duration() const;
  double postlude_duration() const;
  double total_duration() const;

  // Throws BadValue on the first violated invariant.
  void validate(double tol = 1e-9) const;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

void to_json(nlohmann::json& j, const Schedule& s);
void to_json(nlohmann::json& j, const SchemeSpec& s);
void to_json(nlohmann::json& j, const DnpParams& p);
void from_json(const nlohmann::json& j, Schedule& s);

// Timing layout ------------------------------------------------------------

struct PulseSpec {
  double angle = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;
  std::string label;  // empty: rotation_label(angle, phase)
};

enum class Align { Start, Center, End };

// A section of fixed length `window` containing at most one pulse. The
// pulse sits at the start, centre or end of the window and the remainder is
// waiting time.
struct Slot {
  double window = 0.0;
  std::optional<PulseSpec> pulse;
  Align align = Align::Center;
  std::string name;
};

// Resolves slots into segments; adjacent waits are merged and empty waits
// dropped. Throws NegativeWait naming the offending slot if a pulse does not
// fit its window.
std::vector<Segment> layout_timing(std::span<const Slot> slots);

struct ScheduleDraft {
  SchemeKind scheme = SchemeKind::SlicNovel;
  DnpParams system;
  double omega_rabi = 0.0;
  std::vector<Slot> prelude;
  std::vector<Slot> block;
  std::vector<Slot> postlude;
  int n_reps = 1;
  bool fixed_reps = false;
  double tau = 0.0;
  double tau_multiple = 1.0;
};

Schedule layout_timing(const ScheduleDraft& draft);

// Builders -----------------------------------------------------------------

Schedule build_slic(const DnpParams& p, const SchemeSpec& s);
Schedule build_s2hm_plain(const DnpParams& p, const SchemeSpec& s);
Schedule build_s2hm_xy8(const DnpParams& p, const SchemeSpec& s);
Schedule build_pulsepol(const DnpParams& p, const SchemeSpec& s);
Schedule build_adapt(const DnpParams& p, const SchemeSpec& s);
Schedule build_b1_sweep(const DnpParams& p, const SchemeSpec& s);

// Dispatches on s.scheme.
Schedule build_schedule(const DnpParams& p, const SchemeSpec& s);

// Pulses per train used by S2HM_PLAIN for the given parameters.
int s2hm_pulses_per_train(const DnpParams& p, const SchemeSpec& s);

}  // namespace spinseq
