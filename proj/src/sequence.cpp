#include "spinseq/sequence.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

namespace spinseq {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPhaseX = 0.0;
constexpr double kPhaseY = kPi / 2.0;
constexpr double kPhaseMinusY = 3.0 * kPi / 2.0;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

PulseSpec rotation(double angle, double amplitude, double phase) {
  return {angle, amplitude, normalize_phase(phase), {}};
}

Slot pulse_slot(double window, PulseSpec pulse, Align align, std::string name = {}) {
  return {window, std::move(pulse), align, std::move(name)};
}

Slot wait_slot(double window, std::string name = {}) {
  return {window, std::nullopt, Align::Center, std::move(name)};
}

double pulse_duration(const PulseSpec& p) {
  if (std::isinf(p.amplitude)) return 0.0;
  return p.angle / p.amplitude;
}

void require_positive_larmor(const DnpParams& p) {
  p.validate();
  if (!(p.omega_I > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "omega_I must be > 0 to build a sequence", "omega_I");
  }
}

double sum_durations(const std::vector<Segment>& segs) {
  double t = 0.0;
  for (const auto& s : segs) t += s.duration;
  return t;
}

}  // namespace

std::string_view to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::SlicNovel: return "SLIC_NOVEL";
    case SchemeKind::S2hmPlain: return "S2HM_PLAIN";
    case SchemeKind::S2hmXy8: return "S2HM_XY8";
    case SchemeKind::PulsePol: return "PULSEPOL";
    case SchemeKind::AdaptTopDnp: return "ADAPT_TOPDNP";
    case SchemeKind::B1Sweep: return "B1_SWEEP";
  }
  return "UNKNOWN";
}

SchemeKind parse_scheme(std::string_view name) {
  const std::string n = lower(name);
  if (n == "slic_novel" || n == "slic" || n == "novel") return SchemeKind::SlicNovel;
  if (n == "s2hm_plain" || n == "s2hm") return SchemeKind::S2hmPlain;
  if (n == "s2hm_xy8" || n == "xy8") return SchemeKind::S2hmXy8;
  if (n == "pulsepol") return SchemeKind::PulsePol;
  if (n == "adapt_topdnp" || n == "adapt" || n == "top_dnp" || n == "topdnp") {
    return SchemeKind::AdaptTopDnp;
  }
  if (n == "b1_sweep" || n == "sweep" || n == "ra_novel") return SchemeKind::B1Sweep;
  throw Error(ErrorCode::BadValue, "unknown scheme '" + std::string(name) + "'", "scheme");
}

const std::vector<SchemeKind>& all_schemes() {
  static const std::vector<SchemeKind> kinds = {
      SchemeKind::SlicNovel, SchemeKind::S2hmPlain,   SchemeKind::S2hmXy8,
      SchemeKind::PulsePol,  SchemeKind::AdaptTopDnp, SchemeKind::B1Sweep};
  return kinds;
}

const std::vector<SchemeCorrespondence>& scheme_table() {
  static const std::vector<SchemeCorrespondence> table = {
      {SchemeKind::SlicNovel, "SLIC", "NOVEL",
       "continuous spin-lock at amplitude wI between pi/2 pulses"},
      {SchemeKind::S2hmPlain, "S2hM", "NV nuclear spin initialization",
       "two trains of n equal-phase pi pulses, tau = pi/wI"},
      {SchemeKind::S2hmXy8, "S2hM (XY8 phase cycle)", "NV nuclear spin initialization",
       "repeated XY4/YX4 pi trains with a transitory pi/2 pulse, tau = pi/wI"},
      {SchemeKind::PulsePol, "PulsePol", "PulsePol",
       "phase-shifted pair of pi/2-pi-pi/2 blocks, tau = 3pi/wI"},
      {SchemeKind::AdaptTopDnp, "ADAPT", "TOP-DNP",
       "four pi/2 pulses per block with delay tau = pi/(2 wI)"},
      {SchemeKind::B1Sweep, "adiabatic B1 sweep", "RA-NOVEL",
       "linear amplitude sweep across the Hartmann-Hahn match"},
  };
  return table;
}

void SchemeSpec::validate() const {
  if (!(omega_rabi > 0.0)) {
    throw Error(ErrorCode::BadValue, "omega_rabi must be > 0", "omega_rabi");
  }
  if (n_reps < 0) throw Error(ErrorCode::BadValue, "n_reps must be >= 0", "n_reps");
  if (pulses_per_train < 0) {
    throw Error(ErrorCode::BadValue, "pulses_per_train must be >= 0", "pulses_per_train");
  }
  if (!(sweep_lo >= 0.0) || !(sweep_hi >= sweep_lo) || !std::isfinite(sweep_hi)) {
    throw Error(ErrorCode::BadValue, "sweep range must satisfy 0 <= lo <= hi", "sweep_range");
  }
  if (sweep_segments < 1) {
    throw Error(ErrorCode::BadValue, "sweep_segments must be >= 1", "sweep_segments");
  }
  if (!(sweep_rate >= 0.0) || !(sweep_duration >= 0.0)) {
    throw Error(ErrorCode::BadValue, "sweep rate and duration must be >= 0", "sweep_rate");
  }
  if (!std::isfinite(phase_shift)) {
    throw Error(ErrorCode::BadValue, "phase_shift must be finite", "phase_shift");
  }
  if (!(tau_factor > 0.0) || !std::isfinite(tau_factor)) {
    throw Error(ErrorCode::BadValue, "tau_factor must be > 0", "tau_factor");
  }
}

std::vector<std::string> SchemeSpec::warnings(const DnpParams& p) const {
  std::vector<std::string> w;
  if (scheme != SchemeKind::B1Sweep && omega_rabi < p.omega_I) {
    std::ostringstream os;
    os << "omega_rabi (" << omega_rabi << ") < omega_I (" << p.omega_I
       << "): pulsed resonance conditions assume omega_rabi >= omega_I";
    w.push_back(os.str());
  }
  return w;
}

double normalize_phase(double phase) {
  double r = std::fmod(phase, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (kTwoPi - r < 1e-12) r = 0.0;
  return r;
}

std::string rotation_label(double angle, double phase) {
  std::string a;
  if (std::abs(angle - kPi / 2.0) < 1e-12) {
    a = "pi/2";
  } else if (std::abs(angle - kPi) < 1e-12) {
    a = "pi";
  } else if (std::abs(angle - kTwoPi) < 1e-12) {
    a = "2pi";
  } else {
    std::ostringstream os;
    os.precision(17);
    os << angle;
    a = os.str();
  }
  const double ph = normalize_phase(phase);
  static const char* names[] = {"X", "Y", "-X", "-Y"};
  for (int k = 0; k < 4; ++k) {
    if (std::abs(ph - k * kPi / 2.0) < 1e-12) return a + "@" + names[k];
  }
  std::ostringstream os;
  os.precision(12);
  os << a << "@" << ph * 180.0 / kPi << "deg";
  return os.str();
}

std::optional<double> labelled_angle(std::string_view label) {
  const auto at = label.find('@');
  if (at == std::string_view::npos) return std::nullopt;
  const std::string_view a = label.substr(0, at);
  if (a == "pi/2") return kPi / 2.0;
  if (a == "pi") return kPi;
  if (a == "2pi") return kTwoPi;
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(a), &used);
    if (used == a.size()) return v;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

double Schedule::prelude_duration() const { return sum_durations(prelude); }
double Schedule::block_duration() const { return sum_durations(block); }
double Schedule::postlude_duration() const { return sum_durations(postlude); }

double Schedule::total_duration() const {
  return prelude_duration() + n_reps * block_duration() + postlude_duration();
}

void Schedule::validate(double tol) const {
  const auto check = [&](const std::vector<Segment>& segs, const char* section) {
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const Segment& s = segs[i];
      const std::string where = std::string(section) + "[" + std::to_string(i) + "]";
      if (!(s.duration >= 0.0) || !std::isfinite(s.duration)) {
        throw Error(ErrorCode::BadValue, "segment duration must be finite and >= 0", where);
      }
      if (!(s.amp_start >= 0.0) || !(s.amp_end >= 0.0)) {
        throw Error(ErrorCode::BadValue, "segment amplitudes must be >= 0", where);
      }
      if (!std::isfinite(s.phase)) {
        throw Error(ErrorCode::BadValue, "segment phase must be finite", where);
      }
      const auto angle = labelled_angle(s.label);
      if (angle && !s.is_ramp() && !s.is_instantaneous()) {
        const double achieved = s.amp_start * s.duration;
        if (std::abs(achieved - *angle) > tol * std::max(1.0, *angle)) {
          throw Error(ErrorCode::BadValue,
                      "segment '" + s.label + "' rotates by " + std::to_string(achieved), where);
        }
      }
    }
  };
  check(prelude, "prelude");
  check(block, "block");
  check(postlude, "postlude");
  if (block.empty()) throw Error(ErrorCode::BadValue, "schedule block is empty", "block");
  if (n_reps < 1) throw Error(ErrorCode::BadValue, "n_reps must be >= 1", "n_reps");
  const double expected = tau_multiple * tau;
  const double actual = block_duration();
  if (std::abs(actual - expected) > tol * std::max(1.0, expected)) {
    throw Error(ErrorCode::BadValue,
                "block duration " + std::to_string(actual) + " != tau_multiple * tau " +
                    std::to_string(expected),
                "block");
  }
}

// JSON ---------------------------------------------------------------------

namespace {

nlohmann::json number_or_inf(double v) {
  if (std::isinf(v) && v > 0) return "inf";
  return v;
}

double read_number(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_string() && v.get<std::string>() == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  return v.get<double>();
}

nlohmann::json segments_json(const std::vector<Segment>& segs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : segs) {
    arr.push_back({{"duration", s.duration},
                   {"amp_start", number_or_inf(s.amp_start)},
                   {"amp_end", number_or_inf(s.amp_end)},
                   {"phase", s.phase},
                   {"label", s.label}});
  }
  return arr;
}

}  // namespace

void to_json(nlohmann::json& j, const Schedule& s) {
  nlohmann::json segs = segments_json(s.prelude);
  for (auto& x : segments_json(s.block)) segs.push_back(std::move(x));
  for (auto& x : segments_json(s.postlude)) segs.push_back(std::move(x));
  j = nlohmann::json{
      {"scheme", std::string(to_string(s.scheme))},
      {"params",
       {{"omega_I", s.system.omega_I},
        {"a_perp", s.system.a_perp},
        {"omega_S", s.system.omega_S},
        {"omega_rabi", number_or_inf(s.omega_rabi)},
        {"prelude_len", s.prelude.size()},
        {"block_len", s.block.size()},
        {"postlude_len", s.postlude.size()},
        {"fixed_reps", s.fixed_reps},
        {"tau_multiple", s.tau_multiple}}},
      {"segments", std::move(segs)},
      {"n_reps", s.n_reps},
      {"tau", s.tau}};
}

void to_json(nlohmann::json& j, const SchemeSpec& s) {
  j = nlohmann::json{{"scheme", std::string(to_string(s.scheme))},
                     {"omega_rabi", number_or_inf(s.omega_rabi)},
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

void to_json(nlohmann::json& j, const DnpParams& p) {
  j = nlohmann::json{{"omega_I", p.omega_I}, {"a_perp", p.a_perp}, {"omega_S", p.omega_S}};
}

void from_json(const nlohmann::json& j, Schedule& s) {
  s = Schedule{};
  s.scheme = parse_scheme(j.at("scheme").get<std::string>());
  const auto& p = j.at("params");
  s.system.omega_I = p.at("omega_I").get<double>();
  s.system.a_perp = p.at("a_perp").get<double>();
  s.system.omega_S = p.at("omega_S").get<double>();
  s.omega_rabi = read_number(p, "omega_rabi");
  s.fixed_reps = p.at("fixed_reps").get<bool>();
  s.tau_multiple = p.at("tau_multiple").get<double>();
  const auto n_pre = p.at("prelude_len").get<std::size_t>();
  const auto n_blk = p.at("block_len").get<std::size_t>();
  const auto n_post = p.at("postlude_len").get<std::size_t>();
  const auto& segs = j.at("segments");
  if (segs.size() != n_pre + n_blk + n_post) {
    throw Error(ErrorCode::BadValue, "segment count does not match section lengths", "segments");
  }
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& js = segs[i];
    Segment seg{js.at("duration").get<double>(), read_number(js, "amp_start"),
                read_number(js, "amp_end"), js.at("phase").get<double>(),
                js.at("label").get<std::string>()};
    if (i < n_pre) {
      s.prelude.push_back(std::move(seg));
    } else if (i < n_pre + n_blk) {
      s.block.push_back(std::move(seg));
    } else {
      s.postlude.push_back(std::move(seg));
    }
  }
  s.n_reps = j.at("n_reps").get<int>();
  s.tau = j.at("tau").get<double>();
}

// Layout -------------------------------------------------------------------

std::vector<Segment> layout_timing(std::span<const Slot> slots) {
  std::vector<Segment> out;
  const auto push_wait = [&out](double t) {
    if (t <= 0.0) return;
    if (!out.empty() && out.back().is_wait() && !out.back().is_instantaneous() &&
        out.back().label == "wait") {
      out.back().duration += t;
    } else {
      out.push_back({t, 0.0, 0.0, 0.0, "wait"});
    }
  };
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const Slot& slot = slots[i];
    const std::string name = slot.name.empty() ? "slot " + std::to_string(i) : slot.name;
    if (!(slot.window >= 0.0) || !std::isfinite(slot.window)) {
      throw Error(ErrorCode::InfeasibleTiming, "slot window must be finite and >= 0", name);
    }
    if (!slot.pulse) {
      push_wait(slot.window);
      continue;
    }
    const PulseSpec& p = *slot.pulse;
    if (!(p.amplitude > 0.0) || !(p.angle >= 0.0)) {
      throw Error(ErrorCode::InfeasibleTiming, "pulse needs amplitude > 0 and angle >= 0", name);
    }
    const double d = pulse_duration(p);
    double rest = slot.window - d;
    // Rounding leftovers of either sign are not waits.
    const double slack = 1e-12 * std::max(1.0, slot.window);
    if (rest <= slack) {
      if (rest < -slack) {
        throw Error(ErrorCode::NegativeWait,
                    "pulse of duration " + std::to_string(d) + " does not fit window " +
                        std::to_string(slot.window) + " in " + name,
                    name);
      }
      rest = 0.0;
    }
    const std::string label = p.label.empty() ? rotation_label(p.angle, p.phase) : p.label;
    const Segment pulse{d, p.amplitude, p.amplitude, normalize_phase(p.phase), label};
    switch (slot.align) {
      case Align::Start:
        out.push_back(pulse);
        push_wait(rest);
        break;
      case Align::Center:
        push_wait(rest / 2.0);
        out.push_back(pulse);
        push_wait(rest / 2.0);
        break;
      case Align::End:
        push_wait(rest);
        out.push_back(pulse);
        break;
    }
  }
  return out;
}

Schedule layout_timing(const ScheduleDraft& draft) {
  Schedule s;
  s.scheme = draft.scheme;
  s.system = draft.system;
  s.omega_rabi = draft.omega_rabi;
  s.prelude = layout_timing(std::span<const Slot>(draft.prelude));
  s.block = layout_timing(std::span<const Slot>(draft.block));
  s.postlude = layout_timing(std::span<const Slot>(draft.postlude));
  s.n_reps = draft.n_reps;
  s.fixed_reps = draft.fixed_reps;
  s.tau = draft.tau;
  s.tau_multiple = draft.tau_multiple;
  s.validate();
  return s;
}

// Builders -----------------------------------------------------------------

namespace {

ScheduleDraft draft_for(SchemeKind kind, const DnpParams& p, const SchemeSpec& s) {
  ScheduleDraft d;
  d.scheme = kind;
  d.system = p;
  d.omega_rabi = s.omega_rabi;
  d.n_reps = s.n_reps > 0 ? s.n_reps : 1;
  return d;
}

void prepare(const DnpParams& p, const SchemeSpec& s, SchemeKind expected) {
  require_positive_larmor(p);
  s.validate();
  if (s.scheme != expected) {
    throw Error(ErrorCode::BadValue,
                "builder for " + std::string(to_string(expected)) + " called with scheme " +
                    std::string(to_string(s.scheme)),
                "scheme");
  }
}

// Opening and closing pulses that rotate Sz <-> Sx.
Slot opening_pulse(double omega, double window) {
  return pulse_slot(window, rotation(kPi / 2.0, omega, kPhaseY), Align::Start, "opening pi/2");
}

Slot closing_pulse(double omega, double window) {
  return pulse_slot(window, rotation(kPi / 2.0, omega, kPhaseMinusY), Align::End, "closing pi/2");
}

double half_pi_duration(double omega) { return std::isinf(omega) ? 0.0 : (kPi / 2.0) / omega; }

void add_pi_train(std::vector<Slot>& slots, std::span<const double> phases, double tau,
                  double omega, const std::string& name) {
  for (std::size_t k = 0; k < phases.size(); ++k) {
    slots.push_back(pulse_slot(tau, rotation(kPi, omega, phases[k]), Align::Center,
                               name + " pi #" + std::to_string(k + 1)));
  }
}

}  // namespace

Schedule build_slic(const DnpParams& p, const SchemeSpec& s) {
  prepare(p, s, SchemeKind::SlicNovel);
  const double omega = s.omega_rabi;
  ScheduleDraft d = draft_for(SchemeKind::SlicNovel, p, s);
  d.tau = kTwoPi / p.omega_I;
  d.tau_multiple = 1.0;
  d.prelude.push_back(opening_pulse(omega, half_pi_duration(omega)));
  // Spin-lock at the Hartmann-Hahn match, one 2pi rotation per block.
  d.block.push_back(pulse_slot(d.tau, rotation(kTwoPi, p.omega_I, kPhaseX), Align::Center,
                               "spin lock"));
  d.postlude.push_back(closing_pulse(omega, half_pi_duration(omega)));
  return layout_timing(d);
}

Schedule build_s2hm_xy8(const DnpParams& p, const SchemeSpec& s) {
  prepare(p, s, SchemeKind::S2hmXy8);
  const double omega = s.omega_rabi;
  const double tau = kPi / p.omega_I;
  const double t90 = half_pi_duration(omega);
  const double extra = tau / 2.0 - t90;
  if (extra < 0.0) {
    throw Error(ErrorCode::NegativeWait,
                "transitory pi/2 pulse longer than tau/2 (omega_rabi too small)",
                "transitory pi/2");
  }
  ScheduleDraft d = draft_for(SchemeKind::S2hmXy8, p, s);
  d.tau = tau;
  d.tau_multiple = 8.5;
  d.prelude.push_back(opening_pulse(omega, t90));

  static constexpr double first[] = {kPhaseX, kPhaseY, kPhaseX, kPhaseY};
  static constexpr double second_head[] = {kPhaseY, kPhaseX, kPhaseY};
  static constexpr double second_tail[] = {kPhaseX};
  add_pi_train(d.block, first, tau, omega, "train 1");
  d.block.push_back(pulse_slot(t90 + extra / 2.0, rotation(kPi / 2.0, omega, kPhaseX),
                               Align::Start, "transitory pi/2"));
  add_pi_train(d.block, second_head, tau, omega, "train 2");
  d.block.push_back(wait_slot(extra / 2.0, "train 2 extra wait"));
  add_pi_train(d.block, second_tail, tau, omega, "train 2 tail");

  d.postlude.push_back(closing_pulse(omega, t90));
  return layout_timing(d);
}

int s2hm_pulses_per_train(const DnpParams& p, const SchemeSpec& s) {
  if (s.pulses_per_train > 0) return s.pulses_per_train;
  if (p.a_perp == 0.0) {
    throw Error(ErrorCode::BadValue, "S2HM_PLAIN needs a_perp != 0 to choose the train length",
                "a_perp");
  }
  const double n = std::round(kPi * p.omega_I / (2.0 * std::abs(p.a_perp)));
  if (n < 1.0) {
    throw Error(ErrorCode::BadValue, "pulses per train rounds to < 1", "pulses_per_train");
  }
  return static_cast<int>(n);
}

Schedule build_s2hm_plain(const DnpParams& p, const SchemeSpec& s) {
  prepare(p, s, SchemeKind::S2hmPlain);
  const double omega = s.omega_rabi;
  const double tau = kPi / p.omega_I;
  const double t90 = half_pi_duration(omega);
  const int n = s2hm_pulses_per_train(p, s);

  ScheduleDraft d = draft_for(SchemeKind::S2hmPlain, p, s);
  d.fixed_reps = true;
  d.tau = tau;
  d.tau_multiple = 2.0 * n + 1.0;
  d.prelude.push_back(opening_pulse(omega, t90));
  const std::vector<double> phases(static_cast<std::size_t>(n), kPhaseX);
  add_pi_train(d.block, phases, tau, omega, "train 1");
  // Train-to-train delay of tau/2 including the transitory pulse.
  d.block.push_back(pulse_slot(tau / 2.0, rotation(kPi / 2.0, omega, kPhaseX), Align::Start,
                               "transitory pi/2"));
  add_pi_train(d.block, phases, tau, omega, "train 2");
  d.block.push_back(wait_slot(tau / 2.0, "refocusing wait"));
  d.postlude.push_back(closing_pulse(omega, t90));
  return layout_timing(d);
}

Schedule build_pulsepol(const DnpParams& p, const SchemeSpec& s) {
  prepare(p, s, SchemeKind::PulsePol);
  const double omega = s.omega_rabi;
  const double tau = s.tau_factor * kPi / p.omega_I;
  const double t90 = half_pi_duration(omega);
  const double inner = tau / 2.0 - 2.0 * t90;
  if (inner < 0.0) {
    throw Error(ErrorCode::NegativeWait, "pi/2 pulses do not fit into tau/2", "pulsepol sub-block");
  }
  ScheduleDraft d = draft_for(SchemeKind::PulsePol, p, s);
  d.tau = tau;
  d.tau_multiple = 1.0;
  // Second sub-block: every phase retarded by the shift (Y,X,Y -> X,-Y,X for pi/2).
  for (const double shift : {0.0, -s.phase_shift}) {
    const std::string tag = shift == 0.0 ? "sub-block 1" : "sub-block 2";
    d.block.push_back(pulse_slot(t90, rotation(kPi / 2.0, omega, kPhaseY + shift), Align::Start,
                                 tag + " opening pi/2"));
    d.block.push_back(pulse_slot(inner, rotation(kPi, omega, kPhaseX + shift), Align::Center,
                                 tag + " central pi"));
    d.block.push_back(pulse_slot(t90, rotation(kPi / 2.0, omega, kPhaseY + shift), Align::End,
                                 tag + " closing pi/2"));
  }
  return layout_timing(d);
}

Schedule build_adapt(const DnpParams& p, const SchemeSpec& s) {
  prepare(p, s, SchemeKind::AdaptTopDnp);
  const double omega = s.omega_rabi;
  const double tau = kPi / (2.0 * p.omega_I);
  const double t90 = half_pi_duration(omega);
  const double gap = tau - t90;
  if (gap < 0.0) {
    throw Error(ErrorCode::NegativeWait, "pi/2 pulse longer than tau", "adapt pulse");
  }
  ScheduleDraft d = draft_for(SchemeKind::AdaptTopDnp, p, s);
  d.tau = tau;
  d.tau_multiple = 4.0;
  // Equal gaps between every pair of consecutive pulses, including the
  // opening and closing pulses.
  d.prelude.push_back(opening_pulse(omega, t90 + gap / 2.0));
  for (int k = 0; k < 4; ++k) {
    d.block.push_back(pulse_slot(tau, rotation(kPi / 2.0, omega, kPhaseX), Align::Center,
                                 "adapt pi/2 #" + std::to_string(k + 1)));
  }
  d.postlude.push_back(closing_pulse(omega, t90 + gap / 2.0));
  return layout_timing(d);
}

Schedule build_b1_sweep(const DnpParams& p, const SchemeSpec& s) {
  prepare(p, s, SchemeKind::B1Sweep);
  const double omega = s.omega_rabi;
  const double lo = s.sweep_lo * p.omega_I;
  const double hi = s.sweep_hi * p.omega_I;
  double duration = s.sweep_duration;
  if (duration == 0.0) {
    const double rate = s.sweep_rate > 0.0 ? s.sweep_rate : p.a_perp * p.a_perp / kTwoPi;
    if (!(rate > 0.0)) {
      throw Error(ErrorCode::BadValue, "sweep rate is zero", "sweep_rate");
    }
    duration = (hi - lo) / rate;
  }
  if (!(duration > 0.0)) {
    throw Error(ErrorCode::BadValue,
                "sweep duration is zero; give sweep_duration for a degenerate range",
                "sweep_duration");
  }
  const int n = s.sweep_segments;
  const double dt = duration / n;
  const double t90 = half_pi_duration(omega);

  ScheduleDraft d = draft_for(SchemeKind::B1Sweep, p, s);
  d.fixed_reps = true;
  d.n_reps = 1;
  d.tau = duration;
  d.tau_multiple = 1.0;
  d.prelude.push_back(opening_pulse(omega, t90));
  for (int k = 0; k < n; ++k) {
    // Cell-centred amplitudes, linear in k.
    const double amp = lo + (hi - lo) * (k + 0.5) / n;
    if (amp > 0.0) {
      d.block.push_back(pulse_slot(
          dt, PulseSpec{amp * dt, amp, kPhaseX, "sweep[" + std::to_string(k) + "]"},
          Align::Center, "sweep step " + std::to_string(k)));
    } else {
      d.block.push_back(wait_slot(dt, "sweep step " + std::to_string(k)));
    }
  }
  d.postlude.push_back(closing_pulse(omega, t90));
  return layout_timing(d);
}

Schedule build_schedule(const DnpParams& p, const SchemeSpec& s) {
  switch (s.scheme) {
    case SchemeKind::SlicNovel: return build_slic(p, s);
    case SchemeKind::S2hmPlain: return build_s2hm_plain(p, s);
    case SchemeKind::S2hmXy8: return build_s2hm_xy8(p, s);
    case SchemeKind::PulsePol: return build_pulsepol(p, s);
    case SchemeKind::AdaptTopDnp: return build_adapt(p, s);
    case SchemeKind::B1Sweep: return build_b1_sweep(p, s);
  }
  throw Error(ErrorCode::BadValue, "unknown scheme", "scheme");
}

}  // namespace spinseq
