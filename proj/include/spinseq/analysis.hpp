#pragma once

// Effective flip-flop couplings of the transfer sequences.
//
// A sequence that transfers polarization acts, on average, like
//   H_eff = (A*/2) (Ix Sx + Iy Sy),
// which moves the I polarization onto S after T = 2 pi / A*.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spinseq/propagator.hpp"

namespace spinseq {

enum class CouplingMethod { FirstMaximum, CycleLog };
std::string_view to_string(CouplingMethod m);

struct EffectiveCouplingReport {
  SchemeKind scheme = SchemeKind::SlicNovel;
  DnpParams params;
  double omega_rabi = 0.0;
  double a_star_measured = 0.0;             // rad/s
  std::optional<double> a_star_theory;      // rad/s
  std::optional<double> relative_deviation;  // measured / theory - 1
  CouplingMethod method = CouplingMethod::FirstMaximum;
  double transfer_time = 0.0;  // T = 2 pi / A*, prelude and postlude excluded
  double steps = 0.0;          // interpolated repetition (or pulse) count at the maximum
};

// Closed-form A*/A for the schemes that have one: SLIC 1, plain S2hM 2/pi,
// PulsePol 2(2 + sqrt2)/(3 pi).
std::optional<double> a_star_theory_ratio(SchemeKind kind);

// First-maximum estimate. Repetition schemes scan N; S2HM_PLAIN scans the
// number of pulses per train with N = 1. The maximum is refined by a
// parabola through the three samples around it. B1_SWEEP has no repetition
// structure and is rejected.
EffectiveCouplingReport estimate_a_star(const SchemeSpec& spec, const DnpParams& p,
                                        int n_max = 0);

struct CycleHamiltonian {
  Operator h_eff;       // in the frame reached after the prelude
  int periods = 1;      // blocks per frame period
  double period = 0.0;  // periods * block duration
  double flip_flop = 0.0;  // |coefficient| of (IxSx + IySy), phase-rotations included
  double flip_flip = 0.0;  // |coefficient| of (IxSx - IySy)
  double a_star() const { return 2.0 * flip_flop; }
};

// Average Hamiltonian of the block from the principal logarithm of the
// block propagator taken in the interaction frame of the uncoupled (A = 0)
// block. The frame period is the smallest number of blocks (up to
// max_periods) after which the uncoupled propagator is a global phase;
// NonPeriodicFrame otherwise. BranchAmbiguity if period * |H_eff| >= 0.9 pi.
CycleHamiltonian cycle_effective_hamiltonian(const Schedule& sch, const DnpParams& p,
                                             int max_periods = 8);

EffectiveCouplingReport cycle_a_star(const SchemeSpec& spec, const DnpParams& p);

// Predicted detunings of the ADAPT side-bands, k * 2 pi / tau for
// |k| <= k_max, where tau is the pulse-to-pulse delay, restricted to
// |Delta| <= omega_rabi. k = 0 is the central band.
std::vector<double> adapt_sideband_positions(const DnpParams& p, const SchemeSpec& s, int k_max);

nlohmann::json to_json(const EffectiveCouplingReport& r);

}  // namespace spinseq
