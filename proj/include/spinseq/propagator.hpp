#pragma once

// Piecewise-constant propagation of the two-spin model under a Schedule.

#include <iosfwd>
#include <vector>

#include "spinseq/sequence.hpp"

namespace spinseq {

// |up><up|_I (x) 1/2 on I (x) S.
DensityMatrix dnp_initial_state();

struct SimulateOptions {
  // Ramped segments are split into this many pieces, each held at its
  // midpoint amplitude. Constant segments are always exact.
  int ramp_substeps = 1;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> sz;
  std::vector<double> iz;
  DensityMatrix final_state = DensityMatrix::maximally_mixed(4);
  double transferred_polarization = 0.0;  // signed, 2 <Sz>
};

// Propagator of a single segment; ideal (zero-duration) pulses are exact
// rotations by the labelled angle scaled by (1 + rabi_rel).
Operator segment_propagator(const Segment& seg, const DnpParams& p, const ErrorModel& e,
                            const SimulateOptions& opt = {});
// Time-ordered product over a segment list (first segment acts first).
Operator sequence_propagator(const std::vector<Segment>& segs, const DnpParams& p,
                             const ErrorModel& e, const SimulateOptions& opt = {});
// Full schedule: postlude * block^n_reps * prelude.
Operator schedule_propagator(const Schedule& sch, const DnpParams& p, const ErrorModel& e,
                             const SimulateOptions& opt = {});

// Records <Sz>, <Iz> at t = 0 and after every segment. Zero-duration
// segments replace the sample at the same instant, so times are strictly
// increasing.
Trajectory simulate(const Schedule& sch, const DnpParams& p, const ErrorModel& e = {},
                    const DensityMatrix& rho0 = dnp_initial_state(),
                    const SimulateOptions& opt = {});

// Signed 2<Sz> after the schedule, without recording a trajectory.
double final_polarization(const Schedule& sch, const DnpParams& p, const ErrorModel& e = {},
                          const DensityMatrix& rho0 = dnp_initial_state());

// Cap on the repetition scan: ceil(10 wI / |A|), or 1000 without coupling.
int default_repetition_cap(const DnpParams& p);

struct RepetitionScan {
  std::vector<double> polarization;  // index N = 0, 1, ...
  int first_max = 0;                 // 0 if no maximum before the cap
};

// Polarization after N = 0..(first maximum + 1) error-free repetitions,
// prelude and postlude included. Stops at n_max.
RepetitionScan scan_repetitions(const Schedule& sch, const DnpParams& p, int n_max = 0);

// First N whose polarization exceeds both neighbours (N = 0 counts as a
// neighbour). Schemes with fixed repetitions return 1 without scanning.
// Throws NoMaximumFound when the cap is reached.
int select_repetitions(const Schedule& sch, const DnpParams& p, int n_max = 0);

// Schedule duration at the selected N.
double transfer_time(const Schedule& sch, const DnpParams& p, int n_max = 0);

// Segments in reverse order with every drive vector negated (phase + pi).
// Undoes the Sz dynamics of the original in the error-free model.
Schedule reversed_schedule(const Schedule& sch);

// Columns time,sz,iz.
void write_trajectory_csv(std::ostream& os, const Trajectory& t);

}  // namespace spinseq
