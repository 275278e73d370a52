#include "spinseq/propagator.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace spinseq {

namespace {

const SpinOps& i_ops() {
  static const SpinOps ops = spin_ops(2, 1);
  return ops;
}

const SpinOps& s_ops() {
  static const SpinOps ops = spin_ops(2, 2);
  return ops;
}

Operator ideal_rotation(const Segment& seg, const ErrorModel& e) {
  const auto angle = labelled_angle(seg.label);
  if (!angle) {
    throw Error(ErrorCode::InvalidArgument,
                "zero-duration pulse '" + seg.label + "' has no rotation angle in its label",
                seg.label);
  }
  // Drive-only generator; the rotation angle picks up the Rabi error.
  const Operator h = dnp_hamiltonian(DnpParams{}, DriveSample{1.0, seg.phase},
                                     ErrorModel{0.0, e.rabi_rel});
  return propagator(h, *angle);
}

double signed_polarization(const Matrix& u, const DensityMatrix& rho0) {
  const DensityMatrix rho = evolve(rho0, Operator(u));
  return 2.0 * expectation(rho, s_ops().z);
}

}  // namespace

DensityMatrix dnp_initial_state() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = 0.5;
  m(1, 1) = 0.5;
  return DensityMatrix(m);
}

Operator segment_propagator(const Segment& seg, const DnpParams& p, const ErrorModel& e,
                            const SimulateOptions& opt) {
  if (seg.is_instantaneous()) return ideal_rotation(seg, e);
  if (!seg.is_ramp()) {
    return propagator(dnp_hamiltonian(p, DriveSample{seg.amp_start, seg.phase}, e),
                      seg.duration);
  }
  const int n = std::max(1, opt.ramp_substeps);
  const double dt = seg.duration / n;
  Matrix u = Matrix::Identity(4, 4);
  for (int k = 0; k < n; ++k) {
    const double f = (k + 0.5) / n;
    const double amp = seg.amp_start + (seg.amp_end - seg.amp_start) * f;
    u = propagator(dnp_hamiltonian(p, DriveSample{amp, seg.phase}, e), dt).matrix() * u;
  }
  return Operator(u);
}

Operator sequence_propagator(const std::vector<Segment>& segs, const DnpParams& p,
                             const ErrorModel& e, const SimulateOptions& opt) {
  Matrix u = Matrix::Identity(4, 4);
  for (const auto& s : segs) u = segment_propagator(s, p, e, opt).matrix() * u;
  return Operator(u);
}

Operator schedule_propagator(const Schedule& sch, const DnpParams& p, const ErrorModel& e,
                             const SimulateOptions& opt) {
  const Matrix blk = sequence_propagator(sch.block, p, e, opt).matrix();
  Matrix u = sequence_propagator(sch.prelude, p, e, opt).matrix();
  for (int n = 0; n < sch.n_reps; ++n) u = blk * u;
  u = sequence_propagator(sch.postlude, p, e, opt).matrix() * u;
  return Operator(u);
}

Trajectory simulate(const Schedule& sch, const DnpParams& p, const ErrorModel& e,
                    const DensityMatrix& rho0, const SimulateOptions& opt) {
  if (rho0.dim() != 4) {
    throw Error(ErrorCode::DimensionMismatch, "initial state must be 4x4 for the two-spin model");
  }
  Trajectory tr;
  DensityMatrix rho = rho0;
  double t = 0.0;
  const auto record = [&](bool same_instant) {
    const double sz = expectation(rho, s_ops().z);
    const double iz = expectation(rho, i_ops().z);
    if (same_instant && !tr.times.empty()) {
      tr.sz.back() = sz;
      tr.iz.back() = iz;
      return;
    }
    tr.times.push_back(t);
    tr.sz.push_back(sz);
    tr.iz.push_back(iz);
  };
  record(false);

  std::vector<Operator> blk;
  blk.reserve(sch.block.size());
  for (const auto& s : sch.block) blk.push_back(segment_propagator(s, p, e, opt));

  const auto step = [&](const Segment& seg, const Operator& u) {
    rho = evolve(rho, u);
    t += seg.duration;
    record(seg.duration == 0.0);
  };
  for (const auto& s : sch.prelude) step(s, segment_propagator(s, p, e, opt));
  for (int n = 0; n < sch.n_reps; ++n) {
    for (std::size_t k = 0; k < sch.block.size(); ++k) step(sch.block[k], blk[k]);
  }
  for (const auto& s : sch.postlude) step(s, segment_propagator(s, p, e, opt));

  tr.final_state = rho;
  tr.transferred_polarization = 2.0 * tr.sz.back();
  return tr;
}

double final_polarization(const Schedule& sch, const DnpParams& p, const ErrorModel& e,
                          const DensityMatrix& rho0) {
  return signed_polarization(schedule_propagator(sch, p, e).matrix(), rho0);
}

int default_repetition_cap(const DnpParams& p) {
  if (p.a_perp == 0.0) return 1000;
  return static_cast<int>(std::ceil(10.0 * p.omega_I / std::abs(p.a_perp)));
}

RepetitionScan scan_repetitions(const Schedule& sch, const DnpParams& p, int n_max) {
  if (n_max <= 0) n_max = default_repetition_cap(p);
  const ErrorModel none{};
  const DensityMatrix rho0 = dnp_initial_state();
  const Matrix pre = sequence_propagator(sch.prelude, p, none).matrix();
  const Matrix blk = sequence_propagator(sch.block, p, none).matrix();
  const Matrix post = sequence_propagator(sch.postlude, p, none).matrix();

  RepetitionScan out;
  Matrix u = pre;
  out.polarization.push_back(signed_polarization(post * u, rho0));
  for (int n = 1; n <= n_max + 1; ++n) {
    u = blk * u;
    out.polarization.push_back(signed_polarization(post * u, rho0));
    const auto& v = out.polarization;
    if (n >= 2 && v[n - 1] > v[n - 2] && v[n - 1] > v[n]) {
      out.first_max = n - 1;
      break;
    }
  }
  return out;
}

int select_repetitions(const Schedule& sch, const DnpParams& p, int n_max) {
  if (sch.fixed_reps) return 1;
  const int cap = n_max > 0 ? n_max : default_repetition_cap(p);
  const RepetitionScan scan = scan_repetitions(sch, p, cap);
  if (scan.first_max == 0) {
    throw Error(ErrorCode::NoMaximumFound,
                "no polarization maximum within " + std::to_string(cap) + " repetitions of " +
                    std::string(to_string(sch.scheme)),
                "n_reps");
  }
  return scan.first_max;
}

double transfer_time(const Schedule& sch, const DnpParams& p, int n_max) {
  const int n = select_repetitions(sch, p, n_max);
  return sch.prelude_duration() + n * sch.block_duration() + sch.postlude_duration();
}

Schedule reversed_schedule(const Schedule& sch) {
  const auto flip = [](const std::vector<Segment>& segs) {
    std::vector<Segment> out(segs.rbegin(), segs.rend());
    for (auto& s : out) {
      std::swap(s.amp_start, s.amp_end);
      if (s.is_wait()) continue;
      s.phase = normalize_phase(s.phase + std::numbers::pi);
      if (const auto a = labelled_angle(s.label)) s.label = rotation_label(*a, s.phase);
    }
    return out;
  };
  Schedule r = sch;
  r.prelude = flip(sch.postlude);
  r.block = flip(sch.block);
  r.postlude = flip(sch.prelude);
  return r;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
  os << "time,sz,iz\n";
  char buf[96];
  for (std::size_t k = 0; k < t.times.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t.times[k], t.sz[k], t.iz[k]);
    os << buf;
  }
}

}  // namespace spinseq
