#include "spinseq/analysis.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace spinseq {

namespace {

constexpr double kPi = std::numbers::pi;

// Vertex of the parabola through (n-1, y0), (n, y1), (n+1, y2).
double refine_peak(double n, double y0, double y1, double y2) {
  const double den = y0 - 2.0 * y1 + y2;
  if (den == 0.0) return n;
  return n + 0.5 * (y0 - y2) / den;
}

void fill_theory(EffectiveCouplingReport& r) {
  if (const auto ratio = a_star_theory_ratio(r.scheme)) {
    r.a_star_theory = *ratio * std::abs(r.params.a_perp);
    r.relative_deviation = r.a_star_measured / *r.a_star_theory - 1.0;
  }
}

Matrix block_unitary(const Schedule& sch, const DnpParams& p) {
  return sequence_propagator(sch.block, p, ErrorModel{}).matrix();
}

// Projection coefficient tr(H O) / tr(O O).
double coefficient(const Matrix& h, const Matrix& o) {
  return (h * o).trace().real() / (o * o).trace().real();
}

EffectiveCouplingReport estimate_plain_s2hm(const SchemeSpec& spec, const DnpParams& p,
                                            int n_max) {
  if (n_max <= 0) n_max = default_repetition_cap(p);
  SchemeSpec s = spec;
  s.n_reps = 1;
  std::vector<double> vals;
  int found = 0;
  for (int n = 1; n <= n_max + 1; ++n) {
    s.pulses_per_train = n;
    Schedule sch = build_s2hm_plain(p, s);
    vals.push_back(final_polarization(sch, p));
    const std::size_t k = vals.size();
    if (k >= 3 && vals[k - 2] > vals[k - 3] && vals[k - 2] > vals[k - 1]) {
      found = n - 1;
      break;
    }
  }
  if (found == 0) {
    throw Error(ErrorCode::NoMaximumFound,
                "no polarization maximum within " + std::to_string(n_max) + " pulses per train",
                "pulses_per_train");
  }
  const std::size_t i = static_cast<std::size_t>(found - 1);
  const double n_frac = refine_peak(found, vals[i - 1], vals[i], vals[i + 1]);
  const double tau = kPi / p.omega_I;
  EffectiveCouplingReport r;
  r.scheme = spec.scheme;
  r.params = p;
  r.omega_rabi = spec.omega_rabi;
  r.steps = n_frac;
  r.transfer_time = 2.0 * n_frac * tau;
  r.a_star_measured = 2.0 * kPi / r.transfer_time;
  fill_theory(r);
  return r;
}

}  // namespace

std::string_view to_string(CouplingMethod m) {
  return m == CouplingMethod::FirstMaximum ? "first-maximum" : "cycle-log";
}

std::optional<double> a_star_theory_ratio(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::SlicNovel: return 1.0;
    case SchemeKind::S2hmPlain: return 2.0 / kPi;
    case SchemeKind::PulsePol: return 2.0 * (2.0 + std::numbers::sqrt2) / (3.0 * kPi);
    default: return std::nullopt;
  }
}

EffectiveCouplingReport estimate_a_star(const SchemeSpec& spec, const DnpParams& p, int n_max) {
  if (spec.scheme == SchemeKind::B1Sweep) {
    throw Error(ErrorCode::InvalidArgument,
                "B1_SWEEP is not a repeated sequence; no effective coupling to estimate",
                "scheme");
  }
  if (spec.scheme == SchemeKind::S2hmPlain) return estimate_plain_s2hm(spec, p, n_max);

  const Schedule sch = build_schedule(p, spec);
  const RepetitionScan scan = scan_repetitions(sch, p, n_max);
  if (scan.first_max == 0) {
    throw Error(ErrorCode::NoMaximumFound, "no polarization maximum within the repetition cap",
                "n_reps");
  }
  const auto& v = scan.polarization;
  const int n = scan.first_max;
  const double n_frac = refine_peak(n, v[n - 1], v[n], v[n + 1]);

  EffectiveCouplingReport r;
  r.scheme = spec.scheme;
  r.params = p;
  r.omega_rabi = spec.omega_rabi;
  r.steps = n_frac;
  r.transfer_time = n_frac * sch.block_duration();
  r.a_star_measured = 2.0 * kPi / r.transfer_time;
  fill_theory(r);
  return r;
}

CycleHamiltonian cycle_effective_hamiltonian(const Schedule& sch, const DnpParams& p,
                                             int max_periods) {
  DnpParams free = p;
  free.a_perp = 0.0;
  const Matrix u = block_unitary(sch, p);
  const Matrix u0 = block_unitary(sch, free);

  int m = 0;
  Matrix u0m = Matrix::Identity(4, 4);
  Matrix um = Matrix::Identity(4, 4);
  for (int k = 1; k <= max_periods; ++k) {
    u0m = u0 * u0m;
    um = u * um;
    const Complex c = u0m(0, 0);
    if (std::abs(std::abs(c) - 1.0) < 1e-8 &&
        max_abs_diff(u0m, c * Matrix::Identity(4, 4)) < 1e-8) {
      m = k;
      break;
    }
  }
  if (m == 0) {
    throw Error(ErrorCode::NonPeriodicFrame,
                "uncoupled block propagator is not periodic within " +
                    std::to_string(max_periods) + " blocks",
                "block");
  }

  const double period = m * sch.block_duration();
  const Matrix u_int = u0m.adjoint() * um;
  Eigen::ComplexSchur<Matrix> schur(u_int);
  const Matrix& q = schur.matrixU();
  const Matrix& t = schur.matrixT();
  Eigen::VectorXd phases(4);
  for (int k = 0; k < 4; ++k) phases(k) = std::arg(t(k, k));
  if (phases.cwiseAbs().maxCoeff() >= 0.9 * kPi) {
    throw Error(ErrorCode::BranchAmbiguity,
                "period * |H_eff| reaches " + std::to_string(phases.cwiseAbs().maxCoeff()) +
                    " (limit 0.9 pi); shorten the period",
                "block");
  }
  // U = exp(-i H T): eigenphase theta belongs to energy -theta / T.
  Matrix h = q * (-phases / period).cast<Complex>().asDiagonal() * q.adjoint();
  h = 0.5 * (h + h.adjoint()).eval();

  const Matrix pre = sequence_propagator(sch.prelude, free, ErrorModel{}).matrix();
  h = pre.adjoint() * h * pre;

  const SpinOps i = spin_ops(2, 1);
  const SpinOps s = spin_ops(2, 2);
  const Matrix xx = i.x.matrix() * s.x.matrix();
  const Matrix yy = i.y.matrix() * s.y.matrix();
  const Matrix xy = i.x.matrix() * s.y.matrix();
  const Matrix yx = i.y.matrix() * s.x.matrix();

  CycleHamiltonian out;
  out.h_eff = Operator(h);
  out.periods = m;
  out.period = period;
  out.flip_flop = std::hypot(coefficient(h, xx + yy), coefficient(h, xy - yx));
  out.flip_flip = std::hypot(coefficient(h, xx - yy), coefficient(h, xy + yx));
  return out;
}

EffectiveCouplingReport cycle_a_star(const SchemeSpec& spec, const DnpParams& p) {
  if (spec.scheme == SchemeKind::B1Sweep) {
    throw Error(ErrorCode::InvalidArgument, "B1_SWEEP has no repeated cycle", "scheme");
  }
  const Schedule sch = build_schedule(p, spec);
  const CycleHamiltonian c = cycle_effective_hamiltonian(sch, p);
  EffectiveCouplingReport r;
  r.scheme = spec.scheme;
  r.params = p;
  r.omega_rabi = spec.omega_rabi;
  r.method = CouplingMethod::CycleLog;
  r.a_star_measured = c.a_star();
  r.transfer_time = r.a_star_measured > 0.0 ? 2.0 * kPi / r.a_star_measured : 0.0;
  r.steps = r.transfer_time / sch.block_duration();
  fill_theory(r);
  return r;
}

std::vector<double> adapt_sideband_positions(const DnpParams& p, const SchemeSpec& s, int k_max) {
  p.validate();
  if (!(p.omega_I > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "omega_I must be > 0", "omega_I");
  }
  const double tau = kPi / (2.0 * p.omega_I);
  const double spacing = 2.0 * kPi / tau;
  std::vector<double> out;
  for (int k = -std::abs(k_max); k <= std::abs(k_max); ++k) {
    const double d = k * spacing;
    if (std::abs(d) <= s.omega_rabi) out.push_back(d);
  }
  return out;
}

nlohmann::json to_json(const EffectiveCouplingReport& r) {
  nlohmann::json j{{"scheme", std::string(to_string(r.scheme))},
                   {"method", std::string(to_string(r.method))},
                   {"params", r.params},
                   {"omega_rabi", std::isinf(r.omega_rabi) ? nlohmann::json("inf")
                                                           : nlohmann::json(r.omega_rabi)},
                   {"a_star_measured", r.a_star_measured},
                   {"a_star_over_a_perp",
                    r.params.a_perp != 0.0 ? r.a_star_measured / std::abs(r.params.a_perp) : 0.0},
                   {"transfer_time", r.transfer_time},
                   {"steps", r.steps}};
  j["a_star_theory"] = r.a_star_theory ? nlohmann::json(*r.a_star_theory) : nlohmann::json();
  j["relative_deviation"] =
      r.relative_deviation ? nlohmann::json(*r.relative_deviation) : nlohmann::json();
  return j;
}

}  // namespace spinseq
