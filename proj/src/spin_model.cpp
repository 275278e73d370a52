#include "spinseq/spin_model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace spinseq {

namespace {

constexpr Complex kI{0.0, 1.0};

Operator pauli_half(char axis) {
  Matrix m = Matrix::Zero(2, 2);
  switch (axis) {
    case 'x': m(0, 1) = 0.5; m(1, 0) = 0.5; break;
    case 'y': m(0, 1) = -0.5 * kI; m(1, 0) = 0.5 * kI; break;
    case 'z': m(0, 0) = 0.5; m(1, 1) = -0.5; break;
  }
  return Operator(std::move(m));
}

Operator embed(const Operator& single, int n_spins, int index) {
  Operator out = index == 1 ? single : Operator::identity(2);
  for (int k = 2; k <= n_spins; ++k) {
    out = kron(out, k == index ? single : Operator::identity(2));
  }
  return out;
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::BadValue, std::string(name) + " must be finite", name);
  }
}

// |a><b| on the 4-dim hydrogen manifold in the ordered basis S0, T0, T+, T-,
// tensored with the S identity.
Operator st_outer(int a, int b) {
  Matrix m = Matrix::Zero(4, 4);
  m(a, b) = 1.0;
  return kron(Operator(std::move(m)), Operator::identity(2));
}

constexpr int kS0 = 0;
constexpr int kT0 = 1;
constexpr int kTp = 2;
constexpr int kTm = 3;

}  // namespace

SpinOps spin_ops(int n_spins, int index) {
  if (n_spins < 1 || n_spins > 3 || index < 1 || index > n_spins) {
    throw Error(ErrorCode::InvalidArgument,
                "spin_ops: require 1 <= index <= n_spins <= 3, got index " +
                    std::to_string(index) + " of " + std::to_string(n_spins));
  }
  return {embed(pauli_half('x'), n_spins, index), embed(pauli_half('y'), n_spins, index),
          embed(pauli_half('z'), n_spins, index)};
}

std::vector<std::string> DnpParams::regime_warnings() const {
  std::vector<std::string> w;
  if (a_perp == 0.0) {
    w.emplace_back("a_perp is zero: no polarization transfer is possible");
  } else if (omega_I < 4.0 * std::abs(a_perp)) {
    std::ostringstream os;
    os << "omega_I (" << omega_I << ") < 4*|a_perp| (" << 4.0 * std::abs(a_perp)
       << "): outside the weak-coupling regime";
    w.push_back(os.str());
  }
  return w;
}

void DnpParams::validate() const {
  require_finite(omega_I, "omega_I");
  require_finite(a_perp, "a_perp");
  require_finite(omega_S, "omega_S");
}

std::vector<std::string> PhipParams::regime_warnings() const {
  std::vector<std::string> w;
  if (std::abs(j) < 4.0 * std::abs(j1 - j2)) {
    std::ostringstream os;
    os << "|J| (" << std::abs(j) << ") is not >> |J1 - J2| (" << std::abs(j1 - j2)
       << "): outside the near-equivalence regime";
    w.push_back(os.str());
  }
  return w;
}

void PhipParams::validate() const {
  require_finite(omega_I0, "omega_I0");
  require_finite(omega_S, "omega_S");
  require_finite(j, "j");
  require_finite(j1, "j1");
  require_finite(j2, "j2");
  if (j == 0.0) {
    throw Error(ErrorCode::BadValue, "inter-hydrogen coupling j must be non-zero", "j");
  }
}

Operator dnp_hamiltonian(const DnpParams& p, const DriveSample& d, const ErrorModel& e) {
  static const SpinOps I = spin_ops(2, 1);
  static const SpinOps S = spin_ops(2, 2);
  const double amp = (1.0 + e.rabi_rel) * d.amplitude;
  Matrix h = p.omega_I * I.z.matrix() + p.a_perp * (S.z.matrix() * I.x.matrix()) +
             amp * (std::cos(d.phase) * S.x.matrix() + std::sin(d.phase) * S.y.matrix()) +
             e.delta * S.z.matrix();
  return Operator(std::move(h));
}

Operator dnp_lab_hamiltonian(const DnpParams& p, const DriveSample& d) {
  static const SpinOps S = spin_ops(2, 2);
  return Operator(dnp_hamiltonian(p, d, {}).matrix() + p.omega_S * S.z.matrix());
}

Operator phip_hamiltonian(const PhipParams& p) {
  static const SpinOps I1 = spin_ops(3, 1);
  static const SpinOps I2 = spin_ops(3, 2);
  static const SpinOps S = spin_ops(3, 3);
  const Matrix dot = I1.x.matrix() * I2.x.matrix() + I1.y.matrix() * I2.y.matrix() +
                     I1.z.matrix() * I2.z.matrix();
  Matrix h = p.omega_I0 * (I1.z.matrix() + I2.z.matrix()) + p.omega_S * S.z.matrix() +
             p.j * dot + p.j1 * (S.z.matrix() * I1.z.matrix()) +
             p.j2 * (S.z.matrix() * I2.z.matrix());
  return Operator(std::move(h));
}

Operator phip_drive(const DriveSample& d) {
  static const SpinOps S = spin_ops(3, 3);
  return Operator(d.amplitude *
                  (std::cos(d.phase) * S.x.matrix() + std::sin(d.phase) * S.y.matrix()));
}

Operator singlet_triplet_unitary() {
  // Hydrogen product basis order: |uu>, |ud>, |du>, |dd>.
  const double r = 1.0 / std::numbers::sqrt2;
  Matrix h = Matrix::Zero(4, 4);
  h(1, kS0) = r;
  h(2, kS0) = -r;
  h(1, kT0) = r;
  h(2, kT0) = r;
  h(0, kTp) = 1.0;
  h(3, kTm) = 1.0;
  return kron(Operator(std::move(h)), Operator::identity(2));
}

PseudoSpinOps pseudo_spin_ops() {
  const SpinOps S = spin_ops(3, 3);
  PseudoSpinOps ops;
  ops.iz = 0.5 * (st_outer(kT0, kT0) - st_outer(kS0, kS0));
  ops.ix = 0.5 * (st_outer(kT0, kS0) + st_outer(kS0, kT0));
  ops.iy = Complex(0.0, -0.5) * (st_outer(kT0, kS0) - st_outer(kS0, kT0));
  ops.itz = 0.5 * (st_outer(kTp, kTp) - st_outer(kTm, kTm));
  ops.proj_i = st_outer(kT0, kT0) + st_outer(kS0, kS0);
  ops.proj_it = st_outer(kTp, kTp) + st_outer(kTm, kTm);
  ops.sx = S.x;
  ops.sy = S.y;
  ops.sz = S.z;
  return ops;
}

bool IdentityReport::all_passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return !checks.empty();
}

IdentityReport pseudospin_identities_report(const PhipParams& p, double tol) {
  const Operator u = singlet_triplet_unitary();
  const auto to_st = [&u](const Operator& op) { return u.adjoint() * op * u; };
  const SpinOps I1 = spin_ops(3, 1);
  const SpinOps I2 = spin_ops(3, 2);
  const PseudoSpinOps ps = pseudo_spin_ops();

  const Operator i1z = to_st(I1.z);
  const Operator i2z = to_st(I2.z);
  const Operator dot = to_st(I1.x * I2.x + I1.y * I2.y + I1.z * I2.z);
  const Operator id8 = Operator::identity(8);

  IdentityReport report;
  const auto add = [&](std::string name, const Operator& lhs, const Operator& rhs) {
    const double r = max_abs_diff(lhs.matrix(), rhs.matrix());
    report.checks.push_back({std::move(name), r, r <= tol});
  };

  add("I1z = Itz + Ix", i1z, ps.itz + ps.ix);
  add("I2z = Itz - Ix", i2z, ps.itz - ps.ix);
  add("I1.I2 = P_it/4 - P_i/4 + Iz", dot, 0.25 * ps.proj_it - 0.25 * ps.proj_i + ps.iz);
  add("Itz^2 = P_it/4", ps.itz * ps.itz, 0.25 * ps.proj_it);
  add("Iz^2 = P_i/4", ps.iz * ps.iz, 0.25 * ps.proj_i);
  add("P_i + P_it = 1", ps.proj_i + ps.proj_it, id8);

  // Transformed three-spin Hamiltonian split into the DNP-like part and the
  // part that only shifts energies within each block.
  const Operator first = p.j * ps.iz + p.omega_S * ps.sz + (p.j1 - p.j2) * (ps.ix * ps.sz);
  const Operator second = (2.0 * p.omega_I0) * ps.itz + (p.j / 4.0) * ps.proj_it -
                          (p.j / 4.0) * ps.proj_i +
                          (p.j1 + p.j2) * (ps.itz * ps.sz);
  const Operator h = to_st(phip_hamiltonian(p));
  // Hamiltonian entries scale with the Larmor frequencies; compare relative
  // to the largest entry so the absolute tolerance stays meaningful.
  const double scale = std::max(1.0, h.matrix().cwiseAbs().maxCoeff());
  {
    const double r = max_abs_diff(h.matrix(), (first + second).matrix()) / scale;
    report.checks.push_back({"H = first line + second line (relative)", r, r <= tol});
  }

  const std::vector<std::pair<std::string, Operator>> first_terms = {
      {"J Iz", p.j * ps.iz},
      {"wS Sz", p.omega_S * ps.sz},
      {"(J1-J2) Ix Sz", (p.j1 - p.j2) * (ps.ix * ps.sz)}};
  const std::vector<std::pair<std::string, Operator>> second_terms = {
      {"2 wI0 Itz", (2.0 * p.omega_I0) * ps.itz},
      {"J/4 P_it", (p.j / 4.0) * ps.proj_it},
      {"-J/4 P_i", (-p.j / 4.0) * ps.proj_i},
      {"(J1+J2) Itz Sz", (p.j1 + p.j2) * (ps.itz * ps.sz)}};
  double worst = 0.0;
  for (const auto& [na, a] : first_terms) {
    for (const auto& [nb, b] : second_terms) {
      worst = std::max(worst, commutator_norm(a, b) / (scale * scale));
    }
  }
  report.checks.push_back({"[first-line term, second-line term] = 0 (relative)", worst,
                           worst <= tol});
  return report;
}

MappedParams map_phip_to_dnp(const PhipParams& p) {
  p.validate();
  MappedParams out;
  out.dnp.omega_I = p.j;
  out.dnp.a_perp = p.j1 - p.j2;
  out.dnp.omega_S = p.omega_S;
  out.warnings = p.regime_warnings();
  if (out.dnp.a_perp == 0.0) {
    out.warnings.emplace_back("J1 == J2: effective coupling a_perp is zero, no transfer possible");
  }
  return out;
}

Matrix pseudo_spin_embedding() {
  const Matrix u = singlet_triplet_unitary().matrix();
  Matrix v = Matrix::Zero(8, 4);
  // Singlet/triplet basis index = 2 * hydrogen_state + s.
  for (int s = 0; s < 2; ++s) {
    v.col(0 + s) = u.col(2 * kT0 + s);  // |up>_I  (x) |s>
    v.col(2 + s) = u.col(2 * kS0 + s);  // |down>_I (x) |s>
  }
  return v;
}

EquivalenceResult check_dynamical_equivalence(const PhipParams& p,
                                              const std::vector<EquivalenceSegment>& segments,
                                              const DensityMatrix& rho_dnp) {
  if (rho_dnp.dim() != 4) {
    throw Error(ErrorCode::DimensionMismatch, "equivalence check expects a 4x4 state");
  }
  const MappedParams mapped = map_phip_to_dnp(p);
  const Matrix v = pseudo_spin_embedding();
  const Operator h8 = phip_hamiltonian(p);

  const SpinOps I4 = spin_ops(2, 1);
  const SpinOps S4 = spin_ops(2, 2);
  const Operator st = singlet_triplet_unitary();
  const PseudoSpinOps ps = pseudo_spin_ops();
  // Observables of the three-spin model expressed in the product basis.
  const Operator iz8 = st * ps.iz * st.adjoint();
  const Operator sz8 = st * ps.sz * st.adjoint();
  const Operator leak8 = st * ps.proj_it * st.adjoint();

  DensityMatrix rho4 = rho_dnp;
  DensityMatrix rho8(v * rho_dnp.matrix() * v.adjoint());

  EquivalenceResult result;
  const auto compare = [&] {
    result.max_sz_deviation = std::max(
        result.max_sz_deviation, std::abs(expectation(rho4, S4.z) - expectation(rho8, sz8)));
    result.max_iz_deviation = std::max(
        result.max_iz_deviation, std::abs(expectation(rho4, I4.z) - expectation(rho8, iz8)));
    result.max_leakage = std::max(result.max_leakage, std::abs(expectation(rho8, leak8)));
  };
  compare();
  for (const auto& seg : segments) {
    const Operator u4 = propagator(dnp_lab_hamiltonian(mapped.dnp, seg.drive), seg.duration);
    const Operator u8 = propagator(h8 + phip_drive(seg.drive), seg.duration);
    rho4 = evolve(rho4, u4);
    rho8 = evolve(rho8, u8);
    compare();
    ++result.boundaries;
  }
  return result;
}

}  // namespace spinseq
