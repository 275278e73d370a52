#pragma once

// Spin operators and the two Hamiltonians the library works with:
//
//  * the DNP-style two-spin model on I (x) S (I first, |up> first),
//      H = wI Iz + A Sz Ix + (1 + r) W (cos phi Sx + sin phi Sy) + Delta Sz,
//    written in the frame rotating with the S drive, so wS does not appear;
//  * the three-spin hydrogen/carbon model on I1 (x) I2 (x) S,
//      H = wI0 (I1z + I2z) + wS Sz + J I1.I2 + J1 Sz I1z + J2 Sz I2z.
//
// Sign conventions: phase 0 drives along +x, phase pi/2 along +y. The
// pseudo-spin I of the hydrogen pair has |T0> as spin-up and |S0> as
// spin-down, so 2Iz = |T0><T0| - |S0><S0| and 2Ix = |T0><S0| + |S0><T0|.
// All frequencies are angular; dimensionless runs use A = 1.

#include <array>
#include <string>
#include <vector>

#include "spinseq/linalg.hpp"

namespace spinseq {

struct SpinOps {
  Operator x, y, z;
};

// sigma/2 for spin `index` (1-based) of an n-spin register, 1 <= n <= 3.
SpinOps spin_ops(int n_spins, int index);

struct DnpParams {
  double omega_I = 0.0;
  double a_perp = 0.0;
  double omega_S = 0.0;  // metadata only in the rotating-frame model

  // Non-fatal advisories (no coupling, weak scale separation).
  std::vector<std::string> regime_warnings() const;
  void validate() const;

  friend bool operator==(const DnpParams&, const DnpParams&) = default;
};

struct PhipParams {
  double omega_I0 = 0.0;
  double omega_S = 0.0;
  double j = 0.0;
  double j1 = 0.0;
  double j2 = 0.0;

  std::vector<std::string> regime_warnings() const;
  void validate() const;

  friend bool operator==(const PhipParams&, const PhipParams&) = default;
};

struct DriveSample {
  double amplitude = 0.0;
  double phase = 0.0;
};

struct ErrorModel {
  double delta = 0.0;
  double rabi_rel = 0.0;

  friend bool operator==(const ErrorModel&, const ErrorModel&) = default;
};

Operator dnp_hamiltonian(const DnpParams& p, const DriveSample& d, const ErrorModel& e);

// DNP model with the S Larmor term wS Sz kept (no rotating frame) and an
// arbitrary S drive; used to compare against the three-spin model.
Operator dnp_lab_hamiltonian(const DnpParams& p, const DriveSample& d);

Operator phip_hamiltonian(const PhipParams& p);

// The same drive term, W (cos phi Sx + sin phi Sy), embedded on the S spin of
// the three-spin register.
Operator phip_drive(const DriveSample& d);

// Columns are |S0>, |T0>, |T+>, |T->, each tensored with the S basis
// {|up>, |down>}, expressed in the product basis I1 (x) I2 (x) S.
Operator singlet_triplet_unitary();

// Operators on the hydrogen manifold (x) S, written in the
// singlet/triplet basis (ordering as above).
struct PseudoSpinOps {
  Operator iz, ix, iy;   // pseudo-spin I on {T0, S0}
  Operator itz;          // complementary pseudo-spin on {T+, T-}
  Operator proj_i;       // projector onto span{T0, S0}
  Operator proj_it;      // projector onto span{T+, T-}
  Operator sx, sy, sz;
};
PseudoSpinOps pseudo_spin_ops();

struct IdentityCheck {
  std::string name;
  double residual = 0.0;
  bool passed = false;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  bool all_passed() const;
};

// Checks the pseudo-spin operator identities, projector completeness and the
// block structure of the transformed three-spin Hamiltonian (evaluated at
// `p`) to within `tol`.
IdentityReport pseudospin_identities_report(const PhipParams& p = {1000.0, 250.0, 24.0, 2.0, 1.0},
                                            double tol = 1e-13);

struct MappedParams {
  DnpParams dnp;
  std::vector<std::string> warnings;
};

// J -> wI, J1 - J2 -> A, wS -> wS.
MappedParams map_phip_to_dnp(const PhipParams& p);

// Isometry (8x4) embedding the DNP basis {|up>,|down>}_I (x) S into the
// three-spin product basis via |up>_I -> |T0>, |down>_I -> |S0>.
Matrix pseudo_spin_embedding();

struct EquivalenceSegment {
  double duration = 0.0;
  DriveSample drive;
};

struct EquivalenceResult {
  double max_sz_deviation = 0.0;
  double max_iz_deviation = 0.0;
  double max_leakage = 0.0;
  int boundaries = 0;
};

// Evolves `rho_dnp` (4x4) under the two-spin lab-frame model and its
// embedding under the three-spin model, segment by segment, and compares
// <Sz> and <Iz> at every boundary.
EquivalenceResult check_dynamical_equivalence(const PhipParams& p,
                                              const std::vector<EquivalenceSegment>& segments,
                                              const DensityMatrix& rho_dnp);

}  // namespace spinseq
