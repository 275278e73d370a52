#pragma once

// Reference implementations used only by the tests. They avoid the
// library's decompositions on purpose: exponentials come from a Taylor
// series, tensor products from the index formula, and Hamiltonians are
// assembled term by term from explicit Pauli matrices.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "spinseq/propagator.hpp"

namespace oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      out(i, j) = a(i / b.rows(), j / b.cols()) * b(i % b.rows(), j % b.cols());
    }
  }
  return out;
}

// exp(m) by scaling and squaring around a 50-term Taylor series.
inline Matrix expm(const Matrix& m) {
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  while (std::ldexp(norm, -s) > 0.5) ++s;
  const Matrix a = m / std::ldexp(1.0, s);
  Matrix term = Matrix::Identity(m.rows(), m.cols());
  Matrix sum = term;
  for (int k = 1; k <= 50; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  for (int k = 0; k < s; ++k) sum = sum * sum;
  return sum;
}

// e^{-i h t}
inline Matrix unitary(const Matrix& h, double t) { return expm(Complex(0.0, -t) * h); }

// Re sum_ij rho_ij obs_ji
inline double expectation(const Matrix& rho, const Matrix& obs) {
  Complex acc = 0.0;
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    for (Eigen::Index j = 0; j < rho.cols(); ++j) acc += rho(i, j) * obs(j, i);
  }
  return acc.real();
}

inline Matrix sx() {
  Matrix m(2, 2);
  m << 0.0, 0.5, 0.5, 0.0;
  return m;
}
inline Matrix sy() {
  Matrix m(2, 2);
  m << 0.0, Complex(0.0, -0.5), Complex(0.0, 0.5), 0.0;
  return m;
}
inline Matrix sz() {
  Matrix m(2, 2);
  m << 0.5, 0.0, 0.0, -0.5;
  return m;
}
inline Matrix id2() { return Matrix::Identity(2, 2); }

// Single-spin operator `op` on position `pos` (0-based) of an n-spin register.
inline Matrix on(const Matrix& op, int pos, int n) {
  Matrix out = Matrix::Identity(1, 1);
  for (int k = 0; k < n; ++k) out = kron(out, k == pos ? op : id2());
  return out;
}

inline Matrix dnp_h(const spinseq::DnpParams& p, double amp, double phase, double delta,
                    double rabi_rel) {
  const Matrix iz = on(sz(), 0, 2), ix = on(sx(), 0, 2);
  const Matrix s_x = on(sx(), 1, 2), s_y = on(sy(), 1, 2), s_z = on(sz(), 1, 2);
  return p.omega_I * iz + p.a_perp * s_z * ix +
         (1.0 + rabi_rel) * amp * (std::cos(phase) * s_x + std::sin(phase) * s_y) +
         delta * s_z;
}

inline Matrix phip_h(const spinseq::PhipParams& p) {
  Matrix h = Matrix::Zero(8, 8);
  h += p.omega_I0 * (on(sz(), 0, 3) + on(sz(), 1, 3));
  h += p.omega_S * on(sz(), 2, 3);
  h += p.j * (on(sx(), 0, 3) * on(sx(), 1, 3) + on(sy(), 0, 3) * on(sy(), 1, 3) +
              on(sz(), 0, 3) * on(sz(), 1, 3));
  h += p.j1 * on(sz(), 2, 3) * on(sz(), 0, 3);
  h += p.j2 * on(sz(), 2, 3) * on(sz(), 1, 3);
  return h;
}

inline Matrix initial_state() {
  Matrix up = Matrix::Zero(2, 2);
  up(0, 0) = 1.0;
  return kron(up, 0.5 * id2());
}

inline Matrix random_hermitian(std::mt19937_64& rng, int dim, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(g(rng), g(rng));
  }
  return 0.5 * (a + a.adjoint());
}

inline Matrix random_state(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(g(rng), g(rng));
  }
  Matrix rho = a * a.adjoint();
  return rho / rho.trace();
}

// <Sz> after every segment of the schedule, each segment cut into
// `substeps` equal pieces held at the piece-midpoint amplitude.
// Zero-duration pulses are exact rotations by their labelled angle.
// Samples follow the library convention: t = 0 first, and a zero-duration
// segment overwrites the sample at the same instant.
struct FineResult {
  std::vector<double> sz;
  double polarization = 0.0;
};

inline FineResult fine_steps(const spinseq::Schedule& sch, const spinseq::DnpParams& p,
                             const spinseq::ErrorModel& e, int substeps) {
  std::vector<const spinseq::Segment*> order;
  for (const auto& s : sch.prelude) order.push_back(&s);
  for (int n = 0; n < sch.n_reps; ++n) {
    for (const auto& s : sch.block) order.push_back(&s);
  }
  for (const auto& s : sch.postlude) order.push_back(&s);

  const Matrix s_z = on(sz(), 1, 2);
  Matrix rho = initial_state();
  FineResult out;
  out.sz.push_back(expectation(rho, s_z));
  for (const auto* seg : order) {
    Matrix u = Matrix::Identity(4, 4);
    if (seg->is_instantaneous()) {
      const double angle = *spinseq::labelled_angle(seg->label) * (1.0 + e.rabi_rel);
      const Matrix gen = std::cos(seg->phase) * on(sx(), 1, 2) + std::sin(seg->phase) * on(sy(), 1, 2);
      u = unitary(gen, angle);
      rho = u * rho * u.adjoint();
      out.sz.back() = expectation(rho, s_z);
      continue;
    }
    const double dt = seg->duration / substeps;
    if (!seg->is_ramp()) {
      const Matrix step = unitary(dnp_h(p, seg->amp_start, seg->phase, e.delta, e.rabi_rel), dt);
      for (int k = 0; k < substeps; ++k) u = step * u;
    } else {
      for (int k = 0; k < substeps; ++k) {
        const double f = (k + 0.5) / substeps;
        const double amp = seg->amp_start + (seg->amp_end - seg->amp_start) * f;
        u = unitary(dnp_h(p, amp, seg->phase, e.delta, e.rabi_rel), dt) * u;
      }
    }
    rho = u * rho * u.adjoint();
    out.sz.push_back(expectation(rho, s_z));
  }
  out.polarization = 2.0 * out.sz.back();
  return out;
}

}  // namespace oracle
