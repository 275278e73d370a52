#pragma once

// Small dense complex linear algebra for spin systems of up to three
// spin-1/2 particles (dimension 2, 4 or 8).

#include <complex>

#include <Eigen/Dense>

#include "spinseq/error.hpp"

namespace spinseq {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

struct Tolerances {
  double hermitian = 1e-12;
  double unitary = 1e-10;
  double trace = 1e-12;
  double negative_eigenvalue = 1e-10;
  double imaginary_expectation = 1e-12;
};

// Square complex matrix that remembers whether it was verified Hermitian
// and/or unitary at construction. Flags are computed with the supplied
// tolerances and never change afterwards.
class Operator {
 public:
  Operator() = default;
  explicit Operator(Matrix m, const Tolerances& tol = {});

  static Operator identity(Eigen::Index dim);
  static Operator zero(Eigen::Index dim);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  bool is_hermitian() const { return hermitian_; }
  bool is_unitary() const { return unitary_; }

  Complex operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

  Operator adjoint() const;

  friend Operator operator+(const Operator& a, const Operator& b);
  friend Operator operator-(const Operator& a, const Operator& b);
  friend Operator operator*(const Operator& a, const Operator& b);
  friend Operator operator*(Complex s, const Operator& a);
  friend Operator operator*(double s, const Operator& a);

 private:
  Matrix m_;
  bool hermitian_ = false;
  bool unitary_ = false;
};

// Max elementwise |a - b|; throws DimensionMismatch on shape mismatch.
double max_abs_diff(const Matrix& a, const Matrix& b);
double commutator_norm(const Operator& a, const Operator& b);

Operator kron(const Operator& a, const Operator& b);

// e^{-i h t} via Hermitian eigendecomposition. Rejects non-Hermitian h and
// negative t.
Operator propagator(const Operator& h, double t);

class DensityMatrix {
 public:
  // Validates trace, Hermiticity and positivity.
  explicit DensityMatrix(Matrix m, const Tolerances& tol = {});

  static DensityMatrix maximally_mixed(Eigen::Index dim);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  Complex trace() const { return m_.trace(); }

 private:
  struct Unchecked {};
  DensityMatrix(Matrix m, Unchecked) : m_(std::move(m)) {}
  friend DensityMatrix evolve(const DensityMatrix&, const Operator&);

  Matrix m_;
};

// U rho U^dagger. Requires a unitary-flagged operator of matching dimension.
DensityMatrix evolve(const DensityMatrix& rho, const Operator& u);

// Re Tr(rho * obs); throws if the imaginary part exceeds the tolerance.
double expectation(const DensityMatrix& rho, const Operator& obs,
                   const Tolerances& tol = {});

}  // namespace spinseq
