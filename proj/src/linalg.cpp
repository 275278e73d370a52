#include "spinseq/linalg.hpp"

#include <cmath>
#include <string>

namespace spinseq {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonHermitian: return "NonHermitian";
    case ErrorCode::NonUnitary: return "NonUnitary";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NegativeWait: return "NegativeWait";
    case ErrorCode::InfeasibleTiming: return "InfeasibleTiming";
    case ErrorCode::NoMaximumFound: return "NoMaximumFound";
    case ErrorCode::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorCode::NonPeriodicFrame: return "NonPeriodicFrame";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::BadValue: return "BadValue";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

void require_square(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch,
                "matrix must be square and non-empty, got " +
                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void require_same_dim(Eigen::Index a, Eigen::Index b) {
  if (a != b) {
    throw Error(ErrorCode::DimensionMismatch,
                "dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "max_abs_diff: shape mismatch");
  }
  return (a - b).cwiseAbs().maxCoeff();
}

Operator::Operator(Matrix m, const Tolerances& tol) : m_(std::move(m)) {
  require_square(m_);
  hermitian_ = max_abs_diff(m_, m_.adjoint()) <= tol.hermitian;
  const Matrix id = Matrix::Identity(m_.rows(), m_.cols());
  unitary_ = max_abs_diff(m_.adjoint() * m_, id) <= tol.unitary;
}

Operator Operator::identity(Eigen::Index dim) { return Operator(Matrix::Identity(dim, dim)); }

Operator Operator::zero(Eigen::Index dim) { return Operator(Matrix::Zero(dim, dim)); }

Operator Operator::adjoint() const { return Operator(m_.adjoint()); }

Operator operator+(const Operator& a, const Operator& b) {
  require_same_dim(a.dim(), b.dim());
  return Operator(a.m_ + b.m_);
}

Operator operator-(const Operator& a, const Operator& b) {
  require_same_dim(a.dim(), b.dim());
  return Operator(a.m_ - b.m_);
}

Operator operator*(const Operator& a, const Operator& b) {
  require_same_dim(a.dim(), b.dim());
  return Operator(a.m_ * b.m_);
}

Operator operator*(Complex s, const Operator& a) { return Operator(s * a.m_); }

Operator operator*(double s, const Operator& a) { return Operator(s * a.m_); }

double commutator_norm(const Operator& a, const Operator& b) {
  require_same_dim(a.dim(), b.dim());
  const Matrix c = a.matrix() * b.matrix() - b.matrix() * a.matrix();
  return c.cwiseAbs().maxCoeff();
}

Operator kron(const Operator& a, const Operator& b) {
  const Eigen::Index na = a.dim();
  const Eigen::Index nb = b.dim();
  Matrix out(na * nb, na * nb);
  for (Eigen::Index i = 0; i < na; ++i) {
    for (Eigen::Index j = 0; j < na; ++j) {
      out.block(i * nb, j * nb, nb, nb) = a(i, j) * b.matrix();
    }
  }
  return Operator(std::move(out));
}

Operator propagator(const Operator& h, double t) {
  if (!h.is_hermitian()) {
    throw Error(ErrorCode::NonHermitian, "propagator requires a Hermitian generator");
  }
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::InvalidArgument, "propagator duration must be finite and >= 0");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h.matrix());
  const Eigen::VectorXd& e = eig.eigenvalues();
  Eigen::VectorXcd phases(e.size());
  for (Eigen::Index k = 0; k < e.size(); ++k) {
    phases(k) = std::polar(1.0, -e(k) * t);
  }
  const Matrix& v = eig.eigenvectors();
  return Operator(v * phases.asDiagonal() * v.adjoint());
}

DensityMatrix::DensityMatrix(Matrix m, const Tolerances& tol) : m_(std::move(m)) {
  require_square(m_);
  if (std::abs(m_.trace() - Complex(1.0, 0.0)) > tol.trace) {
    throw Error(ErrorCode::InvalidState, "density matrix trace must be 1");
  }
  if (max_abs_diff(m_, m_.adjoint()) > tol.hermitian) {
    throw Error(ErrorCode::InvalidState, "density matrix must be Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -tol.negative_eigenvalue) {
    throw Error(ErrorCode::InvalidState, "density matrix must be positive semidefinite");
  }
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
  return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix evolve(const DensityMatrix& rho, const Operator& u) {
  require_same_dim(rho.dim(), u.dim());
  if (!u.is_unitary()) {
    throw Error(ErrorCode::NonUnitary, "evolve requires a unitary operator");
  }
  return DensityMatrix(u.matrix() * rho.matrix() * u.matrix().adjoint(), DensityMatrix::Unchecked{});
}

double expectation(const DensityMatrix& rho, const Operator& obs, const Tolerances& tol) {
  require_same_dim(rho.dim(), obs.dim());
  // Tr(AB) = sum_ij A_ij B_ji without forming the product.
  const Complex value = (rho.matrix().array() * obs.matrix().transpose().array()).sum();
  if (std::abs(value.imag()) > tol.imaginary_expectation * std::max(1.0, std::abs(value.real()))) {
    throw Error(ErrorCode::InvalidArgument, "expectation value has a non-negligible imaginary part");
  }
  return value.real();
}

}  // namespace spinseq
