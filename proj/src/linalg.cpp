#include "sloc/linalg.hpp"

#include <cmath>
#include <string>

namespace sloc::linalg {

namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw NonFiniteInput(std::string(what) + " contains a non-finite entry");
  }
}

}  // namespace

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("SymMatrix: input is " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ", expected square");
  }
  require_finite(m, "SymMatrix");
  m_ = 0.5 * (m + m.transpose());
}

PsdMatrix::PsdMatrix(const SymMatrix& m) : m_(m.entries()) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m_);
  if (solver.info() != Eigen::Success) {
    throw NotPsd("PsdMatrix: eigendecomposition failed");
  }
  evals_ = solver.eigenvalues();
  evecs_ = solver.eigenvectors();
  const double scale = std::max(1.0, evals_(evals_.size() - 1));
  const double floor = -kPsdTol * scale;
  if (evals_(0) < floor) {
    throw NotPsd("PsdMatrix: smallest eigenvalue " + std::to_string(evals_(0)) +
                 " below -psd_tol*scale = " + std::to_string(floor));
  }
  for (Eigen::Index i = 0; i < evals_.size() && evals_(i) < 0.0; ++i) {
    evals_(i) = 0.0;
  }
}

SymMatrix psd_sqrt(const PsdMatrix& q) {
  const Eigen::VectorXd roots = q.eigenvalues().cwiseSqrt();
  return SymMatrix(q.eigenvectors() * roots.asDiagonal() * q.eigenvectors().transpose());
}

PsdMatrix psd_inverse(const PsdMatrix& q) {
  const double floor = kInvFloorRel * q.max_eigenvalue();
  if (q.min_eigenvalue() <= floor) {
    throw SingularMatrix("psd_inverse: smallest eigenvalue " +
                         std::to_string(q.min_eigenvalue()) +
                         " is at or below the floor " + std::to_string(floor) +
                         "; regularize the input");
  }
  const Eigen::VectorXd inv = q.eigenvalues().cwiseInverse();
  return PsdMatrix(q.eigenvectors() * inv.asDiagonal() * q.eigenvectors().transpose());
}

SymMatrix psd_inv_sqrt(const PsdMatrix& q) {
  const double floor = kInvFloorRel * q.max_eigenvalue();
  if (q.min_eigenvalue() <= floor) {
    throw SingularMatrix("psd_inv_sqrt: smallest eigenvalue " +
                         std::to_string(q.min_eigenvalue()) +
                         " is at or below the floor " + std::to_string(floor));
  }
  const Eigen::VectorXd inv_roots = q.eigenvalues().cwiseSqrt().cwiseInverse();
  return SymMatrix(q.eigenvectors() * inv_roots.asDiagonal() * q.eigenvectors().transpose());
}

double logdet(const PsdMatrix& q) {
  const double floor = kInvFloorRel * q.max_eigenvalue();
  if (q.min_eigenvalue() <= floor) {
    throw SingularMatrix("logdet: eigenvalue at or below the floor " + std::to_string(floor));
  }
  return q.eigenvalues().array().log().sum();
}

OrderVerdict loewner_leq(const SymMatrix& a, const SymMatrix& b, double tol) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("loewner_leq: dimensions " + std::to_string(a.dim()) + " vs " +
                            std::to_string(b.dim()));
  }
  const double slack = min_sym_eigenvalue(b.entries() - a.entries());
  return OrderVerdict{slack >= -tol, slack};
}

double weighted_sq_norm(const Eigen::VectorXd& v, const PsdMatrix& w) {
  if (v.size() != w.dim()) {
    throw DimensionMismatch("weighted_sq_norm: vector size " + std::to_string(v.size()) +
                            " vs matrix dim " + std::to_string(w.dim()));
  }
  return v.dot(w.entries() * v);
}

double min_sym_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("min_sym_eigenvalue: non-square input");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (m + m.transpose()),
                                                        Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

}  // namespace sloc::linalg
