#pragma once

#include <Eigen/Dense>

#include "sloc/errors.hpp"

namespace sloc::linalg {

// Tolerances for desk-scale dense symmetric matrices (n up to ~64).
inline constexpr double kSymTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kReconTol = 1e-8;
// Relative floor under which a spectrum counts as singular: floor = kInvFloorRel * lambda_max.
inline constexpr double kInvFloorRel = 1e-12;

// Square real matrix, symmetrized on construction. Immutable.
class SymMatrix {
 public:
  explicit SymMatrix(const Eigen::MatrixXd& m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& entries() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Eigen::MatrixXd m_;
};

// Symmetric positive-semidefinite matrix with an eagerly computed, cached
// eigendecomposition. Eigenvalues in [-kPsdTol*scale, 0) are clamped to 0;
// anything below that raises NotPsd.
class PsdMatrix {
 public:
  explicit PsdMatrix(const SymMatrix& m);
  explicit PsdMatrix(const Eigen::MatrixXd& m) : PsdMatrix(SymMatrix(m)) {}

  static PsdMatrix identity(int n) { return PsdMatrix(Eigen::MatrixXd::Identity(n, n)); }
  static PsdMatrix zero(int n) { return PsdMatrix(Eigen::MatrixXd::Zero(n, n)); }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& entries() const { return m_; }
  // Ascending, clamped to [0, inf).
  const Eigen::VectorXd& eigenvalues() const { return evals_; }
  // Orthonormal columns matching eigenvalues().
  const Eigen::MatrixXd& eigenvectors() const { return evecs_; }
  double min_eigenvalue() const { return evals_(0); }
  double max_eigenvalue() const { return evals_(evals_.size() - 1); }

 private:
  Eigen::MatrixXd m_;
  Eigen::VectorXd evals_;
  Eigen::MatrixXd evecs_;
};

struct OrderVerdict {
  bool holds;
  double slack;  // smallest eigenvalue of (B - A)
};

// Unique PSD square root S with S*S = Q up to kReconTol.
SymMatrix psd_sqrt(const PsdMatrix& q);

// Strict inverse; SingularMatrix if the smallest eigenvalue is at or below
// the relative floor (no silent ridge).
PsdMatrix psd_inverse(const PsdMatrix& q);

// Q^{-1/2}; same strictness as psd_inverse.
SymMatrix psd_inv_sqrt(const PsdMatrix& q);

// Sum of log eigenvalues; SingularMatrix if any eigenvalue is at or below the floor.
double logdet(const PsdMatrix& q);

// A <= B in the Loewner order: slack = lambda_min(B - A), holds iff slack >= -tol.
OrderVerdict loewner_leq(const SymMatrix& a, const SymMatrix& b, double tol = kPsdTol);

// <v, W v>.
double weighted_sq_norm(const Eigen::VectorXd& v, const PsdMatrix& w);

// Smallest eigenvalue of the symmetrized input; used for Loewner slack reporting.
double min_sym_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace sloc::linalg
