#include "oracles/gauss_quadrature.hpp"

#include <cmath>
#include <Eigen/Dense>

namespace oracles {

namespace {

// Nodes = eigenvalues of the symmetric tridiagonal Jacobi matrix; weight i is
// mu0 * (first eigenvector component)^2.
QuadratureRule golub_welsch(const Eigen::VectorXd& offdiag, double mu0) {
  const auto m = offdiag.size() + 1;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    jacobi(i, i + 1) = offdiag(i);
    jacobi(i + 1, i) = offdiag(i);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(m));
  rule.weights.resize(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    rule.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
  }
  return rule;
}

}  // namespace

QuadratureRule gauss_hermite(int m) {
  Eigen::VectorXd offdiag(m - 1);
  for (int i = 1; i < m; ++i) offdiag(i - 1) = std::sqrt(0.5 * i);
  return golub_welsch(offdiag, std::sqrt(M_PI));
}

QuadratureRule gauss_legendre(int m, double a, double b) {
  Eigen::VectorXd offdiag(m - 1);
  for (int i = 1; i < m; ++i) offdiag(i - 1) = i / std::sqrt(4.0 * i * i - 1.0);
  QuadratureRule rule = golub_welsch(offdiag, 2.0);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

}  // namespace oracles
