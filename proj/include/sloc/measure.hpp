#pragma once

#include <cstdint>
#include <Eigen/Dense>

#include "sloc/errors.hpp"
#include "sloc/linalg.hpp"

namespace sloc::measures {

// Atoms closer than this in L_inf are the same atom and get merged.
inline constexpr double kAtomMergeTol = 1e-12;

// log(sum exp(v)) with max subtraction; -inf entries contribute nothing.
double log_sum_exp(const Eigen::VectorXd& v);

// Shifts v so that log_sum_exp(v) == 0 and returns the shift. This is the one
// normalization routine shared by the channel tilt and the path drivers.
double normalize_log_weights(Eigen::VectorXd& v);

// Finitely supported probability measure on R^n. Weights live in log space;
// duplicate atoms are merged on construction by summing weights. Immutable.
class DiscreteMeasure {
 public:
  static DiscreteMeasure from_linear_weights(const Eigen::MatrixXd& atoms,
                                             const Eigen::VectorXd& weights);
  static DiscreteMeasure from_log_weights(const Eigen::MatrixXd& atoms,
                                          const Eigen::VectorXd& log_weights);

  // Same atom list, new (possibly unnormalized) log-weights. The fast path for
  // posteriors: skips the duplicate-merge pass since the atoms are already
  // canonical.
  DiscreteMeasure reweighted(Eigen::VectorXd log_weights) const;

  int dim() const { return static_cast<int>(atoms_.cols()); }
  int size() const { return static_cast<int>(atoms_.rows()); }
  // k x n, atom i is row i.
  const Eigen::MatrixXd& atoms() const { return atoms_; }
  const Eigen::VectorXd& log_weights() const { return log_weights_; }
  Eigen::VectorXd weights() const { return log_weights_.array().exp(); }

 private:
  DiscreteMeasure(Eigen::MatrixXd atoms, Eigen::VectorXd log_weights)
      : atoms_(std::move(atoms)), log_weights_(std::move(log_weights)) {}

  Eigen::MatrixXd atoms_;
  Eigen::VectorXd log_weights_;
};

struct GaussianMeasure {
  Eigen::VectorXd mean;
  linalg::PsdMatrix covariance;

  GaussianMeasure(Eigen::VectorXd m, linalg::PsdMatrix cov);
  int dim() const { return static_cast<int>(mean.size()); }
};

Eigen::VectorXd mean(const DiscreteMeasure& mu);
linalg::PsdMatrix cov(const DiscreteMeasure& mu);

// D(a || b) for measures sharing one atom list (posteriors retain the prior's
// atoms, so this is checked structurally, bitwise on the atom arrays).
double kl_divergence(const DiscreteMeasure& a, const DiscreteMeasure& b);

// Conjugate posterior for the observation y = sqrt(t) x + Q^{1/2} z with
// Gaussian prior: covariance (Sigma^-1 + t Q^-1)^-1, mean cov*(Sigma^-1 m + sqrt(t) Q^-1 y).
GaussianMeasure gaussian_posterior(const GaussianMeasure& prior, const linalg::PsdMatrix& q,
                                   double t, const Eigen::VectorXd& y);

// Closed form 0.5 * log det(I + t Q^-1 Sigma), computed as
// 0.5 * (logdet(Q + t Sigma) - logdet(Q)).
double gaussian_mutual_information(const linalg::PsdMatrix& sigma, const linalg::PsdMatrix& q,
                                   double t);

enum class Geometry { kCube, kSphere, kIsing, kClustered };

// Deterministic test-fixture generator; weights are Dirichlet(1) (uniform on
// the simplex). Ising places atoms on distinct {-1,+1}^n vertices and
// requires k <= 2^n.
DiscreteMeasure random_measure(std::uint64_t seed, int n, int k, Geometry geometry);

// 1-D Gaussian discretized on a uniform grid of k atoms over
// mean +- half_width_sigmas * sigma; the analytic-oracle bridge.
DiscreteMeasure discretize_1d(const GaussianMeasure& g, int k, double half_width_sigmas = 8.0);

// Weighted moment helpers on raw (atoms, linear weights) arrays; the hot paths
// in the estimators and path drivers use these with preallocated workspaces.
void weighted_mean_into(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& w,
                        Eigen::VectorXd& mean_out);
void weighted_cov_into(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& w,
                       const Eigen::VectorXd& mean, Eigen::MatrixXd& centered_ws,
                       Eigen::MatrixXd& scaled_ws, Eigen::MatrixXd& cov_out);

}  // namespace sloc::measures
