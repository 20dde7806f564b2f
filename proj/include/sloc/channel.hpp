#pragma once

#include <utility>
#include <vector>
#include <Eigen/Dense>

#include "sloc/errors.hpp"
#include "sloc/linalg.hpp"
#include "sloc/measure.hpp"
#include "sloc/rng.hpp"

namespace sloc::channel {

struct TauMode {
  enum class Kind { kUniform12, kFixed };
  Kind kind = Kind::kUniform12;
  double t = 0.0;

  static TauMode uniform12() { return TauMode{Kind::kUniform12, 0.0}; }
  static TauMode fixed(double t);
};

// One realization of the observation y = sqrt(tau) x + Q^{1/2} z.
struct ChannelDraw {
  Eigen::VectorXd x;
  int atom_index = -1;
  double tau = 0.0;
  Eigen::VectorXd z;
  Eigen::VectorXd y;
};

// One realization of the erasure channel: coordinate i revealed with
// probability epsilon. revealed_values is defined exactly on mask-true
// coordinates (zero elsewhere, never read).
struct ErasureDraw {
  std::vector<bool> mask;
  Eigen::VectorXd revealed_values;
  double epsilon = 0.0;
};

// Exponential reweighting by exp{<ybar, x>_{Q^-1} - (t/2) |x|^2_{Q^-1}} with
// the per-atom linear and quadratic terms precomputed. This is the single
// tilt routine shared by the channel posterior and the path drivers.
class TiltEngine {
 public:
  TiltEngine(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q);

  int dim() const { return static_cast<int>(atoms_.cols()); }
  int size() const { return static_cast<int>(atoms_.rows()); }
  const Eigen::MatrixXd& atoms() const { return atoms_; }
  const Eigen::VectorXd& base_log_weights() const { return base_log_w_; }
  const Eigen::MatrixXd& qinv_atoms() const { return qinv_atoms_; }
  // |x_i|^2_{Q^-1} per atom.
  const Eigen::VectorXd& atom_quad() const { return quad_; }

  // Unnormalized tilted log-weights into `out`; callers normalize with
  // measures::normalize_log_weights so every code path shares one
  // normalization arithmetic.
  void tilted_log_weights_unnormalized(const Eigen::VectorXd& ybar, double t,
                                       Eigen::VectorXd& out) const;
  Eigen::VectorXd tilted_log_weights(const Eigen::VectorXd& ybar, double t) const;

 private:
  Eigen::MatrixXd atoms_;      // k x n
  Eigen::VectorXd base_log_w_;
  Eigen::MatrixXd qinv_atoms_;  // row i = Q^-1 x_i
  Eigen::VectorXd quad_;
};

// Draws (x, tau, z, y) with precomputed atom CDF and Q^{1/2}. Consumption
// order per draw: atom index, tau (uniform12 only), then the n entries of z.
class ChannelSampler {
 public:
  ChannelSampler(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q);

  int dim() const { return static_cast<int>(atoms_.cols()); }
  void sample_into(TauMode mode, RngStream& rng, ChannelDraw& draw) const;
  ChannelDraw sample(TauMode mode, RngStream& rng) const;

 private:
  Eigen::MatrixXd atoms_;
  Eigen::VectorXd cdf_;
  Eigen::MatrixXd sqrt_q_;
};

// Posterior of mu given y at SNR t; same atoms, tilted weights. t = 0 returns
// mu unchanged.
measures::DiscreteMeasure posterior(const measures::DiscreteMeasure& mu,
                                    const linalg::PsdMatrix& q, double t,
                                    const Eigen::VectorXd& y);

// Same posterior in the ybar = sqrt(t) y parameterization used by the
// localization process.
measures::DiscreteMeasure posterior_from_ybar(const measures::DiscreteMeasure& mu,
                                              const linalg::PsdMatrix& q, double t,
                                              const Eigen::VectorXd& ybar);

// E[x | y, tau = t].
Eigen::VectorXd bayes_estimate(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q,
                               double t, const Eigen::VectorXd& y);

// y / sqrt(t).
Eigen::VectorXd ml_estimate(const Eigen::VectorXd& y, double t);

// Erasure channel of the pinning decomposition. Consumption order: atom
// index, then one uniform per coordinate (skipped entirely at epsilon 0 or 1).
std::pair<Eigen::VectorXd, ErasureDraw> sample_erasure(const measures::DiscreteMeasure& mu,
                                                       double epsilon, RngStream& rng);

// Conditions mu on the revealed coordinates: atoms that disagree with a
// revealed value by more than 1e-12 get weight zero.
measures::DiscreteMeasure erasure_posterior(const measures::DiscreteMeasure& mu,
                                            const ErasureDraw& draw);

}  // namespace sloc::channel
