#pragma once

#include <functional>
#include <vector>

#include "oracles/gauss_quadrature.hpp"

namespace oracles {

// Quadrature ground truth for the 1-D Gaussian channel over a discrete prior:
// y = sqrt(t) x + sqrt(q) z with x in {atoms} and z standard normal. The
// y-marginal is a finite Gaussian mixture, so expectations over y are exact
// up to node truncation (200 Hermite nodes per mixture component). This is
// the documented oracle for all 1-D derived values; it shares nothing with
// the library's tilt/estimator path.
class Channel1dOracle {
 public:
  Channel1dOracle(std::vector<double> atoms, std::vector<double> weights, double q,
                  int gh_nodes = 200);

  // Posterior weights given y at SNR t: w_i proportional to
  // p_i exp(sqrt(t) y a_i / q - t a_i^2 / (2 q)).
  std::vector<double> posterior(double t, double y) const;
  double posterior_mean(double t, double y) const;
  double posterior_var(double t, double y) const;
  double posterior_kl(double t, double y) const;  // KL(posterior || prior)

  // E over y of an arbitrary integrand, fixed t.
  double expect_y(double t, const std::function<double(double)>& f) const;

  // Fixed-t values.
  double mixture_cov(double t) const;          // E Var(x | y)
  double cov_qcov(double t) const;             // E Var^2 / q
  double mutual_information(double t) const;   // E KL(posterior || prior)
  double mmse(double t, double r = 1.0) const; // r * E Var
  double derivative_rhs(double t, double r = 1.0) const;  // -r E Var^2 / q

  // tau ~ Unif[1,2] averages (Gauss-Legendre over [1,2]).
  double mixture_cov_tau() const;
  double cov_qcov_tau() const;
  double mutual_information_tau() const;
  double integrated_identity(double r = 1.0) const;  // int_1^2 r E Var^2 / q dt

 private:
  std::vector<double> atoms_;
  std::vector<double> weights_;
  std::vector<double> log_weights_;
  double q_;
  QuadratureRule hermite_;
  QuadratureRule legendre_;
};

}  // namespace oracles
