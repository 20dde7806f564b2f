#pragma once

#include <vector>

namespace oracles {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Hermite rule for weight e^{-x^2} (Golub-Welsch on the Jacobi matrix).
// sum_i w_i f(x_i) ~= int f(x) e^{-x^2} dx.
QuadratureRule gauss_hermite(int m);

// Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int m, double a, double b);

// E[f(Y)] for Y ~ N(mean, var) via an m-node Hermite rule.
template <class F>
double gauss_expect(const QuadratureRule& hermite, double mean, double stddev, F&& f) {
  constexpr double kInvSqrtPi = 0.5641895835477562869;  // 1/sqrt(pi)
  double acc = 0.0;
  for (std::size_t i = 0; i < hermite.nodes.size(); ++i) {
    acc += hermite.weights[i] * f(mean + 1.4142135623730951 * stddev * hermite.nodes[i]);
  }
  return acc * kInvSqrtPi;
}

}  // namespace oracles
