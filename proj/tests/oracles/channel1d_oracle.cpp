#include "oracles/channel1d_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracles {

Channel1dOracle::Channel1dOracle(std::vector<double> atoms, std::vector<double> weights, double q,
                                 int gh_nodes)
    : atoms_(std::move(atoms)),
      weights_(std::move(weights)),
      q_(q),
      hermite_(gauss_hermite(gh_nodes)),
      legendre_(gauss_legendre(64, 1.0, 2.0)) {
  if (atoms_.size() != weights_.size() || atoms_.empty()) {
    throw std::invalid_argument("Channel1dOracle: atom/weight size mismatch");
  }
  if (!(q_ > 0.0)) throw std::invalid_argument("Channel1dOracle: q must be positive");
  double total = 0.0;
  for (double w : weights_) total += w;
  for (double& w : weights_) w /= total;
  log_weights_.resize(weights_.size());
  for (std::size_t i = 0; i < weights_.size(); ++i) log_weights_[i] = std::log(weights_[i]);
}

std::vector<double> Channel1dOracle::posterior(double t, double y) const {
  std::vector<double> logits(atoms_.size());
  double hi = -1e300;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    logits[i] = log_weights_[i] + std::sqrt(t) * y * atoms_[i] / q_ -
                0.5 * t * atoms_[i] * atoms_[i] / q_;
    hi = std::max(hi, logits[i]);
  }
  double z = 0.0;
  for (double& l : logits) {
    l = std::exp(l - hi);
    z += l;
  }
  for (double& l : logits) l /= z;
  return logits;
}

double Channel1dOracle::posterior_mean(double t, double y) const {
  const auto w = posterior(t, y);
  double m = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) m += w[i] * atoms_[i];
  return m;
}

double Channel1dOracle::posterior_var(double t, double y) const {
  const auto w = posterior(t, y);
  double m = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    m += w[i] * atoms_[i];
    m2 += w[i] * atoms_[i] * atoms_[i];
  }
  return m2 - m * m;
}

double Channel1dOracle::posterior_kl(double t, double y) const {
  const auto w = posterior(t, y);
  double kl = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) kl += w[i] * (std::log(w[i]) - log_weights_[i]);
  }
  return kl;
}

double Channel1dOracle::expect_y(double t, const std::function<double(double)>& f) const {
  // y-marginal: sum_j p_j N(sqrt(t) a_j, q).
  double acc = 0.0;
  const double sd = std::sqrt(q_);
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    acc += weights_[j] * gauss_expect(hermite_, std::sqrt(t) * atoms_[j], sd, f);
  }
  return acc;
}

double Channel1dOracle::mixture_cov(double t) const {
  return expect_y(t, [&](double y) { return posterior_var(t, y); });
}

double Channel1dOracle::cov_qcov(double t) const {
  return expect_y(t, [&](double y) {
    const double v = posterior_var(t, y);
    return v * v / q_;
  });
}

double Channel1dOracle::mutual_information(double t) const {
  return expect_y(t, [&](double y) { return posterior_kl(t, y); });
}

double Channel1dOracle::mmse(double t, double r) const { return r * mixture_cov(t); }

double Channel1dOracle::derivative_rhs(double t, double r) const { return -r * cov_qcov(t); }

double Channel1dOracle::mixture_cov_tau() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < legendre_.nodes.size(); ++i) {
    acc += legendre_.weights[i] * mixture_cov(legendre_.nodes[i]);
  }
  return acc;  // interval length 1: integral == Unif[1,2] average
}

double Channel1dOracle::cov_qcov_tau() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < legendre_.nodes.size(); ++i) {
    acc += legendre_.weights[i] * cov_qcov(legendre_.nodes[i]);
  }
  return acc;
}

double Channel1dOracle::mutual_information_tau() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < legendre_.nodes.size(); ++i) {
    acc += legendre_.weights[i] * mutual_information(legendre_.nodes[i]);
  }
  return acc;
}

double Channel1dOracle::integrated_identity(double r) const { return r * cov_qcov_tau(); }

}  // namespace oracles
