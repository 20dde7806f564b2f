#include "sloc/channel.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sloc::channel {

namespace {

constexpr double kErasureMatchTol = 1e-12;

int sample_atom_index(const Eigen::VectorXd& cdf, RngStream& rng) {
  const double u = rng.uniform01();
  // First index with cdf > u; the last entry is 1 up to rounding.
  const auto k = cdf.size();
  Eigen::Index lo = 0, hi = k - 1;
  while (lo < hi) {
    const Eigen::Index mid = (lo + hi) / 2;
    if (cdf(mid) > u) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return static_cast<int>(lo);
}

}  // namespace

TauMode TauMode::fixed(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw InvalidParameter("TauMode::fixed: t must be finite and >= 0");
  }
  return TauMode{Kind::kFixed, t};
}

TiltEngine::TiltEngine(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q)
    : atoms_(mu.atoms()), base_log_w_(mu.log_weights()) {
  if (q.dim() != mu.dim()) {
    throw DimensionMismatch("TiltEngine: measure dim " + std::to_string(mu.dim()) +
                            " vs Q dim " + std::to_string(q.dim()));
  }
  const linalg::PsdMatrix q_inv = linalg::psd_inverse(q);
  qinv_atoms_.noalias() = atoms_ * q_inv.entries();  // Q^-1 symmetric
  quad_ = (atoms_.cwiseProduct(qinv_atoms_)).rowwise().sum();
}

void TiltEngine::tilted_log_weights_unnormalized(const Eigen::VectorXd& ybar, double t,
                                                 Eigen::VectorXd& out) const {
  out.noalias() = qinv_atoms_ * ybar;
  out += base_log_w_;
  out -= (0.5 * t) * quad_;
}

Eigen::VectorXd TiltEngine::tilted_log_weights(const Eigen::VectorXd& ybar, double t) const {
  Eigen::VectorXd out(size());
  tilted_log_weights_unnormalized(ybar, t, out);
  measures::normalize_log_weights(out);
  return out;
}

ChannelSampler::ChannelSampler(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q)
    : atoms_(mu.atoms()) {
  if (q.dim() != mu.dim()) {
    throw DimensionMismatch("ChannelSampler: measure dim vs Q dim");
  }
  const Eigen::VectorXd w = mu.weights();
  cdf_.resize(w.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    acc += w(i);
    cdf_(i) = acc;
  }
  sqrt_q_ = linalg::psd_sqrt(q).entries();
}

void ChannelSampler::sample_into(TauMode mode, RngStream& rng, ChannelDraw& draw) const {
  const int n = dim();
  draw.atom_index = sample_atom_index(cdf_, rng);
  draw.x = atoms_.row(draw.atom_index).transpose();
  draw.tau = (mode.kind == TauMode::Kind::kUniform12) ? rng.uniform(1.0, 2.0) : mode.t;
  draw.z.resize(n);
  for (int j = 0; j < n; ++j) draw.z(j) = rng.normal();
  draw.y.resize(n);
  draw.y.noalias() = sqrt_q_ * draw.z;
  draw.y += std::sqrt(draw.tau) * draw.x;
}

ChannelDraw ChannelSampler::sample(TauMode mode, RngStream& rng) const {
  ChannelDraw draw;
  sample_into(mode, rng, draw);
  return draw;
}

measures::DiscreteMeasure posterior(const measures::DiscreteMeasure& mu,
                                    const linalg::PsdMatrix& q, double t,
                                    const Eigen::VectorXd& y) {
  if (t < 0.0) throw InvalidParameter("posterior: t must be >= 0");
  if (!y.allFinite()) throw NonFiniteInput("posterior: observation has non-finite entries");
  if (y.size() != mu.dim()) throw DimensionMismatch("posterior: observation dim vs measure dim");
  if (t == 0.0) return mu;
  return posterior_from_ybar(mu, q, t, std::sqrt(t) * y);
}

measures::DiscreteMeasure posterior_from_ybar(const measures::DiscreteMeasure& mu,
                                              const linalg::PsdMatrix& q, double t,
                                              const Eigen::VectorXd& ybar) {
  if (t < 0.0) throw InvalidParameter("posterior_from_ybar: t must be >= 0");
  if (!ybar.allFinite()) throw NonFiniteInput("posterior_from_ybar: non-finite input");
  const TiltEngine engine(mu, q);
  Eigen::VectorXd log_w(mu.size());
  engine.tilted_log_weights_unnormalized(ybar, t, log_w);
  return mu.reweighted(std::move(log_w));
}

Eigen::VectorXd bayes_estimate(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q,
                               double t, const Eigen::VectorXd& y) {
  return measures::mean(posterior(mu, q, t, y));
}

Eigen::VectorXd ml_estimate(const Eigen::VectorXd& y, double t) {
  if (!(t > 0.0)) throw InvalidParameter("ml_estimate: t must be > 0");
  return y / std::sqrt(t);
}

std::pair<Eigen::VectorXd, ErasureDraw> sample_erasure(const measures::DiscreteMeasure& mu,
                                                       double epsilon, RngStream& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw InvalidParameter("sample_erasure: epsilon must be in [0,1]");
  }
  const int n = mu.dim();
  const Eigen::VectorXd w = mu.weights();
  Eigen::VectorXd cdf(w.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    acc += w(i);
    cdf(i) = acc;
  }
  const int idx = sample_atom_index(cdf, rng);
  Eigen::VectorXd x = mu.atoms().row(idx).transpose();

  ErasureDraw draw;
  draw.epsilon = epsilon;
  draw.mask.assign(static_cast<std::size_t>(n), false);
  draw.revealed_values = Eigen::VectorXd::Zero(n);
  if (epsilon == 1.0) {
    draw.mask.assign(static_cast<std::size_t>(n), true);
    draw.revealed_values = x;
  } else if (epsilon > 0.0) {
    for (int j = 0; j < n; ++j) {
      if (rng.uniform01() < epsilon) {
        draw.mask[static_cast<std::size_t>(j)] = true;
        draw.revealed_values(j) = x(j);
      }
    }
  }
  return {std::move(x), std::move(draw)};
}

measures::DiscreteMeasure erasure_posterior(const measures::DiscreteMeasure& mu,
                                            const ErasureDraw& draw) {
  if (static_cast<int>(draw.mask.size()) != mu.dim()) {
    throw DimensionMismatch("erasure_posterior: mask length vs measure dim");
  }
  Eigen::VectorXd log_w = mu.log_weights();
  for (int i = 0; i < mu.size(); ++i) {
    for (int j = 0; j < mu.dim(); ++j) {
      if (draw.mask[static_cast<std::size_t>(j)] &&
          std::abs(mu.atoms()(i, j) - draw.revealed_values(j)) > kErasureMatchTol) {
        log_w(i) = -std::numeric_limits<double>::infinity();
        break;
      }
    }
  }
  if (measures::log_sum_exp(log_w) == -std::numeric_limits<double>::infinity()) {
    throw EmptyPosterior("erasure_posterior: no atom is consistent with the revealed values");
  }
  return mu.reweighted(std::move(log_w));
}

}  // namespace sloc::channel
