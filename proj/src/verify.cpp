#include "sloc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sloc::verify {

namespace {

// Substream purpose tags.
enum : std::uint64_t {
  kTagMixtureCov = 0x21,
  kTagCovQcov = 0x22,
  kTagMi = 0x23,
  kTagMmse = 0x24,
  kTagDerivative = 0x25,
  kTagChildSeed = 0x26,
  kTagSweep = 0x27,
};

// Allowance for the O(delta^2) truncation error of the central difference,
// scaled by the problem's natural magnitude Tr(R Cov(mu)).
constexpr double kFdCurvatureScale = 10.0;

struct TiltWork {
  channel::ChannelDraw draw;
  Eigen::VectorXd ybar, logw, w, pmean, resid, sz;
  Eigen::MatrixXd centered, scaled, pcov, tmp, prod;

  void resize(int n, int k) {
    ybar.resize(n);
    logw.resize(k);
    w.resize(k);
    pmean.resize(n);
    resid.resize(n);
    sz.resize(n);
    centered.resize(k, n);
    scaled.resize(k, n);
    pcov.resize(n, n);
    tmp.resize(n, n);
    prod.resize(n, n);
  }
};

void posterior_weights(const channel::TiltEngine& engine, const Eigen::VectorXd& ybar, double t,
                       TiltWork& ws) {
  engine.tilted_log_weights_unnormalized(ybar, t, ws.logw);
  measures::normalize_log_weights(ws.logw);
  ws.w = ws.logw.array().exp();
}

void posterior_cov(const channel::TiltEngine& engine, TiltWork& ws) {
  measures::weighted_mean_into(engine.atoms(), ws.w, ws.pmean);
  measures::weighted_cov_into(engine.atoms(), ws.w, ws.pmean, ws.centered, ws.scaled, ws.pcov);
}

double kl_to_base(const channel::TiltEngine& engine, const TiltWork& ws, bool base_all_finite) {
  if (base_all_finite) {
    return (ws.w.array() * (ws.logw - engine.base_log_weights()).array()).sum();
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < ws.logw.size(); ++i) {
    if (ws.w(i) > 0.0) acc += ws.w(i) * (ws.logw(i) - engine.base_log_weights()(i));
  }
  return acc;
}

// Tr(A B) for symmetric B.
double trace_product_sym(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.cwiseProduct(b).sum();
}

}  // namespace

McEstimate<Eigen::MatrixXd> estimate_mixture_cov(const measures::DiscreteMeasure& mu,
                                                 const linalg::PsdMatrix& q, const McConfig& cfg) {
  const channel::TiltEngine engine(mu, q);
  const channel::ChannelSampler sampler(mu, q);
  const int n = mu.dim();
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(n, n);
  return mc_batch_estimate<Eigen::MatrixXd>(
      cfg, kTagMixtureCov,
      [&](int, RngStream& rs, std::int64_t bs) {
        TiltWork ws;
        ws.resize(n, mu.size());
        Eigen::MatrixXd acc = zero;
        for (std::int64_t s = 0; s < bs; ++s) {
          sampler.sample_into(cfg.tau_mode, rs, ws.draw);
          ws.ybar = std::sqrt(ws.draw.tau) * ws.draw.y;
          posterior_weights(engine, ws.ybar, ws.draw.tau, ws);
          posterior_cov(engine, ws);
          acc += ws.pcov;
        }
        return Eigen::MatrixXd(acc / static_cast<double>(bs));
      },
      zero);
}

McEstimate<Eigen::MatrixXd> estimate_cov_qcov(const measures::DiscreteMeasure& mu,
                                              const linalg::PsdMatrix& q, const McConfig& cfg) {
  const channel::TiltEngine engine(mu, q);
  const channel::ChannelSampler sampler(mu, q);
  const Eigen::MatrixXd q_inv = linalg::psd_inverse(q).entries();
  const int n = mu.dim();
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(n, n);
  return mc_batch_estimate<Eigen::MatrixXd>(
      cfg, kTagCovQcov,
      [&](int, RngStream& rs, std::int64_t bs) {
        TiltWork ws;
        ws.resize(n, mu.size());
        Eigen::MatrixXd acc = zero;
        for (std::int64_t s = 0; s < bs; ++s) {
          sampler.sample_into(cfg.tau_mode, rs, ws.draw);
          ws.ybar = std::sqrt(ws.draw.tau) * ws.draw.y;
          posterior_weights(engine, ws.ybar, ws.draw.tau, ws);
          posterior_cov(engine, ws);
          ws.tmp.noalias() = ws.pcov * q_inv;
          ws.prod.noalias() = ws.tmp * ws.pcov;
          acc += ws.prod;
        }
        return Eigen::MatrixXd(acc / static_cast<double>(bs));
      },
      zero);
}

McEstimate<double> estimate_mutual_information(const measures::DiscreteMeasure& mu,
                                               const linalg::PsdMatrix& q, const McConfig& cfg) {
  const channel::TiltEngine engine(mu, q);
  const channel::ChannelSampler sampler(mu, q);
  const bool base_finite = engine.base_log_weights().allFinite();
  return mc_batch_estimate<double>(
      cfg, kTagMi,
      [&](int, RngStream& rs, std::int64_t bs) {
        TiltWork ws;
        ws.resize(mu.dim(), mu.size());
        double acc = 0.0;
        for (std::int64_t s = 0; s < bs; ++s) {
          sampler.sample_into(cfg.tau_mode, rs, ws.draw);
          ws.ybar = std::sqrt(ws.draw.tau) * ws.draw.y;
          posterior_weights(engine, ws.ybar, ws.draw.tau, ws);
          acc += kl_to_base(engine, ws, base_finite);
        }
        return acc / static_cast<double>(bs);
      },
      0.0);
}

double entropy_upper_bound(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q) {
  const double logdet_q = linalg::logdet(q);
  const Eigen::MatrixXd shifted = q.entries() + 2.0 * measures::cov(mu).entries();
  return 0.5 * (linalg::logdet(linalg::PsdMatrix(shifted)) - logdet_q);
}

McEstimate<double> mmse(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q, double t,
                        const linalg::PsdMatrix& r, const McConfig& cfg) {
  if (t < 0.0) throw InvalidParameter("mmse: t must be >= 0");
  if (r.dim() != mu.dim()) throw DimensionMismatch("mmse: R dim vs measure dim");
  if (t == 0.0) {
    // Posterior equals the prior; exact, no sampling.
    McEstimate<double> exact;
    exact.value = trace_product_sym(r.entries(), measures::cov(mu).entries());
    exact.std_error = 0.0;
    exact.n_samples = 0;
    exact.n_batches = 0;
    exact.seed = cfg.seed;
    return exact;
  }
  const channel::TiltEngine engine(mu, q);
  const channel::ChannelSampler sampler(mu, q);
  const channel::TauMode mode = channel::TauMode::fixed(t);
  const Eigen::MatrixXd& r_mat = r.entries();
  return mc_batch_estimate<double>(
      cfg, kTagMmse,
      [&](int, RngStream& rs, std::int64_t bs) {
        TiltWork ws;
        ws.resize(mu.dim(), mu.size());
        double acc = 0.0;
        for (std::int64_t s = 0; s < bs; ++s) {
          sampler.sample_into(mode, rs, ws.draw);
          ws.ybar = std::sqrt(t) * ws.draw.y;
          posterior_weights(engine, ws.ybar, t, ws);
          measures::weighted_mean_into(engine.atoms(), ws.w, ws.pmean);
          ws.resid = ws.draw.x - ws.pmean;
          acc += ws.resid.dot(r_mat * ws.resid);
        }
        return acc / static_cast<double>(bs);
      },
      0.0);
}

DerivativeCheck mmse_derivative_check(const measures::DiscreteMeasure& mu,
                                      const linalg::PsdMatrix& q, double t,
                                      const linalg::PsdMatrix& r, double delta,
                                      const McConfig& cfg) {
  if (delta < 1e-4 || delta > 0.1) {
    throw InvalidParameter("mmse_derivative_check: delta must be in [1e-4, 0.1]");
  }
  if (t - delta < 0.0) throw InvalidParameter("mmse_derivative_check: needs t - delta >= 0");
  if (r.dim() != mu.dim()) throw DimensionMismatch("mmse_derivative_check: R dim vs measure dim");

  const channel::TiltEngine engine(mu, q);
  const channel::ChannelSampler sampler(mu, q);
  const Eigen::MatrixXd q_inv = linalg::psd_inverse(q).entries();
  const Eigen::MatrixXd sqrt_q = linalg::psd_sqrt(q).entries();
  const Eigen::MatrixXd& r_mat = r.entries();
  const int n = mu.dim();
  const std::int64_t bs = batch_size_for(cfg);
  const RngStream root(cfg.seed);
  const channel::TauMode mode = channel::TauMode::fixed(t);

  // One pass computes mmse at t +- delta with common (x, z) draws and the
  // trace integrand at t; finite-difference variance would otherwise swamp
  // the O(delta) signal.
  std::vector<double> fd_b(static_cast<std::size_t>(cfg.n_batches));
  std::vector<double> rhs_b(static_cast<std::size_t>(cfg.n_batches));
  parallel_for_indexed(cfg.n_batches, resolve_threads(cfg.threads), [&](int b) {
    RngStream rs = root.split(kTagDerivative, static_cast<std::uint64_t>(b));
    TiltWork ws;
    ws.resize(n, mu.size());
    double acc_plus = 0.0, acc_minus = 0.0, acc_rhs = 0.0;
    const double ts[2] = {t - delta, t + delta};
    for (std::int64_t s = 0; s < bs; ++s) {
      sampler.sample_into(mode, rs, ws.draw);
      ws.sz.noalias() = sqrt_q * ws.draw.z;
      for (int side = 0; side < 2; ++side) {
        const double tv = ts[side];
        ws.ybar = tv * ws.draw.x + std::sqrt(tv) * ws.sz;
        posterior_weights(engine, ws.ybar, tv, ws);
        measures::weighted_mean_into(engine.atoms(), ws.w, ws.pmean);
        ws.resid = ws.draw.x - ws.pmean;
        (side == 0 ? acc_minus : acc_plus) += ws.resid.dot(r_mat * ws.resid);
      }
      ws.ybar = t * ws.draw.x + std::sqrt(t) * ws.sz;
      posterior_weights(engine, ws.ybar, t, ws);
      posterior_cov(engine, ws);
      ws.tmp.noalias() = ws.pcov * q_inv;
      ws.prod.noalias() = ws.tmp * ws.pcov;
      acc_rhs -= trace_product_sym(ws.prod, r_mat);
    }
    const double inv_bs = 1.0 / static_cast<double>(bs);
    fd_b[static_cast<std::size_t>(b)] = (acc_plus - acc_minus) * inv_bs / (2.0 * delta);
    rhs_b[static_cast<std::size_t>(b)] = acc_rhs * inv_bs;
  });

  auto mean_and_se = [&](const std::vector<double>& xs, double& m, double& se) {
    m = 0.0;
    for (double v : xs) m += v;
    m /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double v : xs) ss += (v - m) * (v - m);
    se = std::sqrt(ss / (static_cast<double>(xs.size()) * (xs.size() - 1)));
  };

  DerivativeCheck out;
  mean_and_se(fd_b, out.fd, out.fd_se);
  double rhs_mean = 0.0, rhs_se = 0.0;
  mean_and_se(rhs_b, rhs_mean, rhs_se);
  out.identity_rhs.value = rhs_mean;
  out.identity_rhs.std_error = rhs_se;
  out.identity_rhs.n_samples = bs * cfg.n_batches;
  out.identity_rhs.n_batches = cfg.n_batches;
  out.identity_rhs.seed = cfg.seed;

  const double trace_bound = trace_product_sym(r_mat, measures::cov(mu).entries());
  const double curvature = kFdCurvatureScale * std::max(1.0, trace_bound) * delta * delta;
  const double combined_se = std::sqrt(out.fd_se * out.fd_se + rhs_se * rhs_se);
  out.agree = std::abs(out.fd - rhs_mean) <= 3.0 * combined_se + curvature + kReportTol;
  return out;
}

IntegratedIdentityCheck integrated_identity_check(const measures::DiscreteMeasure& mu,
                                                  const linalg::PsdMatrix& q,
                                                  const linalg::PsdMatrix& r, const McConfig& cfg) {
  if (r.dim() != mu.dim()) throw DimensionMismatch("integrated_identity_check: R dim");
  const channel::TiltEngine engine(mu, q);
  const channel::ChannelSampler sampler(mu, q);
  const Eigen::MatrixXd q_inv = linalg::psd_inverse(q).entries();
  const Eigen::MatrixXd& r_mat = r.entries();

  const RngStream root(cfg.seed);
  auto child_cfg = [&](std::uint64_t i) {
    McConfig c = cfg;
    c.seed = root.split(kTagChildSeed, i).next_u64();
    return c;
  };

  McConfig integral_cfg = child_cfg(0);
  integral_cfg.tau_mode = channel::TauMode::uniform12();
  IntegratedIdentityCheck out;
  out.integral = mc_batch_estimate<double>(
      integral_cfg, kTagMixtureCov,
      [&](int, RngStream& rs, std::int64_t bs) {
        TiltWork ws;
        ws.resize(mu.dim(), mu.size());
        double acc = 0.0;
        for (std::int64_t s = 0; s < bs; ++s) {
          sampler.sample_into(integral_cfg.tau_mode, rs, ws.draw);
          ws.ybar = std::sqrt(ws.draw.tau) * ws.draw.y;
          posterior_weights(engine, ws.ybar, ws.draw.tau, ws);
          posterior_cov(engine, ws);
          ws.tmp.noalias() = ws.pcov * q_inv;
          ws.prod.noalias() = ws.tmp * ws.pcov;
          acc += trace_product_sym(ws.prod, r_mat);
        }
        return acc / static_cast<double>(bs);
      },
      0.0);
  out.mmse1 = mmse(mu, q, 1.0, r, child_cfg(1));
  out.mmse2 = mmse(mu, q, 2.0, r, child_cfg(2));
  out.trace_bound = trace_product_sym(r_mat, measures::cov(mu).entries());

  const double diff = out.mmse1.value - out.mmse2.value;
  const double se_match = std::sqrt(out.integral.std_error * out.integral.std_error +
                                    out.mmse1.std_error * out.mmse1.std_error +
                                    out.mmse2.std_error * out.mmse2.std_error);
  const bool matches = std::abs(out.integral.value - diff) <= 3.0 * se_match + kReportTol;
  const bool bounded =
      out.integral.value <= out.trace_bound + 3.0 * out.integral.std_error + kReportTol;
  out.pass = matches && bounded;
  return out;
}

SweepReport fixed_t_sweep(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q,
                          const std::vector<double>& grid, double big_m, const McConfig& cfg) {
  if (!(big_m > 3.0)) throw InvalidParameter("fixed_t_sweep: M must exceed 3");
  for (double t : grid) {
    if (!(t >= 1.0 && t <= 2.0)) throw InvalidParameter("fixed_t_sweep: grid must lie in [1,2]");
  }
  const double bound = entropy_upper_bound(mu, q);
  const Eigen::MatrixXd cov_mu = measures::cov(mu).entries();
  const RngStream root(cfg.seed);

  SweepReport report;
  report.guaranteed_fraction = 1.0 - 3.0 / big_m;
  int n_pass = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    auto point_cfg = [&](std::uint64_t which) {
      McConfig c = cfg;
      c.seed = root.split(kTagSweep, i * 4 + which).next_u64();
      c.tau_mode = channel::TauMode::fixed(t);
      return c;
    };
    const auto cov_est = estimate_mixture_cov(mu, q, point_cfg(0));
    const auto qc_est = estimate_cov_qcov(mu, q, point_cfg(1));
    const auto mi_est = estimate_mutual_information(mu, q, point_cfg(2));

    SweepPoint p;
    p.t = t;
    const double cov1_slack = linalg::min_sym_eigenvalue(big_m * q.entries() - cov_est.value);
    p.cov1 = cov1_slack + 3.0 * cov_est.std_error.norm() >= -kReportTol;
    p.entropy = mi_est.value <= big_m * bound + 3.0 * mi_est.std_error + kReportTol &&
                mi_est.value >= -3.0 * mi_est.std_error - kReportTol;
    const double cov2_slack = linalg::min_sym_eigenvalue(big_m * cov_mu - qc_est.value);
    p.cov2 = cov2_slack + 3.0 * qc_est.std_error.norm() >= -kReportTol;
    if (p.all()) ++n_pass;
    report.points.push_back(p);
  }
  report.pass_fraction =
      grid.empty() ? 1.0 : static_cast<double>(n_pass) / static_cast<double>(grid.size());
  return report;
}

InequalityReport make_loewner_report(const std::string& which,
                                     const McEstimate<Eigen::MatrixXd>& lhs,
                                     const Eigen::MatrixXd& rhs_bound) {
  InequalityReport rep;
  rep.which = which;
  rep.lhs = lhs.value;
  rep.rhs = rhs_bound;
  rep.slack = linalg::min_sym_eigenvalue(rhs_bound - lhs.value);
  // Eigenvalue perturbation: |lambda_min shift| <= ||E||_2 <= ||E||_F.
  rep.ci_slack = 3.0 * lhs.std_error.norm();
  rep.pass = rep.slack + rep.ci_slack >= -kReportTol;
  rep.n_samples = lhs.n_samples;
  rep.seed = lhs.seed;
  return rep;
}

InequalityReport make_entropy_report(const McEstimate<double>& mi, double upper_bound) {
  InequalityReport rep;
  rep.which = "entropy";
  rep.lhs = Eigen::MatrixXd::Constant(1, 1, mi.value);
  rep.rhs = Eigen::MatrixXd::Constant(1, 1, upper_bound);
  // Two-sided: 0 <= I <= bound. The binding side defines the slack.
  rep.slack = std::min(upper_bound - mi.value, mi.value);
  rep.ci_slack = 3.0 * mi.std_error;
  rep.pass = rep.slack + rep.ci_slack >= -kReportTol;
  rep.n_samples = mi.n_samples;
  rep.seed = mi.seed;
  return rep;
}

TheoremReport verify_theorem(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q,
                             const McConfig& cfg) {
  const RngStream root(cfg.seed);
  auto child_cfg = [&](std::uint64_t i) {
    McConfig c = cfg;
    c.seed = root.split(kTagChildSeed, i).next_u64();
    c.tau_mode = channel::TauMode::uniform12();
    return c;
  };
  TheoremReport out;
  auto cov_est = estimate_mixture_cov(mu, q, child_cfg(0));
  cov_est.seed = cfg.seed;
  out.cov1 = make_loewner_report("cov1", cov_est, q.entries());

  auto mi_est = estimate_mutual_information(mu, q, child_cfg(1));
  mi_est.seed = cfg.seed;
  out.entropy = make_entropy_report(mi_est, entropy_upper_bound(mu, q));

  auto qc_est = estimate_cov_qcov(mu, q, child_cfg(2));
  qc_est.seed = cfg.seed;
  out.cov2 = make_loewner_report("cov2", qc_est, measures::cov(mu).entries());

  out.all_pass = out.cov1.pass && out.entropy.pass && out.cov2.pass;
  return out;
}

}  // namespace sloc::verify
