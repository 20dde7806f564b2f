#include "sloc/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sloc/mc.hpp"
#include "sloc/rng.hpp"

namespace sloc::sde {

namespace {

constexpr double kMaxLogLStep = 50.0;
constexpr double kDiagnosticTol = 1e-9;

enum : std::uint64_t { kTagPathSeed = 0x31, kTagXDraw = 0x32, kTagChannelSide = 0x33 };

std::int64_t validated_steps(const PathConfig& cfg) {
  if (!(cfg.dt > 0.0) || !(cfg.t_max >= cfg.dt)) {
    throw InvalidParameter("PathConfig: needs 0 < dt <= t_max");
  }
  if (cfg.record_every < 1) throw InvalidParameter("PathConfig: record_every must be >= 1");
  const auto steps = static_cast<std::int64_t>(std::llround(cfg.t_max / cfg.dt));
  if (steps < 1 || steps > 10'000'000) {
    throw InvalidParameter("PathConfig: t_max/dt must lie in [1, 1e7]");
  }
  return steps;
}

struct DriverState {
  Eigen::VectorXd ybar, xi, noise, logw, w, a;
  channel::TiltEngine engine;
  Eigen::MatrixXd sqrt_q;

  DriverState(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q)
      : engine(mu, q), sqrt_q(linalg::psd_sqrt(q).entries()) {
    const int n = mu.dim();
    ybar = Eigen::VectorXd::Zero(n);
    xi.resize(n);
    noise.resize(n);
    logw.resize(mu.size());
    w.resize(mu.size());
    a.resize(n);
  }

  void refresh_posterior(double t) {
    engine.tilted_log_weights_unnormalized(ybar, t, logw);
    measures::normalize_log_weights(logw);
    w = logw.array().exp();
    measures::weighted_mean_into(engine.atoms(), w, a);
  }

  void draw_noise(RngStream& rng, double sqrt_dt) {
    for (Eigen::Index j = 0; j < xi.size(); ++j) xi(j) = rng.normal();
    noise.noalias() = sqrt_q * xi;
    noise *= sqrt_dt;
  }
};

bool should_record(std::int64_t step, std::int64_t n_steps, int record_every) {
  return step % record_every == 0 || step == n_steps;
}

}  // namespace

Path simulate_exact(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q, int x_index,
                    const PathConfig& cfg) {
  const std::int64_t n_steps = validated_steps(cfg);
  if (x_index < 0 || x_index >= mu.size()) {
    throw InvalidParameter("simulate_exact: x_index out of range");
  }
  RngStream rng(cfg.seed);
  DriverState st(mu, q);
  const Eigen::VectorXd x = mu.atoms().row(x_index).transpose();
  const double sqrt_dt = std::sqrt(cfg.dt);

  Path path;
  st.refresh_posterior(0.0);
  path.push_back(PathState{0.0, st.ybar, st.logw, st.a, {}});
  for (std::int64_t s = 1; s <= n_steps; ++s) {
    st.draw_noise(rng, sqrt_dt);
    st.ybar += cfg.dt * x;
    st.ybar += st.noise;
    if (should_record(s, n_steps, cfg.record_every)) {
      const double t = static_cast<double>(s) * cfg.dt;
      st.refresh_posterior(t);
      path.push_back(PathState{t, st.ybar, st.logw, st.a, {}});
    }
  }
  return path;
}

Path simulate_innovations(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q,
                          const PathConfig& cfg) {
  return detail::simulate_innovations_scaled(mu, q, cfg, 1.0);
}

namespace detail {

Path simulate_innovations_scaled(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q,
                                 const PathConfig& cfg, double drift_scale) {
  const std::int64_t n_steps = validated_steps(cfg);
  RngStream rng(cfg.seed);
  DriverState st(mu, q);
  const double sqrt_dt = std::sqrt(cfg.dt);

  Path path;
  st.refresh_posterior(0.0);
  path.push_back(PathState{0.0, st.ybar, st.logw, st.a, {}});
  for (std::int64_t s = 1; s <= n_steps; ++s) {
    st.draw_noise(rng, sqrt_dt);
    st.ybar += (drift_scale * cfg.dt) * st.a;
    st.ybar += st.noise;
    const double t = static_cast<double>(s) * cfg.dt;
    st.refresh_posterior(t);  // a_t feeds the next increment
    if (should_record(s, n_steps, cfg.record_every)) {
      path.push_back(PathState{t, st.ybar, st.logw, st.a, {}});
    }
  }
  return path;
}

}  // namespace detail

Path simulate_likelihood_sde(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q,
                             const PathConfig& cfg) {
  const std::int64_t n_steps = validated_steps(cfg);
  RngStream rng(cfg.seed);
  DriverState st(mu, q);
  const Eigen::MatrixXd inv_sqrt_q = linalg::psd_inv_sqrt(q).entries();
  const Eigen::MatrixXd q_inv = linalg::psd_inverse(q).entries();
  const double sqrt_dt = std::sqrt(cfg.dt);
  const int k = mu.size();

  Eigen::VectorXd log_l = Eigen::VectorXd::Zero(k);  // L_0 = 1
  Eigen::VectorXd u(mu.dim());
  Eigen::VectorXd atom_dot_u(k), qa(k), delta(k);

  Path path;
  st.refresh_posterior(0.0);
  path.push_back(PathState{0.0, st.ybar, st.logw, st.a, log_l});
  for (std::int64_t s = 1; s <= n_steps; ++s) {
    st.draw_noise(rng, sqrt_dt);
    // Shared dW across atoms: <x_i - a, Q^{-1/2} xi> sqrt(dt) and the
    // -0.5 |x_i - a|^2_{Q^-1} dt compensator.
    u.noalias() = inv_sqrt_q * st.xi;
    atom_dot_u.noalias() = st.engine.atoms() * u;
    const double a_dot_u = st.a.dot(u);
    qa.noalias() = st.engine.qinv_atoms() * st.a;
    const double a_quad = st.a.dot(q_inv * st.a);
    delta = sqrt_dt * (atom_dot_u.array() - a_dot_u) -
            (0.5 * cfg.dt) * (st.engine.atom_quad().array() - 2.0 * qa.array() + a_quad);
    const double max_step = delta.cwiseAbs().maxCoeff();
    if (max_step > kMaxLogLStep) {
      throw StepTooLarge("simulate_likelihood_sde: |d log L| = " + std::to_string(max_step) +
                         " at t = " + std::to_string(static_cast<double>(s) * cfg.dt) +
                         "; reduce dt for this measure/Q");
    }
    log_l += delta;
    // ybar follows the same innovation increment for recording purposes.
    st.ybar += cfg.dt * st.a;
    st.ybar += st.noise;
    st.logw = st.engine.base_log_weights() + log_l;
    measures::normalize_log_weights(st.logw);
    st.w = st.logw.array().exp();
    measures::weighted_mean_into(st.engine.atoms(), st.w, st.a);
    const double t = static_cast<double>(s) * cfg.dt;
    if (should_record(s, n_steps, cfg.record_every)) {
      path.push_back(PathState{t, st.ybar, st.logw, st.a, log_l});
    }
  }
  return path;
}

std::vector<Path> run_paths(const measures::DiscreteMeasure& mu, const linalg::PsdMatrix& q,
                            const PathConfig& cfg, int n_paths, int threads,
                            std::optional<int> fixed_x_index, double drift_scale) {
  if (n_paths < 1) throw InsufficientPaths("run_paths: n_paths must be >= 1");
  validated_steps(cfg);
  const RngStream root(cfg.seed);
  const Eigen::VectorXd w = mu.weights();
  Eigen::VectorXd cdf(w.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    acc += w(i);
    cdf(i) = acc;
  }

  std::vector<Path> paths(static_cast<std::size_t>(n_paths));
  parallel_for_indexed(n_paths, resolve_threads(threads), [&](int p) {
    PathConfig local = cfg;
    local.seed = root.split(kTagPathSeed, static_cast<std::uint64_t>(p)).next_u64();
    switch (cfg.driver) {
      case Driver::kExactChannel: {
        int idx;
        if (fixed_x_index) {
          idx = *fixed_x_index;
        } else {
          RngStream xs = root.split(kTagXDraw, static_cast<std::uint64_t>(p));
          const double u = xs.uniform01();
          Eigen::Index lo = 0, hi = cdf.size() - 1;
          while (lo < hi) {
            const Eigen::Index mid = (lo + hi) / 2;
            if (cdf(mid) > u) {
              hi = mid;
            } else {
              lo = mid + 1;
            }
          }
          idx = static_cast<int>(lo);
        }
        paths[static_cast<std::size_t>(p)] = simulate_exact(mu, q, idx, local);
        break;
      }
      case Driver::kInnovations:
        paths[static_cast<std::size_t>(p)] =
            detail::simulate_innovations_scaled(mu, q, local, drift_scale);
        break;
      case Driver::kLikelihoodSde:
        paths[static_cast<std::size_t>(p)] = simulate_likelihood_sde(mu, q, local);
        break;
    }
  });
  return paths;
}

namespace {

std::size_t checkpoint_index(const Path& path, double t) {
  std::size_t best = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double gap = std::abs(path[i].t - t);
    if (gap < best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  if (best_gap > 1e-6 * std::max(1.0, std::abs(t))) {
    throw InvalidParameter("checkpoint t = " + std::to_string(t) +
                           " is not on the recording grid");
  }
  return best;
}

}  // namespace

DiagnosticReport martingale_diagnostic(const std::vector<Path>& paths,
                                       const measures::DiscreteMeasure& mu,
                                       const std::vector<double>& checkpoints) {
  if (paths.size() < 100) {
    throw InsufficientPaths("martingale_diagnostic: needs >= 100 paths, got " +
                            std::to_string(paths.size()));
  }
  const Eigen::VectorXd prior_mean = measures::mean(mu);
  const Eigen::VectorXd prior_w = mu.weights();
  const auto n_paths = static_cast<double>(paths.size());

  DiagnosticReport report;
  report.pass = true;
  for (double t : checkpoints) {
    const std::size_t idx = checkpoint_index(paths.front(), t);
    CheckpointStats cs;
    cs.t = paths.front()[idx].t;
    Eigen::VectorXd sum_a = Eigen::VectorXd::Zero(mu.dim());
    Eigen::VectorXd sum_a2 = Eigen::VectorXd::Zero(mu.dim());
    Eigen::VectorXd sum_w = Eigen::VectorXd::Zero(mu.size());
    Eigen::VectorXd sum_w2 = Eigen::VectorXd::Zero(mu.size());
    for (const Path& p : paths) {
      const PathState& s = p.at(idx);
      sum_a += s.a;
      sum_a2.array() += s.a.array().square();
      const Eigen::VectorXd w = s.log_weights.array().exp();
      sum_w += w;
      sum_w2.array() += w.array().square();
    }
    cs.mean_a = sum_a / n_paths;
    cs.se_a = ((sum_a2.array() / n_paths - cs.mean_a.array().square()).max(0.0) /
               (n_paths - 1.0)).sqrt();
    cs.mean_w = sum_w / n_paths;
    cs.se_w = ((sum_w2.array() / n_paths - cs.mean_w.array().square()).max(0.0) /
               (n_paths - 1.0)).sqrt();
    cs.a_ok = ((cs.mean_a - prior_mean).cwiseAbs().array() <=
               3.0 * cs.se_a.array() + kDiagnosticTol).all();
    cs.w_ok = ((cs.mean_w - prior_w).cwiseAbs().array() <=
               3.0 * cs.se_w.array() + kDiagnosticTol).all();
    report.pass = report.pass && cs.a_ok && cs.w_ok;
    report.checkpoints.push_back(std::move(cs));
  }
  return report;
}

LocalizationReport localization_diagnostic(const std::vector<Path>& paths, double threshold) {
  if (!(threshold > 0.5 && threshold < 1.0)) {
    throw InvalidParameter("localization_diagnostic: threshold must lie in (0.5, 1)");
  }
  if (paths.empty()) throw InsufficientPaths("localization_diagnostic: no paths");
  std::vector<double> hit_times;
  for (const Path& p : paths) {
    for (const PathState& s : p) {
      if (s.log_weights.maxCoeff() >= std::log(threshold)) {
        hit_times.push_back(s.t);
        break;
      }
    }
  }
  LocalizationReport report;
  report.fraction_localized =
      static_cast<double>(hit_times.size()) / static_cast<double>(paths.size());
  if (!hit_times.empty()) {
    std::sort(hit_times.begin(), hit_times.end());
    const std::size_t m = hit_times.size();
    report.median_hit_time =
        (m % 2 == 1) ? hit_times[m / 2] : 0.5 * (hit_times[m / 2 - 1] + hit_times[m / 2]);
  }
  return report;
}

namespace {

// Batched first two moments of a sample of n-vectors; both sides of the law
// comparison go through this with the same batch count so the small-sample
// bias cancels in the difference.
struct BatchedMoments {
  Eigen::VectorXd mean, mean_se;
  Eigen::MatrixXd cov, cov_se;
};

BatchedMoments batched_moments(const std::vector<Eigen::VectorXd>& xs, int n_batches) {
  const int n = static_cast<int>(xs.front().size());
  const std::int64_t bs = static_cast<std::int64_t>(xs.size()) / n_batches;
  std::vector<Eigen::VectorXd> bmean(static_cast<std::size_t>(n_batches));
  std::vector<Eigen::MatrixXd> bcov(static_cast<std::size_t>(n_batches));
  for (int b = 0; b < n_batches; ++b) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
    for (std::int64_t i = 0; i < bs; ++i) m += xs[static_cast<std::size_t>(b * bs + i)];
    m /= static_cast<double>(bs);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    for (std::int64_t i = 0; i < bs; ++i) {
      const Eigen::VectorXd d = xs[static_cast<std::size_t>(b * bs + i)] - m;
      c += d * d.transpose();
    }
    c /= static_cast<double>(bs);
    bmean[static_cast<std::size_t>(b)] = m;
    bcov[static_cast<std::size_t>(b)] = c;
  }
  BatchedMoments out;
  out.mean = Eigen::VectorXd::Zero(n);
  for (const auto& m : bmean) out.mean += m;
  out.mean /= n_batches;
  out.cov = Eigen::MatrixXd::Zero(n, n);
  for (const auto& c : bcov) out.cov += c;
  out.cov /= n_batches;
  Eigen::VectorXd ssm = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd ssc = Eigen::MatrixXd::Zero(n, n);
  for (int b = 0; b < n_batches; ++b) {
    ssm.array() += (bmean[static_cast<std::size_t>(b)] - out.mean).array().square();
    ssc.array() += (bcov[static_cast<std::size_t>(b)] - out.cov).array().square();
  }
  const double denom = static_cast<double>(n_batches) * (n_batches - 1);
  out.mean_se = (ssm / denom).cwiseSqrt();
  out.cov_se = (ssc / denom).cwiseSqrt();
  return out;
}

MomentComparison compare_moments(const Eigen::MatrixXd& a, const Eigen::MatrixXd& a_se,
                                 const Eigen::MatrixXd& b, const Eigen::MatrixXd& b_se) {
  MomentComparison cmp;
  cmp.path_value = a;
  cmp.channel_value = b;
  cmp.tolerance = 3.0 * (a_se.cwiseProduct(a_se) + b_se.cwiseProduct(b_se)).cwiseSqrt();
  cmp.pass = ((a - b).cwiseAbs().array() <= cmp.tolerance.array() + kDiagnosticTol).all();
  return cmp;
}

}  // namespace

LawEquivalenceReport law_equivalence_test(const measures::DiscreteMeasure& mu,
                                          const linalg::PsdMatrix& q, double t, int n_paths,
                                          std::uint64_t seed) {
  return detail::law_equivalence_mismatched(mu, q, t, t, n_paths, seed);
}

namespace detail {

LawEquivalenceReport law_equivalence_mismatched(const measures::DiscreteMeasure& mu,
                                                const linalg::PsdMatrix& q, double t_path,
                                                double t_channel, int n_paths,
                                                std::uint64_t seed) {
  if (!(t_path > 0.0) || !(t_channel > 0.0)) {
    throw InvalidParameter("law_equivalence_test: t must be > 0");
  }
  if (n_paths < 1000) {
    throw InsufficientPaths("law_equivalence_test: needs n_paths >= 1000");
  }
  constexpr int kBatches = 25;
  constexpr int kStepsPerPath = 64;

  PathConfig cfg;
  cfg.dt = t_path / kStepsPerPath;
  cfg.t_max = t_path;
  cfg.driver = Driver::kExactChannel;
  cfg.seed = seed;
  cfg.record_every = kStepsPerPath;
  const std::vector<Path> paths = run_paths(mu, q, cfg, n_paths, 0);

  std::vector<Eigen::VectorXd> path_ybar, path_pmean;
  path_ybar.reserve(paths.size());
  path_pmean.reserve(paths.size());
  for (const Path& p : paths) {
    path_ybar.push_back(p.back().ybar);
    path_pmean.push_back(p.back().a);
  }

  const channel::ChannelSampler sampler(mu, q);
  const channel::TiltEngine engine(mu, q);
  RngStream chan_rng = RngStream(seed).split(kTagChannelSide);
  const channel::TauMode mode = channel::TauMode::fixed(t_channel);
  std::vector<Eigen::VectorXd> chan_ybar, chan_pmean;
  chan_ybar.reserve(static_cast<std::size_t>(n_paths));
  chan_pmean.reserve(static_cast<std::size_t>(n_paths));
  channel::ChannelDraw draw;
  Eigen::VectorXd logw(mu.size()), w(mu.size()), pm(mu.dim());
  for (int i = 0; i < n_paths; ++i) {
    sampler.sample_into(mode, chan_rng, draw);
    Eigen::VectorXd ybar = std::sqrt(t_channel) * draw.y;
    engine.tilted_log_weights_unnormalized(ybar, t_channel, logw);
    measures::normalize_log_weights(logw);
    w = logw.array().exp();
    measures::weighted_mean_into(engine.atoms(), w, pm);
    chan_ybar.push_back(ybar);
    chan_pmean.push_back(pm);
  }

  const BatchedMoments pm_path = batched_moments(path_ybar, kBatches);
  const BatchedMoments pm_chan = batched_moments(chan_ybar, kBatches);
  const BatchedMoments mm_path = batched_moments(path_pmean, kBatches);
  const BatchedMoments mm_chan = batched_moments(chan_pmean, kBatches);

  LawEquivalenceReport rep;
  rep.ybar_mean = compare_moments(pm_path.mean, pm_path.mean_se, pm_chan.mean, pm_chan.mean_se);
  rep.ybar_cov = compare_moments(pm_path.cov, pm_path.cov_se, pm_chan.cov, pm_chan.cov_se);
  rep.posterior_mean_mean =
      compare_moments(mm_path.mean, mm_path.mean_se, mm_chan.mean, mm_chan.mean_se);
  rep.posterior_mean_cov =
      compare_moments(mm_path.cov, mm_path.cov_se, mm_chan.cov, mm_chan.cov_se);
  rep.pass = rep.ybar_mean.pass && rep.ybar_cov.pass && rep.posterior_mean_mean.pass &&
             rep.posterior_mean_cov.pass;
  return rep;
}

}  // namespace detail

}  // namespace sloc::sde
