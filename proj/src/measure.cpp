#include "sloc/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

#include "sloc/rng.hpp"

namespace sloc::measures {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Purpose tags for the generator's substreams.
enum : std::uint64_t { kTagAtoms = 1, kTagWeights = 2 };

Eigen::MatrixXd merge_duplicate_atoms(const Eigen::MatrixXd& atoms, Eigen::VectorXd& log_w) {
  const Eigen::Index k = atoms.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < atoms.cols(); ++j) {
      if (atoms(a, j) != atoms(b, j)) return atoms(a, j) < atoms(b, j);
    }
    return a < b;
  });

  // Group lexicographically adjacent rows within the merge tolerance.
  std::vector<Eigen::Index> group_of(static_cast<std::size_t>(k));
  std::vector<Eigen::Index> group_head;  // representative row per group
  for (std::size_t s = 0; s < order.size(); ++s) {
    const Eigen::Index row = order[s];
    bool same = false;
    if (s > 0) {
      const Eigen::Index prev = order[s - 1];
      same = ((atoms.row(row) - atoms.row(prev)).cwiseAbs().maxCoeff() <= kAtomMergeTol);
    }
    if (same) {
      group_of[static_cast<std::size_t>(row)] = group_of[static_cast<std::size_t>(order[s - 1])];
    } else {
      group_of[static_cast<std::size_t>(row)] = static_cast<Eigen::Index>(group_head.size());
      group_head.push_back(row);
    }
  }
  if (group_head.size() == static_cast<std::size_t>(k)) return atoms;  // nothing to merge

  // Keep first-occurrence order of the surviving atoms.
  const auto n_groups = static_cast<Eigen::Index>(group_head.size());
  std::vector<Eigen::Index> first_row(static_cast<std::size_t>(n_groups), k);
  for (Eigen::Index i = 0; i < k; ++i) {
    auto g = static_cast<std::size_t>(group_of[static_cast<std::size_t>(i)]);
    first_row[g] = std::min(first_row[g], i);
  }
  std::vector<Eigen::Index> group_order(static_cast<std::size_t>(n_groups));
  std::iota(group_order.begin(), group_order.end(), 0);
  std::sort(group_order.begin(), group_order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return first_row[static_cast<std::size_t>(a)] < first_row[static_cast<std::size_t>(b)];
  });
  std::vector<Eigen::Index> slot_of_group(static_cast<std::size_t>(n_groups));
  for (Eigen::Index s = 0; s < n_groups; ++s) {
    slot_of_group[static_cast<std::size_t>(group_order[static_cast<std::size_t>(s)])] = s;
  }

  Eigen::MatrixXd merged_atoms(n_groups, atoms.cols());
  Eigen::VectorXd merged_log_w = Eigen::VectorXd::Constant(n_groups, -kInf);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index slot = slot_of_group[static_cast<std::size_t>(group_of[static_cast<std::size_t>(i)])];
    if (first_row[static_cast<std::size_t>(group_of[static_cast<std::size_t>(i)])] == i) {
      merged_atoms.row(slot) = atoms.row(i);
    }
    // log(e^a + e^b), stable.
    const double a = merged_log_w(slot), b = log_w(i);
    const double hi = std::max(a, b), lo = std::min(a, b);
    merged_log_w(slot) = (hi == -kInf) ? -kInf : hi + std::log1p(std::exp(lo - hi));
  }
  log_w = std::move(merged_log_w);
  return merged_atoms;
}

}  // namespace

double log_sum_exp(const Eigen::VectorXd& v) {
  double hi = -kInf;
  for (Eigen::Index i = 0; i < v.size(); ++i) hi = std::max(hi, v(i));
  if (hi == -kInf) return -kInf;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::exp(v(i) - hi);
  return hi + std::log(acc);
}

double normalize_log_weights(Eigen::VectorXd& v) {
  const double lse = log_sum_exp(v);
  if (lse != -kInf) v.array() -= lse;
  return lse;
}

DiscreteMeasure DiscreteMeasure::from_linear_weights(const Eigen::MatrixXd& atoms,
                                                     const Eigen::VectorXd& weights) {
  Eigen::VectorXd log_w(weights.size());
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!(weights(i) >= 0.0) || !std::isfinite(weights(i))) {
      throw InvalidParameter("DiscreteMeasure: weights must be finite and >= 0");
    }
    log_w(i) = weights(i) > 0.0 ? std::log(weights(i)) : -kInf;
  }
  return from_log_weights(atoms, log_w);
}

DiscreteMeasure DiscreteMeasure::from_log_weights(const Eigen::MatrixXd& atoms,
                                                  const Eigen::VectorXd& log_weights) {
  if (atoms.rows() < 1) throw InvalidParameter("DiscreteMeasure: needs at least one atom");
  if (atoms.cols() < 1) throw InvalidParameter("DiscreteMeasure: dimension must be >= 1");
  if (atoms.rows() != log_weights.size()) {
    throw DimensionMismatch("DiscreteMeasure: " + std::to_string(atoms.rows()) + " atoms vs " +
                            std::to_string(log_weights.size()) + " weights");
  }
  if (!atoms.allFinite()) throw NonFiniteInput("DiscreteMeasure: non-finite atom coordinate");
  Eigen::VectorXd log_w = log_weights;
  for (Eigen::Index i = 0; i < log_w.size(); ++i) {
    if (std::isnan(log_w(i)) || log_w(i) == kInf) {
      throw NonFiniteInput("DiscreteMeasure: invalid log-weight");
    }
  }
  Eigen::MatrixXd merged = merge_duplicate_atoms(atoms, log_w);
  if (normalize_log_weights(log_w) == -kInf) {
    throw InvalidParameter("DiscreteMeasure: total weight is zero");
  }
  return DiscreteMeasure(std::move(merged), std::move(log_w));
}

DiscreteMeasure DiscreteMeasure::reweighted(Eigen::VectorXd log_weights) const {
  if (log_weights.size() != size()) {
    throw DimensionMismatch("reweighted: weight count " + std::to_string(log_weights.size()) +
                            " vs atom count " + std::to_string(size()));
  }
  if (normalize_log_weights(log_weights) == -kInf) {
    throw EmptyPosterior("reweighted: all weights vanished");
  }
  return DiscreteMeasure(atoms_, std::move(log_weights));
}

GaussianMeasure::GaussianMeasure(Eigen::VectorXd m, linalg::PsdMatrix cov)
    : mean(std::move(m)), covariance(std::move(cov)) {
  if (mean.size() != covariance.dim()) {
    throw DimensionMismatch("GaussianMeasure: mean size " + std::to_string(mean.size()) +
                            " vs covariance dim " + std::to_string(covariance.dim()));
  }
  if (!mean.allFinite()) throw NonFiniteInput("GaussianMeasure: non-finite mean");
}

Eigen::VectorXd mean(const DiscreteMeasure& mu) {
  return mu.atoms().transpose() * mu.weights();
}

linalg::PsdMatrix cov(const DiscreteMeasure& mu) {
  const Eigen::VectorXd w = mu.weights();
  const Eigen::VectorXd m = mu.atoms().transpose() * w;
  Eigen::MatrixXd centered = mu.atoms();
  centered.rowwise() -= m.transpose();
  Eigen::MatrixXd scaled = centered.array().colwise() * w.array();
  return linalg::PsdMatrix(Eigen::MatrixXd(centered.transpose() * scaled));
}

double kl_divergence(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.dim() != b.dim() || a.size() != b.size() ||
      !(a.atoms().array() == b.atoms().array()).all()) {
    throw SupportMismatch("kl_divergence: measures do not share one atom list");
  }
  double acc = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    const double la = a.log_weights()(i);
    if (la == -kInf) continue;  // 0 log 0 = 0
    const double lb = b.log_weights()(i);
    if (lb == -kInf) {
      throw AbsoluteContinuityViolation("kl_divergence: atom " + std::to_string(i) +
                                        " has positive weight in a but zero in b");
    }
    acc += std::exp(la) * (la - lb);
  }
  return acc;
}

GaussianMeasure gaussian_posterior(const GaussianMeasure& prior, const linalg::PsdMatrix& q,
                                   double t, const Eigen::VectorXd& y) {
  if (t < 0.0) throw InvalidParameter("gaussian_posterior: t must be >= 0");
  if (q.dim() != prior.dim() || y.size() != prior.dim()) {
    throw DimensionMismatch("gaussian_posterior: dimension mismatch");
  }
  if (t == 0.0) return prior;
  if (!y.allFinite()) throw NonFiniteInput("gaussian_posterior: non-finite observation");
  const linalg::PsdMatrix prior_prec = linalg::psd_inverse(prior.covariance);
  const linalg::PsdMatrix q_inv = linalg::psd_inverse(q);
  const linalg::PsdMatrix post_prec(
      Eigen::MatrixXd(prior_prec.entries() + t * q_inv.entries()));
  linalg::PsdMatrix post_cov = linalg::psd_inverse(post_prec);
  Eigen::VectorXd post_mean =
      post_cov.entries() * (prior_prec.entries() * prior.mean +
                            std::sqrt(t) * (q_inv.entries() * y));
  return GaussianMeasure(std::move(post_mean), std::move(post_cov));
}

double gaussian_mutual_information(const linalg::PsdMatrix& sigma, const linalg::PsdMatrix& q,
                                   double t) {
  if (t < 0.0) throw InvalidParameter("gaussian_mutual_information: t must be >= 0");
  if (sigma.dim() != q.dim()) throw DimensionMismatch("gaussian_mutual_information: dims differ");
  const double logdet_q = linalg::logdet(q);  // also enforces strict PD
  if (t == 0.0) return 0.0;
  const linalg::PsdMatrix shifted(Eigen::MatrixXd(q.entries() + t * sigma.entries()));
  return 0.5 * (linalg::logdet(shifted) - logdet_q);
}

DiscreteMeasure random_measure(std::uint64_t seed, int n, int k, Geometry geometry) {
  if (n < 1 || k < 1) throw InvalidParameter("random_measure: need n >= 1 and k >= 1");
  RngStream root(seed);
  RngStream atom_rng = root.split(kTagAtoms);
  Eigen::MatrixXd atoms(k, n);
  switch (geometry) {
    case Geometry::kCube:
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j) atoms(i, j) = atom_rng.uniform(-1.0, 1.0);
      break;
    case Geometry::kSphere:
      for (int i = 0; i < k; ++i) {
        Eigen::VectorXd g(n);
        double norm = 0.0;
        while (norm == 0.0) {
          for (int j = 0; j < n; ++j) g(j) = atom_rng.normal();
          norm = g.norm();
        }
        atoms.row(i) = g.transpose() / norm;
      }
      break;
    case Geometry::kIsing: {
      const bool capacity_huge = n >= 63;
      const std::uint64_t capacity = capacity_huge ? 0 : (std::uint64_t{1} << n);
      if (!capacity_huge && static_cast<std::uint64_t>(k) > capacity) {
        throw InvalidGeometry("random_measure: ising needs k <= 2^n (k=" + std::to_string(k) +
                              ", n=" + std::to_string(n) + ")");
      }
      std::vector<std::uint64_t> codes;
      if (!capacity_huge && static_cast<std::uint64_t>(k) == capacity) {
        for (std::uint64_t c = 0; c < capacity; ++c) codes.push_back(c);
      } else {
        std::unordered_set<std::uint64_t> seen;
        while (codes.size() < static_cast<std::size_t>(k)) {
          std::uint64_t c = capacity_huge ? atom_rng.next_u64() : atom_rng.below(capacity);
          if (seen.insert(c).second) codes.push_back(c);
        }
      }
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j) atoms(i, j) = ((codes[static_cast<std::size_t>(i)] >> j) & 1) ? 1.0 : -1.0;
      break;
    }
    case Geometry::kClustered: {
      const int m = std::max(1, (k + 3) / 4);
      Eigen::MatrixXd centers(m, n);
      for (int c = 0; c < m; ++c)
        for (int j = 0; j < n; ++j) centers(c, j) = atom_rng.uniform(-2.0, 2.0);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j) atoms(i, j) = centers(i % m, j) + 0.25 * atom_rng.normal();
      break;
    }
  }
  RngStream weight_rng = root.split(kTagWeights);
  Eigen::VectorXd log_w(k);
  for (int i = 0; i < k; ++i) log_w(i) = std::log(weight_rng.exponential());
  return DiscreteMeasure::from_log_weights(atoms, log_w);
}

DiscreteMeasure discretize_1d(const GaussianMeasure& g, int k, double half_width_sigmas) {
  if (g.dim() != 1) throw InvalidParameter("discretize_1d: only 1-D Gaussians");
  if (k < 2) throw InvalidParameter("discretize_1d: need k >= 2");
  const double sigma = std::sqrt(g.covariance.entries()(0, 0));
  if (sigma <= 0.0) throw InvalidParameter("discretize_1d: needs positive variance");
  const double lo = g.mean(0) - half_width_sigmas * sigma;
  const double step = 2.0 * half_width_sigmas * sigma / (k - 1);
  Eigen::MatrixXd atoms(k, 1);
  Eigen::VectorXd log_w(k);
  for (int i = 0; i < k; ++i) {
    const double x = lo + i * step;
    atoms(i, 0) = x;
    const double zscore = (x - g.mean(0)) / sigma;
    log_w(i) = -0.5 * zscore * zscore;
  }
  return DiscreteMeasure::from_log_weights(atoms, log_w);
}

void weighted_mean_into(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& w,
                        Eigen::VectorXd& mean_out) {
  mean_out.noalias() = atoms.transpose() * w;
}

void weighted_cov_into(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& w,
                       const Eigen::VectorXd& mean, Eigen::MatrixXd& centered_ws,
                       Eigen::MatrixXd& scaled_ws, Eigen::MatrixXd& cov_out) {
  centered_ws = atoms;
  centered_ws.rowwise() -= mean.transpose();
  scaled_ws = centered_ws.array().colwise() * w.array();
  cov_out.noalias() = centered_ws.transpose() * scaled_ws;
}

}  // namespace sloc::measures
