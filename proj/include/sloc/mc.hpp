#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>
#include <Eigen/Dense>

#include "sloc/channel.hpp"
#include "sloc/errors.hpp"

namespace sloc {

// Estimator configuration. Seeds are always explicit; there is no wall-clock
// fallback anywhere. Requested sample counts are rounded down to a multiple
// of n_batches.
struct McConfig {
  std::int64_t n_samples = 100000;
  int n_batches = 50;
  std::uint64_t seed = 0;
  channel::TauMode tau_mode = channel::TauMode::uniform12();
  int threads = 0;  // 0 -> hardware concurrency
};

template <class T>
struct McEstimate {
  T value;
  T std_error;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
  int n_batches = 0;
};

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, count) on up to `threads` workers. Work items write
// only to their own slots, so the result is identical for any worker count.
void parallel_for_indexed(int count, int threads, const std::function<void(int)>& fn);

inline std::int64_t batch_size_for(const McConfig& cfg) {
  if (cfg.n_samples < 100) {
    throw InsufficientSamples("estimator needs n_samples >= 100, got " +
                              std::to_string(cfg.n_samples));
  }
  if (cfg.n_batches < 2) throw InvalidParameter("estimator needs n_batches >= 2");
  const std::int64_t bs = cfg.n_samples / cfg.n_batches;
  if (bs < 1) throw InvalidParameter("estimator needs n_samples >= n_batches");
  return bs;
}

// Batch-mean estimate from per-batch means accumulated in index order.
// batch_fn(batch_index, batch_stream, batch_size) returns the batch mean.
template <class T, class BatchFn>
McEstimate<T> mc_batch_estimate(const McConfig& cfg, std::uint64_t stream_tag, BatchFn batch_fn,
                                const T& zero) {
  const std::int64_t bs = batch_size_for(cfg);
  const RngStream root(cfg.seed);
  std::vector<T> batch_means(static_cast<std::size_t>(cfg.n_batches), zero);
  parallel_for_indexed(cfg.n_batches, resolve_threads(cfg.threads), [&](int b) {
    RngStream stream = root.split(stream_tag, static_cast<std::uint64_t>(b));
    batch_means[static_cast<std::size_t>(b)] = batch_fn(b, stream, bs);
  });

  McEstimate<T> est;
  est.n_samples = bs * cfg.n_batches;
  est.n_batches = cfg.n_batches;
  est.seed = cfg.seed;
  T sum = zero;
  for (const T& m : batch_means) sum += m;
  est.value = sum / static_cast<double>(cfg.n_batches);
  T ss = zero;
  for (const T& m : batch_means) {
    T d = m - est.value;
    if constexpr (std::is_same_v<T, double>) {
      ss += d * d;
    } else {
      ss += d.cwiseProduct(d);
    }
  }
  const double denom = static_cast<double>(cfg.n_batches) * (cfg.n_batches - 1);
  if constexpr (std::is_same_v<T, double>) {
    est.std_error = std::sqrt(ss / denom);
  } else {
    est.std_error = (ss / denom).cwiseSqrt();
  }
  return est;
}

}  // namespace sloc
