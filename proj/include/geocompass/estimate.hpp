#pragma once

// Deterministic parallel Monte Carlo reduction.  Replicate r always draws
// from stream (master_seed, stream_id + r) and lands in a fixed 4096-wide
// block; block partials are combined by pairwise summation over the block
// index.  The reduction tree therefore depends only on the replication
// count, never on the worker count or scheduling order.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "geocompass/rng.hpp"
#include "geocompass/special.hpp"

namespace geocompass {

struct MeanAccumulation {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t count = 0;
};

inline constexpr std::uint64_t kReplicationBlock = 4096;

// make_worker() is invoked once per worker thread and must return a callable
// double(SplitMix64&) evaluating one replication (it may own scratch state).
template <typename MakeWorker>
MeanAccumulation parallel_replicate(std::uint64_t replications, SeedSpec seed,
                                    int workers, MakeWorker&& make_worker) {
  if (replications < 1)
    throw std::invalid_argument("parallel_replicate: need replications >= 1");
  const std::uint64_t nblocks = (replications + kReplicationBlock - 1) / kReplicationBlock;
  std::vector<double> block_sum(nblocks, 0.0);
  std::vector<double> block_sumsq(nblocks, 0.0);

  const auto run_block = [&](auto& fn, std::uint64_t b) {
    const std::uint64_t lo = b * kReplicationBlock;
    const std::uint64_t hi = std::min(replications, lo + kReplicationBlock);
    double s = 0.0, s2 = 0.0;
    for (std::uint64_t r = lo; r < hi; ++r) {
      SplitMix64 rng({seed.master_seed, seed.stream_id + r});
      const double x = fn(rng);
      s += x;
      s2 += x * x;
    }
    block_sum[b] = s;
    block_sumsq[b] = s2;
  };

  const std::uint64_t usable = std::min<std::uint64_t>(
      nblocks, workers < 1 ? 1 : static_cast<std::uint64_t>(workers));
  if (usable <= 1) {
    auto fn = make_worker();
    for (std::uint64_t b = 0; b < nblocks; ++b) run_block(fn, b);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(usable);
    for (std::uint64_t w = 0; w < usable; ++w) {
      pool.emplace_back([&] {
        try {
          auto fn = make_worker();
          for (std::uint64_t b = next.fetch_add(1); b < nblocks; b = next.fetch_add(1))
            run_block(fn, b);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failed.load()) std::rethrow_exception(failure);
  }

  MeanAccumulation out;
  out.count = replications;
  const double n = static_cast<double>(replications);
  const double total = pairwise_sum(block_sum);
  out.mean = total / n;
  if (replications > 1) {
    const double ss = pairwise_sum(block_sumsq) - n * out.mean * out.mean;
    out.std_error = std::sqrt(std::max(0.0, ss) / (n * (n - 1.0)));
  }
  return out;
}

}  // namespace geocompass
