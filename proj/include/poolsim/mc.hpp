#pragma once

// Deterministic parallel Monte Carlo.
//
// Replicas are evaluated into a per-index buffer by any number of workers and
// then reduced sequentially with compensated summation, so estimates are
// identical for every worker count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace poolsim {

inline constexpr const char* kWorkersEnv = "POOLSIM_WORKERS";

/// Worker count from POOLSIM_WORKERS, else the hardware concurrency.
inline unsigned default_workers() {
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Neumaier-compensated sum in index order.
inline double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

struct MeanCi {
  double mean = 0.0;
  double ci_half_width = 0.0;  // 1.96 * sample sd / sqrt(n)
  double sd = 0.0;
  std::size_t n = 0;
};

inline MeanCi summarize(std::span<const double> values) {
  MeanCi out;
  out.n = values.size();
  if (values.empty()) return out;
  out.mean = compensated_sum(values) / static_cast<double>(out.n);
  if (out.n > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double d = values[i] - out.mean;
      sq[i] = d * d;
    }
    out.sd = std::sqrt(compensated_sum(sq) / static_cast<double>(out.n - 1));
    out.ci_half_width = 1.96 * out.sd / std::sqrt(static_cast<double>(out.n));
  }
  return out;
}

/// values[i] = fn(i) for i in [0, n), computed on `workers` threads in
/// contiguous chunks. The first exception thrown by any worker is rethrown.
template <typename Fn>
std::vector<double> parallel_map(std::size_t n, Fn&& fn, unsigned workers = default_workers()) {
  std::vector<double> out(n);
  workers = static_cast<unsigned>(std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) out[i] = fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace poolsim
