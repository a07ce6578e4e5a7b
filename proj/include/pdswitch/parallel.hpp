#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <random>
#include <thread>
#include <vector>

namespace pdswitch {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent engine for (seed, path, stream); stream 0 drives the Brownian
// increments and stream 1 the jump clock.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t path, std::uint64_t stream) {
  const std::uint64_t a = splitmix64(seed ^ splitmix64(path + 0x632be59bd9b4e019ULL));
  const std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0x8cb92ba72f3d8dd7ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32)};
  return std::mt19937_64(seq);
}

/// Evaluates fn(path) for path in [first, first + n) on up to `threads`
/// workers. Results come back in path order, so any fold over them is
/// independent of the worker count.
template <class R, class F>
std::vector<R> map_paths(std::uint64_t first, std::size_t n, unsigned threads, F&& fn) {
  std::vector<std::optional<R>> slots(n);
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (std::size_t k = 0; k < n; ++k) slots[k].emplace(fn(first + k));
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t k = next++; k < n; k = next++) {
            try {
              slots[k].emplace(fn(first + k));
            } catch (...) {
              std::lock_guard lock(error_mutex);
              if (!error) error = std::current_exception();
            }
          }
        });
      }
    }
    if (error) std::rethrow_exception(error);
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace pdswitch
