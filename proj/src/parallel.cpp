#include "sakf/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sakf {

namespace {
std::atomic<int> g_threads{0};

int effective_threads() {
  const int n = g_threads.load();
  if (n > 0) return n;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}
}  // namespace

void set_thread_count(int n) { g_threads.store(n < 0 ? 0 : n); }

int thread_count() { return effective_threads(); }

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& fn,
                  std::size_t chunk) {
  if (begin >= end) return;
  const std::size_t total = end - begin;
  const int workers = std::min<std::size_t>(effective_threads(), total);
  if (chunk == 0) chunk = 1;
  if (workers <= 1) {
    for (std::size_t lo = begin; lo < end; lo += chunk)
      fn(lo, std::min(end, lo + chunk));
    return;
  }

  std::atomic<std::size_t> next{begin};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto body = [&] {
    for (;;) {
      const std::size_t lo = next.fetch_add(chunk);
      if (lo >= end) return;
      try {
        fn(lo, std::min(end, lo + chunk));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers) - 1);
  for (int i = 1; i < workers; ++i) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace sakf
