#include "aas/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace aas
{

namespace
{
std::atomic<unsigned> g_threads{0};
}

void set_num_threads(unsigned n) { g_threads.store(n); }

unsigned num_threads()
{
  const unsigned requested = g_threads.load();
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return requested == 0 ? hw : std::min(requested, hw);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body)
{
  const std::size_t workers = std::min<std::size_t>(num_threads(), n);
  if (workers <= 1 || n < 64)
  {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w)
  {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([&, lo, hi] {
      try
      {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      }
      catch (...)
      {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

} // namespace aas
