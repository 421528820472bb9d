#ifndef SMAXWELL_PARALLEL_HPP
#define SMAXWELL_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace smaxwell
{

// Worker count: SMAXWELL_THREADS if set and positive, else the hardware concurrency.
inline int thread_count()
{
  if (const char *env = std::getenv("SMAXWELL_THREADS"))
  {
    try
    {
      const int v = std::stoi(env);
      if (v > 0)
      {
        return v;
      }
    }
    catch (const std::exception &)
    {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(shard) for shard in [0, shards). The shard partition is fixed by the caller,
// so results combined in shard order do not depend on the number of threads.
template <typename Body>
void for_each_shard(int shards, Body &&body)
{
  const int workers = std::min(thread_count(), shards);
  if (workers <= 1)
  {
    for (int s = 0; s < shards; ++s)
    {
      body(s);
    }
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t)
  {
    pool.emplace_back(
        [&]()
        {
          for (int s = next++; s < shards; s = next++)
          {
            try
            {
              body(s);
            }
            catch (...)
            {
              std::lock_guard<std::mutex> lock(error_mutex);
              if (!error)
              {
                error = std::current_exception();
              }
            }
          }
        });
  }
  for (auto &th : pool)
  {
    th.join();
  }
  if (error)
  {
    std::rethrow_exception(error);
  }
}

}  // namespace smaxwell

#endif  // SMAXWELL_PARALLEL_HPP
