#include "binmat/runner.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace binmat {

void run_samples_blocked(const PreparedSpec& spec, long long T, uint64_t seed, int threads,
                         const std::function<void(long long, std::span<const SampleRecord>)>& consume,
                         long long block_size) {
  if (T <= 0) return;
  threads = std::max(1, threads);
  block_size = std::max<long long>(1, block_size);

  std::vector<SampleRecord> block;
  for (long long start = 0; start < T; start += block_size) {
    const long long count = std::min(block_size, T - start);
    block.assign(static_cast<size_t>(count), SampleRecord{});
    if (threads == 1 || count == 1) {
      SampleWorkspace ws;
      for (long long k = 0; k < count; ++k) {
        RngStream rng(seed, static_cast<uint64_t>(start + k));
        block[static_cast<size_t>(k)] = spec.sample(rng, ws);
      }
    } else {
      std::atomic<long long> next{0};
      auto worker = [&] {
        SampleWorkspace ws;
        for (;;) {
          const long long k = next.fetch_add(1);
          if (k >= count) return;
          RngStream rng(seed, static_cast<uint64_t>(start + k));
          block[static_cast<size_t>(k)] = spec.sample(rng, ws);
        }
      };
      std::vector<std::thread> pool;
      const int nthreads = static_cast<int>(std::min<long long>(threads, count));
      pool.reserve(nthreads);
      for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    consume(start, block);
  }
}

}  // namespace binmat
