#ifndef BINMAT_RUNNER_HPP_
#define BINMAT_RUNNER_HPP_

#include <functional>

#include "binmat/proposal.hpp"

namespace binmat {

// Generates samples 0..T-1 across a worker pool in fixed-size blocks and
// hands each finished block to `consume` in index order. Each sample uses the
// stream derived from (seed, index), so results do not depend on the thread
// count. `consume(first_index, records)` runs on the calling thread.
void run_samples_blocked(const PreparedSpec& spec, long long T, uint64_t seed, int threads,
                         const std::function<void(long long, std::span<const SampleRecord>)>& consume,
                         long long block_size = 4096);

}  // namespace binmat

#endif  // BINMAT_RUNNER_HPP_
