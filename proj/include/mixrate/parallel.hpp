#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace mixrate {

enum class Execution { serial, parallel };

/// Worker cap for OpenMP regions. Resolution order: explicit set_threads(),
/// then the MIXRATE_THREADS environment variable, then all available cores.
int threads();
void set_threads(int k);
int threads_from_env_or_default();

/// Calls body(i) for i in [0, count). The parallel path uses a dynamic
/// OpenMP schedule; bodies must write only to their own slot so that the
/// outcome does not depend on the schedule.
void for_each_index(std::size_t count, const std::function<void(std::size_t)> &body,
                    Execution exec = Execution::parallel);

/// SplitMix64 finalizer; bijective 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for replicate r at grid point i: seed XOR hash(i, r). Extending a grid
/// or adding replicates leaves existing streams untouched.
constexpr std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t grid_index,
                                 std::uint64_t replicate) noexcept {
  return seed ^ splitmix64(splitmix64(grid_index) ^ (replicate * 0xd1b54a32d192ed03ULL));
}

} // namespace mixrate
