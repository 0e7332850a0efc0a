#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace zzb {

/// splitmix64 finalizer over (master, index); gives each work item its own stream
/// so results do not depend on how items are scheduled across threads.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Uniform double in [0, 1) from the top 53 bits.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Recursive pairwise summation. The split points depend only on the length,
/// so the result is identical for any thread count that filled the input.
double pairwise_sum(std::span<const double> values);

/// Number of OpenMP threads a parallel region would use (1 without OpenMP).
int max_threads();

/// Sets the OpenMP thread count for subsequent regions; n <= 0 leaves it unchanged.
void set_threads(int n);

}  // namespace zzb
