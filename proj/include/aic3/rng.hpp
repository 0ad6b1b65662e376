#pragma once

#include <cstdint>
#include <random>

namespace aic3 {

using Rng = std::mt19937_64;

// Independent generator for sub-stream `index` of a master seed. Used to give each
// bootstrap replicate and each simulated worker its own reproducible stream.
inline Rng rng_stream(std::uint64_t master_seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x41494333u};
  return Rng(seq);
}

}  // namespace aic3
