#pragma once

#include <array>
#include <cstdint>

namespace mflqg {

// Philox4x32-10 block cipher used as a counter-based generator.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

// Brownian increments dW ~ Normal(0, dt), one per (path, agent, step). Any
// increment can be regenerated from its key alone, so the number of paths,
// the visiting order or the thread count never changes a stream.
class NoiseBank {
 public:
  NoiseBank(std::uint64_t seed, double dt);

  std::uint64_t seed() const noexcept { return seed_; }
  double dt() const noexcept { return dt_; }

  double standard_normal(std::uint64_t path, std::uint32_t agent, std::uint32_t step) const;
  double increment(std::uint64_t path, std::uint32_t agent, std::uint32_t step) const {
    return sqrt_dt_ * standard_normal(path, agent, step);
  }

 private:
  std::uint64_t seed_;
  double dt_;
  double sqrt_dt_;
};

// SplitMix64 finalizer, used to derive independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace mflqg
