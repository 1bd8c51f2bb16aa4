#include "mflqg/noise.hpp"

#include <cmath>
#include <numbers>

namespace mflqg {

namespace {
constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}
}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

NoiseBank::NoiseBank(std::uint64_t seed, double dt) : seed_(seed), dt_(dt), sqrt_dt_(std::sqrt(dt)) {}

double NoiseBank::standard_normal(std::uint64_t path, std::uint32_t agent, std::uint32_t step) const {
  const auto r = philox4x32({step, agent, static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)},
                            {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
  const std::uint64_t a = (static_cast<std::uint64_t>(r[0]) << 32 | r[1]) >> 11;
  const std::uint64_t b = (static_cast<std::uint64_t>(r[2]) << 32 | r[3]) >> 11;
  constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
  const double u1 = (static_cast<double>(a) + 1.0) * scale;  // (0, 1]
  const double u2 = static_cast<double>(b) * scale;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace mflqg
