#pragma once

#include <cstdint>
#include <random>

namespace molpack {

// Deterministic uniform generator.  std::mt19937_64 has a fixed bit stream
// by standard, and the mappings below avoid std::uniform_*_distribution,
// whose output is implementation-defined; the same seed therefore yields the
// same values on every platform.
class UniformRng {
 public:
  explicit UniformRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double range(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [lo, hi] (inclusive).
  std::int64_t range_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(engine_() % span);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace molpack
