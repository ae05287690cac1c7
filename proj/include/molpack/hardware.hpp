#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace molpack {

// Tiled machine description used by the cost model, the plan search and the
// partitioned-execution simulator.  Defaults describe one IPU-class chip:
// 1472 tiles, 6 hardware worker threads per tile, 625 KiB of tile-local
// SRAM, f32 data, i32 indices, 64-bit vector units and a 4 byte/cycle
// per-tile exchange.
struct HardwareProfile {
  int num_tiles = 1472;
  int worker_threads = 6;
  int bytes_per_data = 4;
  int bytes_per_index = 4;
  int vector_width_bytes = 8;
  double exchange_bytes_per_cycle = 4.0;
  std::int64_t sram_bytes_per_tile = 640000;  // 625 KiB

  void validate() const;  // throws ConfigError on non-positive values
};

// JSON round trip.  Unknown keys are rejected so that typos in a profile file
// cannot silently fall back to defaults.
HardwareProfile profile_from_json_text(const std::string& text);
std::string profile_to_json_text(const HardwareProfile& profile);
HardwareProfile load_profile(const std::filesystem::path& path);

}  // namespace molpack
