#include "molpack/hardware.hpp"

#include <fstream>

#include <json.hpp>

#include "molpack/error.hpp"

namespace molpack {

using nlohmann::json;

void HardwareProfile::validate() const {
  const auto positive = [](auto v, const char* name) {
    if (v <= 0) throw ConfigError(std::string("hardware profile: ") + name +
                                  " must be positive");
  };
  positive(num_tiles, "num_tiles");
  positive(worker_threads, "worker_threads");
  positive(bytes_per_data, "bytes_per_data");
  positive(bytes_per_index, "bytes_per_index");
  positive(vector_width_bytes, "vector_width_bytes");
  positive(exchange_bytes_per_cycle, "exchange_bytes_per_cycle");
  positive(sram_bytes_per_tile, "sram_bytes_per_tile");
}

HardwareProfile profile_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("hardware profile: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("hardware profile: expected a JSON object");
  HardwareProfile p;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "num_tiles") p.num_tiles = value.get<int>();
      else if (key == "worker_threads") p.worker_threads = value.get<int>();
      else if (key == "bytes_per_data") p.bytes_per_data = value.get<int>();
      else if (key == "bytes_per_index") p.bytes_per_index = value.get<int>();
      else if (key == "vector_width_bytes") p.vector_width_bytes = value.get<int>();
      else if (key == "exchange_bytes_per_cycle") p.exchange_bytes_per_cycle = value.get<double>();
      else if (key == "sram_bytes_per_tile") p.sram_bytes_per_tile = value.get<std::int64_t>();
      else throw ParseError("hardware profile: unknown key '" + key + "'");
    } catch (const json::exception& e) {
      throw ParseError("hardware profile: key '" + key + "': " + e.what());
    }
  }
  p.validate();
  return p;
}

std::string profile_to_json_text(const HardwareProfile& profile) {
  const json j = {
      {"num_tiles", profile.num_tiles},
      {"worker_threads", profile.worker_threads},
      {"bytes_per_data", profile.bytes_per_data},
      {"bytes_per_index", profile.bytes_per_index},
      {"vector_width_bytes", profile.vector_width_bytes},
      {"exchange_bytes_per_cycle", profile.exchange_bytes_per_cycle},
      {"sram_bytes_per_tile", profile.sram_bytes_per_tile},
  };
  return j.dump(2);
}

HardwareProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("no hardware profile at '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return profile_from_json_text(text);
}

}  // namespace molpack
