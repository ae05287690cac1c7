#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "molpack/molecule.hpp"

namespace molpack {

// CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320).
std::uint32_t crc32_ieee(std::span<const std::uint8_t> bytes);

// Binary graph record, little-endian throughout:
//
//   offset 0   "MPK1"
//          4   u32 record length in bytes (magic through checksum)
//          8   u32 atom count n
//          12  u32 edge count e
//          16  f64 r_cut
//          24  n * u8   atomic numbers
//              n * 3 f64 positions
//              e * (u32 target, u32 source)
//              e * f64  distances
//              u32 CRC-32 of every preceding byte of the record
//
// The record itself never changes shape.  A molecule label, when present, is
// appended after the record as a 12-byte extension "MPL1" + f64; readers that
// only understand the record can skip it via the record length field.
std::vector<std::uint8_t> encode_graph_record(const MolecularGraph& graph);

// Decodes a record previously produced by encode_graph_record.  `bytes` must
// span exactly one record.  The record does not store the id; the caller
// supplies it (stores derive it from the file name).
MolecularGraph decode_graph_record(std::span<const std::uint8_t> bytes, std::string id);

// Write/read one graph file: the record plus the optional label extension.
void write_graph_file(const std::filesystem::path& path, const MolecularGraph& graph);
MolecularGraph read_graph_file(const std::filesystem::path& path, std::string id);

// Directory-backed store of molecular graphs with a write-through in-memory
// cache.  Safe for concurrent readers and writers.
class GraphStore {
 public:
  struct Counters {
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
    std::uint64_t disk_reads = 0;
    std::uint64_t disk_writes = 0;
  };

  explicit GraphStore(std::filesystem::path directory);

  // Persists the graph under its molecule id and caches it.
  void put(const MolecularGraph& graph);

  // Returns the graph by id, from cache when possible.  Throws NotFoundError
  // if neither the cache nor the directory has it, IntegrityError if the
  // stored bytes are corrupt.
  MolecularGraph get(const std::string& id) const;

  Counters counters() const;
  const std::filesystem::path& directory() const { return directory_; }

 private:
  std::filesystem::path file_for(const std::string& id) const;

  std::filesystem::path directory_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::string, MolecularGraph> cache_;
  mutable std::atomic<std::uint64_t> cache_hits_{0};
  mutable std::atomic<std::uint64_t> cache_misses_{0};
  mutable std::atomic<std::uint64_t> disk_reads_{0};
  mutable std::atomic<std::uint64_t> disk_writes_{0};
};

}  // namespace molpack
