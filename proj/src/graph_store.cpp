#include "molpack/graph_store.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <mutex>

#include "molpack/error.hpp"

namespace molpack {
namespace {

constexpr std::array<std::uint8_t, 4> kRecordMagic = {'M', 'P', 'K', '1'};
constexpr std::array<std::uint8_t, 4> kLabelMagic = {'M', 'P', 'L', '1'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 4 + 8;
constexpr std::size_t kLabelExtensionBytes = 4 + 8;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof(bits));
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return static_cast<std::uint32_t>(bytes[offset]) |
         static_cast<std::uint32_t>(bytes[offset + 1]) << 8 |
         static_cast<std::uint32_t>(bytes[offset + 2]) << 16 |
         static_cast<std::uint32_t>(bytes[offset + 3]) << 24;
}

double get_f64(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
  double v = 0.0;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

std::size_t record_size(std::size_t atoms, std::size_t edges) {
  return kHeaderBytes + atoms * (1 + 3 * 8) + edges * (2 * 4 + 8) + 4;
}

const std::array<std::uint32_t, 256>& crc_table() {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int bit = 0; bit < 8; ++bit) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  return table;
}

}  // namespace

std::uint32_t crc32_ieee(std::span<const std::uint8_t> bytes) {
  const auto& table = crc_table();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::uint8_t b : bytes) crc = table[(crc ^ b) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

std::vector<std::uint8_t> encode_graph_record(const MolecularGraph& graph) {
  graph.validate();
  const std::size_t n = graph.node_count();
  const std::size_t e = graph.edge_count();
  std::vector<std::uint8_t> out;
  out.reserve(record_size(n, e));
  out.insert(out.end(), kRecordMagic.begin(), kRecordMagic.end());
  put_u32(out, static_cast<std::uint32_t>(record_size(n, e)));
  put_u32(out, static_cast<std::uint32_t>(n));
  put_u32(out, static_cast<std::uint32_t>(e));
  put_f64(out, graph.r_cut);
  for (auto z : graph.molecule.atomic_numbers) out.push_back(static_cast<std::uint8_t>(z));
  for (const Vec3& p : graph.molecule.positions) {
    put_f64(out, p[0]);
    put_f64(out, p[1]);
    put_f64(out, p[2]);
  }
  for (const Edge& edge : graph.edges) {
    put_u32(out, static_cast<std::uint32_t>(edge.target));
    put_u32(out, static_cast<std::uint32_t>(edge.source));
  }
  for (double d : graph.distances) put_f64(out, d);
  put_u32(out, crc32_ieee(out));
  return out;
}

MolecularGraph decode_graph_record(std::span<const std::uint8_t> bytes, std::string id) {
  if (bytes.size() < kHeaderBytes + 4) {
    throw IntegrityError("graph record '" + id + "': " + std::to_string(bytes.size()) +
                         " bytes is shorter than any valid record");
  }
  if (!std::equal(kRecordMagic.begin(), kRecordMagic.end(), bytes.begin())) {
    throw IntegrityError("graph record '" + id + "': bad magic");
  }
  const std::uint32_t declared = get_u32(bytes, 4);
  const std::uint32_t n = get_u32(bytes, 8);
  const std::uint32_t e = get_u32(bytes, 12);
  if (declared != bytes.size() || declared != record_size(n, e)) {
    throw IntegrityError("graph record '" + id + "': declared length " +
                         std::to_string(declared) + " does not match " +
                         std::to_string(bytes.size()) + " bytes holding " + std::to_string(n) +
                         " atoms and " + std::to_string(e) + " edges");
  }
  const std::uint32_t stored_crc = get_u32(bytes, bytes.size() - 4);
  const std::uint32_t actual_crc = crc32_ieee(bytes.first(bytes.size() - 4));
  if (stored_crc != actual_crc) {
    throw IntegrityError("graph record '" + id + "': checksum mismatch (stored " +
                         std::to_string(stored_crc) + ", computed " +
                         std::to_string(actual_crc) + ")");
  }

  MolecularGraph graph;
  graph.molecule.id = std::move(id);
  graph.r_cut = get_f64(bytes, 16);
  std::size_t off = kHeaderBytes;
  graph.molecule.atomic_numbers.reserve(n);
  for (std::uint32_t a = 0; a < n; ++a) graph.molecule.atomic_numbers.push_back(bytes[off++]);
  graph.molecule.positions.reserve(n);
  for (std::uint32_t a = 0; a < n; ++a) {
    graph.molecule.positions.push_back(
        {get_f64(bytes, off), get_f64(bytes, off + 8), get_f64(bytes, off + 16)});
    off += 24;
  }
  graph.edges.reserve(e);
  for (std::uint32_t i = 0; i < e; ++i) {
    Edge edge;
    edge.target = static_cast<std::int32_t>(get_u32(bytes, off));
    edge.source = static_cast<std::int32_t>(get_u32(bytes, off + 4));
    graph.edges.push_back(edge);
    off += 8;
  }
  graph.distances.reserve(e);
  for (std::uint32_t i = 0; i < e; ++i) {
    graph.distances.push_back(get_f64(bytes, off));
    off += 8;
  }
  graph.validate();
  return graph;
}

void write_graph_file(const std::filesystem::path& path, const MolecularGraph& graph) {
  std::vector<std::uint8_t> bytes = encode_graph_record(graph);
  if (graph.molecule.label) {
    bytes.insert(bytes.end(), kLabelMagic.begin(), kLabelMagic.end());
    put_f64(bytes, *graph.molecule.label);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to '" + path.string() + "'");
}

MolecularGraph read_graph_file(const std::filesystem::path& path, std::string id) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw NotFoundError("no graph file at '" + path.string() + "'");
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::uint8_t> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw Error("short read from '" + path.string() + "'");

  std::span<const std::uint8_t> all(bytes);
  if (all.size() < 8) throw IntegrityError("graph file '" + path.string() + "' is truncated");
  const std::uint32_t record_len = get_u32(all, 4);
  if (record_len > all.size()) {
    throw IntegrityError("graph file '" + path.string() + "' is shorter than its record");
  }
  MolecularGraph graph = decode_graph_record(all.first(record_len), std::move(id));

  std::span<const std::uint8_t> rest = all.subspan(record_len);
  if (rest.size() == kLabelExtensionBytes &&
      std::equal(kLabelMagic.begin(), kLabelMagic.end(), rest.begin())) {
    graph.molecule.label = get_f64(rest, 4);
  } else if (!rest.empty()) {
    throw IntegrityError("graph file '" + path.string() + "' carries " +
                         std::to_string(rest.size()) + " unrecognized trailing bytes");
  }
  return graph;
}

GraphStore::GraphStore(std::filesystem::path directory) : directory_(std::move(directory)) {
  std::filesystem::create_directories(directory_);
}

std::filesystem::path GraphStore::file_for(const std::string& id) const {
  if (id.empty()) throw ConsistencyError("graph id must not be empty");
  std::string name;
  name.reserve(id.size());
  for (char c : id) {
    const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    name.push_back(safe ? c : '_');
  }
  return directory_ / (name + ".mpk");
}

void GraphStore::put(const MolecularGraph& graph) {
  const std::filesystem::path path = file_for(graph.molecule.id);
  std::unique_lock lock(mutex_);
  write_graph_file(path, graph);
  disk_writes_.fetch_add(1, std::memory_order_relaxed);
  cache_[graph.molecule.id] = graph;
}

MolecularGraph GraphStore::get(const std::string& id) const {
  {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(id);
    if (it != cache_.end()) {
      cache_hits_.fetch_add(1, std::memory_order_relaxed);
      return it->second;
    }
  }
  cache_misses_.fetch_add(1, std::memory_order_relaxed);
  MolecularGraph graph = read_graph_file(file_for(id), id);
  disk_reads_.fetch_add(1, std::memory_order_relaxed);
  std::unique_lock lock(mutex_);
  auto [it, inserted] = cache_.try_emplace(id, std::move(graph));
  return it->second;
}

GraphStore::Counters GraphStore::counters() const {
  Counters c;
  c.cache_hits = cache_hits_.load(std::memory_order_relaxed);
  c.cache_misses = cache_misses_.load(std::memory_order_relaxed);
  c.disk_reads = disk_reads_.load(std::memory_order_relaxed);
  c.disk_writes = disk_writes_.load(std::memory_order_relaxed);
  return c;
}

}  // namespace molpack
