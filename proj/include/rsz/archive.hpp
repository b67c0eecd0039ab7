#ifndef RSZ_ARCHIVE_HPP
#define RSZ_ARCHIVE_HPP

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rsz/solver.hpp"

namespace rsz {

// MapArchive: magic "RSWZ1", then one record per map:
//   patch_id u32, m u32, n u32, k u32, seed u64, fingerprint 32 bytes,
//   U (m*k), S (k), V (n*k) as little-endian f64, column-major.
// Records run to end of file.

namespace detail {

inline void le_u32(std::string& b, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>(x >> (8 * i)));
}
inline void le_u64(std::string& b, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<char>(x >> (8 * i)));
}
inline void le_f64(std::string& b, double d) {
  std::uint64_t x;
  std::memcpy(&x, &d, 8);
  le_u64(b, x);
}

struct ByteReader {
  const std::string& b;
  size_t pos = 0;
  bool done() const { return pos >= b.size(); }
  void need(size_t k) {
    if (pos + k > b.size()) throw error(errc::parse_error, "archive truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[pos++])) << (8 * i);
    return x;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[pos++])) << (8 * i);
    return x;
  }
  double f64() {
    std::uint64_t x = u64();
    double d;
    std::memcpy(&d, &x, 8);
    return d;
  }
};

}  // namespace detail

// Atomic write: temp file in the destination directory, then rename.
inline void atomic_write_file(const std::string& path, const std::string& payload) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw error(errc::io_error, "cannot open " + tmp.string() + " for writing");
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw error(errc::io_error, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw error(errc::io_error, "cannot rename into place: " + path);
}

inline void save_maps(const std::string& path, const std::vector<ReducedMap>& maps) {
  std::string b = "RSWZ1";
  for (const auto& m : maps) {
    int rows_u = m.triple.u.rows(), rows_v = m.triple.v.rows(), k = m.triple.rank();
    detail::le_u32(b, static_cast<std::uint32_t>(m.patch_id));
    detail::le_u32(b, static_cast<std::uint32_t>(rows_u));
    detail::le_u32(b, static_cast<std::uint32_t>(rows_v));
    detail::le_u32(b, static_cast<std::uint32_t>(k));
    detail::le_u64(b, m.seed);
    for (auto byte : m.fingerprint) b.push_back(static_cast<char>(byte));
    for (double d : m.triple.u.data()) detail::le_f64(b, d);
    for (double d : m.triple.s) detail::le_f64(b, d);
    for (double d : m.triple.v.data()) detail::le_f64(b, d);
  }
  atomic_write_file(path, b);
}

inline std::vector<ReducedMap> load_maps(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error(errc::io_error, "cannot open archive " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 5 || bytes.compare(0, 5, "RSWZ1") != 0)
    throw error(errc::parse_error, "not a map archive (bad magic)");

  detail::ByteReader r{bytes, 5};
  std::vector<ReducedMap> maps;
  while (!r.done()) {
    ReducedMap m;
    m.patch_id = static_cast<int>(r.u32());
    std::uint64_t mu = r.u32(), nv = r.u32(), k = r.u32();
    if (mu > (1u << 26) || nv > (1u << 26) || k > mu || k > nv)
      throw error(errc::parse_error, "archive record has implausible dimensions");
    m.seed = r.u64();
    r.need(32);
    for (int i = 0; i < 32; ++i)
      m.fingerprint[i] = static_cast<std::uint8_t>(bytes[r.pos++]);
    m.triple.u = Matrix(static_cast<int>(mu), static_cast<int>(k));
    for (auto& d : m.triple.u.data()) d = r.f64();
    m.triple.s.resize(k);
    for (auto& d : m.triple.s) d = r.f64();
    m.triple.v = Matrix(static_cast<int>(nv), static_cast<int>(k));
    for (auto& d : m.triple.v.data()) d = r.f64();
    m.triple.seed = m.seed;
    m.triple.samples = 0;  // sample count is not part of the file format
    m.k = static_cast<int>(k);
    maps.push_back(std::move(m));
  }
  return maps;
}

}  // namespace rsz

#endif
