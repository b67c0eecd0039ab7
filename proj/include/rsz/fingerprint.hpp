#ifndef RSZ_FINGERPRINT_HPP
#define RSZ_FINGERPRINT_HPP

#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "rsz/grid.hpp"
#include "rsz/layout.hpp"

namespace rsz {

using Fingerprint = std::array<std::uint8_t, 32>;

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& v, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) v.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

inline void put_u64(std::vector<std::uint8_t>& v, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) v.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

inline void put_f64(std::vector<std::uint8_t>& v, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  put_u64(v, bits);
}

// FNV-1a over a domain-tag byte plus the payload
inline std::uint64_t fnv1a(std::uint8_t tag, const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&](std::uint8_t b) {
    h ^= b;
    h *= 1099511628211ULL;
  };
  mix(tag);
  for (auto b : bytes) mix(b);
  return h;
}

}  // namespace detail

// Content identity of the discrete problem the compressed maps belong to.
// Four 8-byte FNV-1a hashes: grid, media, layout, and the three combined.
// Keeping the components separate lets a mismatch name what changed.
inline Fingerprint config_fingerprint(const GridSpec& g, const MediaField& m, const Layout& l) {
  std::vector<std::uint8_t> gb, mb, lb;
  detail::put_f64(gb, g.lx);
  detail::put_f64(gb, g.ly);
  detail::put_f64(gb, g.h);
  detail::put_u32(gb, static_cast<std::uint32_t>(g.nx));
  detail::put_u32(gb, static_cast<std::uint32_t>(g.ny));

  detail::put_u32(mb, m.kind == MediaField::Kind::builtin_oscillatory ? 0u : 1u);
  if (m.kind == MediaField::Kind::builtin_oscillatory) {
    detail::put_f64(mb, m.epsilon);
  } else {
    detail::put_u32(mb, static_cast<std::uint32_t>(m.cells_x));
    detail::put_u32(mb, static_cast<std::uint32_t>(m.cells_y));
    detail::put_f64(mb, m.x0);
    detail::put_f64(mb, m.y0);
    detail::put_f64(mb, m.x1);
    detail::put_f64(mb, m.y1);
    for (double c : m.cells) detail::put_f64(mb, c);
  }

  detail::put_u32(lb, static_cast<std::uint32_t>(l.n_patches));
  detail::put_u32(lb, static_cast<std::uint32_t>(l.w_cells));
  detail::put_u32(lb, static_cast<std::uint32_t>(l.s_cells));

  std::vector<std::uint8_t> all = gb;
  all.insert(all.end(), mb.begin(), mb.end());
  all.insert(all.end(), lb.begin(), lb.end());

  std::uint64_t parts[4] = {detail::fnv1a(0, gb), detail::fnv1a(1, mb), detail::fnv1a(2, lb),
                            detail::fnv1a(3, all)};
  Fingerprint fp{};
  for (int q = 0; q < 4; ++q)
    for (int i = 0; i < 8; ++i)
      fp[q * 8 + i] = static_cast<std::uint8_t>(parts[q] >> (8 * i));
  return fp;
}

inline std::string fingerprint_hex(const Fingerprint& fp) {
  static const char* d = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (auto b : fp) {
    s.push_back(d[b >> 4]);
    s.push_back(d[b & 15]);
  }
  return s;
}

// Human-readable account of which configuration component disagrees.
inline std::string fingerprint_mismatch_detail(const Fingerprint& have, const Fingerprint& want) {
  auto quad_differs = [&](int q) {
    return !std::equal(have.begin() + 8 * q, have.begin() + 8 * (q + 1), want.begin() + 8 * q);
  };
  std::string out;
  const char* names[3] = {"grid", "media", "layout"};
  for (int q = 0; q < 3; ++q)
    if (quad_differs(q)) {
      if (!out.empty()) out += ", ";
      out += names[q];
    }
  if (out.empty() && quad_differs(3)) out = "combined hash";
  if (out.empty()) return "fingerprints match";
  return out + " parameters differ";
}

}  // namespace rsz

#endif
