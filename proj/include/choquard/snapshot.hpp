#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "choquard/field.hpp"

namespace choquard {

// Binary snapshot: fixed 64-byte header (magic "CHQF", version u32, dim u32,
// n u32, L f64, payload kind u8, zero padding), then row-major little-endian
// f64 pairs (re, im) for complex payloads or f64 singletons for real ones.

inline constexpr std::uint32_t kSnapshotVersion = 1;

inline void write_snapshot(const std::string& path, const ScalarField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("snapshot: cannot open " + path);
  char header[64] = {0};
  std::memcpy(header, "CHQF", 4);
  const std::uint32_t version = kSnapshotVersion;
  const std::uint32_t dim = static_cast<std::uint32_t>(f.grid.dim);
  const std::uint32_t n = static_cast<std::uint32_t>(f.grid.n);
  const double L = f.grid.L;
  const std::uint8_t kind = f.is_real() ? 0 : 1;
  std::memcpy(header + 4, &version, 4);
  std::memcpy(header + 8, &dim, 4);
  std::memcpy(header + 12, &n, 4);
  std::memcpy(header + 16, &L, 8);
  std::memcpy(header + 24, &kind, 1);
  os.write(header, sizeof(header));
  if (f.is_real()) {
    for (const auto& z : f.data) {
      const double re = z.real();
      os.write(reinterpret_cast<const char*>(&re), 8);
    }
  } else {
    for (const auto& z : f.data) {
      const double re = z.real(), im = z.imag();
      os.write(reinterpret_cast<const char*>(&re), 8);
      os.write(reinterpret_cast<const char*>(&im), 8);
    }
  }
  if (!os) throw std::runtime_error("snapshot: write failed for " + path);
}

inline ScalarField read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("snapshot: cannot open " + path);
  char header[64];
  is.read(header, sizeof(header));
  if (!is || std::memcmp(header, "CHQF", 4) != 0)
    throw std::runtime_error("snapshot: bad magic in " + path);
  std::uint32_t version, dim, n;
  double L;
  std::uint8_t kind;
  std::memcpy(&version, header + 4, 4);
  std::memcpy(&dim, header + 8, 4);
  std::memcpy(&n, header + 12, 4);
  std::memcpy(&L, header + 16, 8);
  std::memcpy(&kind, header + 24, 1);
  if (version != kSnapshotVersion)
    throw std::runtime_error("snapshot: unsupported version in " + path);
  auto g = GridSpec::make(static_cast<int>(dim), static_cast<int>(n), L);
  ScalarField f = ScalarField::zeros(
      g, kind == 0 ? PayloadKind::Real : PayloadKind::Complex);
  for (auto& z : f.data) {
    double re = 0.0, im = 0.0;
    is.read(reinterpret_cast<char*>(&re), 8);
    if (kind != 0) is.read(reinterpret_cast<char*>(&im), 8);
    z = {re, im};
  }
  if (!is) throw std::runtime_error("snapshot: truncated payload in " + path);
  return f;
}

}  // namespace choquard
