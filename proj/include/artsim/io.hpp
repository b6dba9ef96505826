#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace artsim::io {

inline void write_bytes(std::ostream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  if (!out) throw std::runtime_error("write failed");
}

inline void read_bytes(std::istream& in, void* p, std::size_t n, const char* what) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw std::runtime_error(std::string("truncated input while reading ") + what);
}

inline void write_u32_le(std::ostream& out, std::uint32_t v) {
  std::array<unsigned char, 4> b;
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  write_bytes(out, b.data(), b.size());
}

inline void write_u64_le(std::ostream& out, std::uint64_t v) {
  std::array<unsigned char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  write_bytes(out, b.data(), b.size());
}

inline void write_f32_le(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32_le(out, bits);
}

inline std::uint32_t read_u32_le(std::istream& in, const char* what) {
  std::array<unsigned char, 4> b;
  read_bytes(in, b.data(), b.size(), what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline std::uint64_t read_u64_le(std::istream& in, const char* what) {
  std::array<unsigned char, 8> b;
  read_bytes(in, b.data(), b.size(), what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline float read_f32_le(std::istream& in, const char* what) {
  std::uint32_t bits = read_u32_le(in, what);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

inline void write_magic(std::ostream& out, const char (&magic)[5]) {
  write_bytes(out, magic, 4);
}

inline void expect_magic(std::istream& in, const char (&magic)[5], const char* format_name) {
  char got[4];
  read_bytes(in, got, 4, "magic");
  if (std::memcmp(got, magic, 4) != 0)
    throw std::runtime_error(std::string(format_name) + ": bad magic, expected '" + magic + "'");
}

}  // namespace artsim::io
