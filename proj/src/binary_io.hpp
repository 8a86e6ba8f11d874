#pragma once

// Little-endian integer I/O for the binary artifact formats.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <ostream>

#include "weakmatch/error.hpp"

namespace weakmatch::binio {

template <typename U>
inline void put_le(std::ostream& out, U v) {
  char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, sizeof(U));
}

template <typename U>
inline U get_le(std::istream& in, const std::filesystem::path& path) {
  unsigned char buf[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(U))) {
    throw FormatError(path.string() + ": truncated file");
  }
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

}  // namespace weakmatch::binio
