#pragma once

// Minimal 8-bit RGB PNG encoder (no alpha, no interlace, filter 0).

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "landchange/error.hpp"

namespace landchange::png {

using Rgb = std::array<std::uint8_t, 3>;

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_chunk(std::vector<std::uint8_t>& out, std::string_view type, const std::vector<std::uint8_t>& body) {
  put_u32(out, static_cast<std::uint32_t>(body.size()));
  const std::size_t start = out.size();
  out.insert(out.end(), type.begin(), type.end());
  out.insert(out.end(), body.begin(), body.end());
  const auto crc = crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace detail

/// Encodes packed RGB triples (row-major, 3 * width * height bytes).
inline std::vector<std::uint8_t> encode_rgb(std::uint32_t width, std::uint32_t height,
                                            const std::vector<std::uint8_t>& rgb) {
  if (width == 0 || height == 0) throw ValidationError("PNG dimensions must be positive");
  const std::size_t stride = std::size_t{width} * 3;
  if (rgb.size() != stride * height) throw ValidationError("RGB buffer size does not match image dimensions");

  std::vector<std::uint8_t> raw;
  raw.reserve((stride + 1) * height);
  for (std::uint32_t r = 0; r < height; ++r) {
    raw.push_back(0);  // filter: none
    raw.insert(raw.end(), rgb.begin() + static_cast<std::ptrdiff_t>(r * stride),
               rgb.begin() + static_cast<std::ptrdiff_t>((r + 1) * stride));
  }
  uLongf zsize = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> idat(zsize);
  if (compress2(idat.data(), &zsize, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw IoError("zlib compression failed");
  }
  idat.resize(zsize);

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  std::vector<std::uint8_t> ihdr;
  detail::put_u32(ihdr, width);
  detail::put_u32(ihdr, height);
  ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});  // bit depth 8, colour type RGB
  detail::put_chunk(out, "IHDR", ihdr);
  detail::put_chunk(out, "IDAT", idat);
  detail::put_chunk(out, "IEND", {});
  return out;
}

}  // namespace landchange::png
