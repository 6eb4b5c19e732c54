#pragma once

// Scene and map containers: a JSON header plus a raw little-endian sidecar.

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "landchange/error.hpp"
#include "landchange/raster.hpp"

namespace landchange {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace io {

inline std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(detail::concat("cannot open ", path.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(detail::concat("read failed: ", path.string()));
  return bytes;
}

inline std::string read_text(const fs::path& path) {
  const auto bytes = read_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

inline void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(detail::concat("cannot open for writing ", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(detail::concat("write failed: ", path.string()));
}

inline void write_text(const fs::path& path, const std::string& text) {
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

/// Parses a JSON document, reporting syntax errors against `origin`.
inline json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(detail::concat("malformed JSON in ", origin, ": ", e.what()));
  }
}

inline json read_json(const fs::path& path) { return parse_json(read_text(path), path.string()); }

/// Deterministic pretty-printed form used for every JSON file we emit.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline void write_json(const fs::path& path, const json& j) { write_text(path, dump(j)); }

}  // namespace io

namespace detail {

inline fs::path sidecar_path(const fs::path& header_path) {
  fs::path p = header_path;
  p.replace_extension(".bin");
  return p;
}

inline std::size_t positive_int(const json& h, const char* key, const std::string& origin) {
  if (!h.contains(key)) throw ValidationError(concat(origin, ": header is missing \"", key, "\""));
  const json& v = h.at(key);
  if (!v.is_number_integer()) throw ValidationError(concat(origin, ": \"", key, "\" must be an integer"));
  const auto n = v.get<std::int64_t>();
  if (n <= 0) throw ValidationError(concat(origin, ": \"", key, "\" must be positive, got ", n));
  return static_cast<std::size_t>(n);
}

inline void expect_string(const json& h, const char* key, const char* expected, const std::string& origin) {
  if (!h.contains(key) || !h.at(key).is_string() || h.at(key).get<std::string>() != expected) {
    throw ValidationError(concat(origin, ": header \"", key, "\" must be \"", expected, "\""));
  }
}

inline GeoTransform read_geotransform(const json& h, const std::string& origin) {
  if (!h.contains("geotransform") || !h.at("geotransform").is_array() || h.at("geotransform").size() != 6) {
    throw ValidationError(concat(origin, ": \"geotransform\" must be an array of 6 numbers"));
  }
  std::array<double, 6> c{};
  for (std::size_t i = 0; i < 6; ++i) {
    const json& v = h.at("geotransform").at(i);
    if (!v.is_number()) throw ValidationError(concat(origin, ": geotransform[", i, "] is not a number"));
    c[i] = v.get<double>();
  }
  return GeoTransform::from_array(c);
}

inline fs::path resolve_data_path(const json& h, const fs::path& header_path) {
  if (!h.contains("data") || !h.at("data").is_string()) {
    throw ValidationError(concat(header_path.string(), ": header \"data\" must be a path string"));
  }
  fs::path data = h.at("data").get<std::string>();
  return data.is_absolute() ? data : header_path.parent_path() / data;
}

inline json base_header(std::size_t width, std::size_t height, std::size_t bands, const char* dtype,
                        const GeoTransform& gt, const fs::path& data_path) {
  json h;
  h["width"] = width;
  h["height"] = height;
  h["bands"] = bands;
  h["dtype"] = dtype;
  h["layout"] = "band-sequential";
  h["byte_order"] = "little-endian";
  h["geotransform"] = gt.to_array();
  h["data"] = data_path.filename().string();
  return h;
}

}  // namespace detail

/// Writes `<stem>.json` (header) and `<stem>.bin` (float32 LE payload) side by side.
inline void write_scene(const Raster& raster, const fs::path& header_path) {
  const fs::path data_path = detail::sidecar_path(header_path);
  json h = detail::base_header(raster.width(), raster.height(), raster.band_count(), "float32",
                               raster.geotransform(), data_path);
  if (raster.nodata()) h["nodata"] = *raster.nodata();

  std::vector<std::uint8_t> bytes;
  bytes.reserve(raster.data().size() * 4);
  for (float v : raster.data()) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int k = 0; k < 4; ++k) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
  }
  io::write_bytes(data_path, bytes);
  io::write_json(header_path, h);
}

inline Raster read_scene(const fs::path& header_path) {
  const std::string origin = header_path.string();
  const json h = io::read_json(header_path);
  if (!h.is_object()) throw ValidationError(origin + ": header must be a JSON object");
  const auto width = detail::positive_int(h, "width", origin);
  const auto height = detail::positive_int(h, "height", origin);
  const auto bands = detail::positive_int(h, "bands", origin);
  detail::expect_string(h, "dtype", "float32", origin);
  detail::expect_string(h, "layout", "band-sequential", origin);
  detail::expect_string(h, "byte_order", "little-endian", origin);
  const GeoTransform gt = detail::read_geotransform(h, origin);
  std::optional<double> nodata;
  if (h.contains("nodata")) {
    if (!h.at("nodata").is_number()) throw ValidationError(origin + ": \"nodata\" must be a number");
    nodata = h.at("nodata").get<double>();
  }

  const fs::path data_path = detail::resolve_data_path(h, header_path);
  const auto bytes = io::read_bytes(data_path);
  const std::size_t count = detail::checked_area(width, height, bands);
  if (bytes.size() != count * 4) {
    throw ValidationError(detail::concat(data_path.string(), ": size mismatch, expected ", count * 4,
                                         " bytes for ", width, "x", height, "x", bands, " float32, found ",
                                         bytes.size()));
  }
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(bytes[4 * i + k]) << (8 * k);
    data[i] = std::bit_cast<float>(bits);
  }
  try {
    return Raster(width, height, bands, gt, nodata, std::move(data));
  } catch (const ValidationError& e) {
    throw ValidationError(origin + ": " + e.what());
  }
}

inline void write_bytemap(const ByteMap& map, const fs::path& header_path) {
  const fs::path data_path = detail::sidecar_path(header_path);
  json h = detail::base_header(map.width(), map.height(), 1, "uint8", map.geotransform(), data_path);
  h["kind"] = to_string(map.kind());
  h["nodata"] = kNodataCode;
  io::write_bytes(data_path, map.codes());
  io::write_json(header_path, h);
}

/// Reads a map and rejects any code outside the domain of its declared kind.
inline ByteMap read_bytemap(const fs::path& header_path) {
  const std::string origin = header_path.string();
  const json h = io::read_json(header_path);
  if (!h.is_object()) throw ValidationError(origin + ": header must be a JSON object");
  const auto width = detail::positive_int(h, "width", origin);
  const auto height = detail::positive_int(h, "height", origin);
  const auto bands = detail::positive_int(h, "bands", origin);
  if (bands != 1) throw ValidationError(detail::concat(origin, ": map must have 1 band, found ", bands));
  detail::expect_string(h, "dtype", "uint8", origin);
  detail::expect_string(h, "layout", "band-sequential", origin);
  detail::expect_string(h, "byte_order", "little-endian", origin);
  if (!h.contains("kind") || !h.at("kind").is_string()) {
    throw ValidationError(origin + ": header \"kind\" must be \"classmap\" or \"changemap\"");
  }
  MapKind kind;
  try {
    kind = map_kind_from_string(h.at("kind").get<std::string>());
  } catch (const ValidationError& e) {
    throw ValidationError(origin + ": " + e.what());
  }
  if (h.contains("nodata") && !(h.at("nodata").is_number() && h.at("nodata").get<double>() == kNodataCode)) {
    throw ValidationError(origin + ": map nodata must be 255");
  }
  const GeoTransform gt = detail::read_geotransform(h, origin);

  const fs::path data_path = detail::resolve_data_path(h, header_path);
  auto bytes = io::read_bytes(data_path);
  if (bytes.size() != width * height) {
    throw ValidationError(detail::concat(data_path.string(), ": size mismatch, expected ", width * height,
                                         " bytes, found ", bytes.size()));
  }
  try {
    ByteMap map(width, height, gt, kind, std::move(bytes));
    map.validate_codes();
    return map;
  } catch (const ValidationError& e) {
    throw ValidationError(origin + ": " + e.what());
  }
}

}  // namespace landchange
