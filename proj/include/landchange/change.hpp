#pragma once

// Post-classification comparison: transition code = 2 * old + new.
//   0 non-urban -> non-urban  (green)
//   1 non-urban -> urban      (red, expansion)
//   2 urban -> non-urban      (blue)
//   3 urban -> urban          (purple)
//   255 nodata in either epoch

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "landchange/error.hpp"
#include "landchange/png.hpp"
#include "landchange/raster.hpp"

namespace landchange {

enum class Transition : std::uint8_t {
  stable_non_urban = 0,
  urbanized = 1,
  de_urbanized = 2,
  stable_urban = 3,
};

inline constexpr std::uint8_t transition_code(std::uint8_t old_class, std::uint8_t new_class) noexcept {
  return static_cast<std::uint8_t>(2 * old_class + new_class);
}
inline constexpr std::uint8_t old_class_of(std::uint8_t code) noexcept { return code / 2; }
inline constexpr std::uint8_t new_class_of(std::uint8_t code) noexcept { return code % 2; }

inline const char* transition_name(std::uint8_t code) {
  switch (code) {
    case 0: return "non-urban->non-urban";
    case 1: return "non-urban->urban";
    case 2: return "urban->non-urban";
    case 3: return "urban->urban";
    default: return "nodata";
  }
}

namespace detail {

inline void require_classmap(const ByteMap& m, const char* role) {
  if (m.kind() != MapKind::classmap) throw ValidationError(concat(role, " map is not a classmap"));
  try {
    m.validate_codes();
  } catch (const ValidationError& e) {
    throw ValidationError(concat(role, " map: ", e.what()));
  }
}

}  // namespace detail

inline ByteMap detect_change(const ByteMap& old_map, const ByteMap& new_map) {
  detail::require_classmap(old_map, "old");
  detail::require_classmap(new_map, "new");
  if (old_map.width() != new_map.width() || old_map.height() != new_map.height()) {
    throw ValidationError(detail::concat("map dimensions differ: old ", old_map.width(), "x", old_map.height(),
                                         ", new ", new_map.width(), "x", new_map.height()));
  }
  if (old_map.geotransform() != new_map.geotransform()) throw ValidationError("map geotransforms differ");

  const auto a = old_map.codes();
  const auto b = new_map.codes();
  std::vector<std::uint8_t> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = (a[i] == kNodataCode || b[i] == kNodataCode) ? kNodataCode : transition_code(a[i], b[i]);
  }
  return ByteMap(old_map.width(), old_map.height(), old_map.geotransform(), MapKind::changemap, std::move(out));
}

struct ChangeStats {
  std::array<std::uint64_t, 4> counts{};
  std::uint64_t nodata = 0;
  double cell_area = 0.0;

  std::uint64_t total() const noexcept { return counts[0] + counts[1] + counts[2] + counts[3] + nodata; }
  double area(std::uint8_t code) const { return static_cast<double>(counts.at(code)) * cell_area; }

  /// Merges tallies of disjoint regions that share a cell size.
  ChangeStats& operator+=(const ChangeStats& o) {
    for (std::size_t k = 0; k < 4; ++k) counts[k] += o.counts[k];
    nodata += o.nodata;
    return *this;
  }
  friend ChangeStats operator+(ChangeStats a, const ChangeStats& b) { return a += b; }
  friend bool operator==(const ChangeStats&, const ChangeStats&) = default;
};

inline ChangeStats change_stats(const ByteMap& map) {
  if (map.kind() != MapKind::changemap) throw ValidationError("change statistics need a changemap");
  map.validate_codes();
  ChangeStats s;
  s.cell_area = map.geotransform().cell_area();
  for (std::uint8_t c : map.codes()) {
    if (c == kNodataCode) {
      ++s.nodata;
    } else {
      ++s.counts[c];
    }
  }
  return s;
}

inline nlohmann::json stats_to_json(const ChangeStats& s) {
  nlohmann::json transitions = nlohmann::json::array();
  for (std::uint8_t code = 0; code < 4; ++code) {
    transitions.push_back({{"code", code}, {"name", transition_name(code)}, {"pixels", s.counts[code]},
                           {"area", s.area(code)}});
  }
  return {{"transitions", transitions},
          {"nodata_pixels", s.nodata},
          {"total_pixels", s.total()},
          {"cell_area", s.cell_area}};
}

// --- rendering -----------------------------------------------------------------

using Palette = std::map<std::uint8_t, png::Rgb>;

inline Palette default_change_palette() {
  return {{0, {0, 128, 0}}, {1, {255, 0, 0}}, {2, {0, 0, 255}}, {3, {128, 0, 128}}, {kNodataCode, {0, 0, 0}}};
}

inline Palette default_class_palette() { return {{0, {0, 128, 0}}, {1, {200, 200, 200}}, {kNodataCode, {0, 0, 0}}}; }

inline Palette default_palette(MapKind kind) {
  return kind == MapKind::classmap ? default_class_palette() : default_change_palette();
}

/// Applies a {"code": [r, g, b], ...} override on top of `base`.
inline Palette palette_from_json(const nlohmann::json& j, Palette base) {
  if (!j.is_object()) throw ValidationError("palette must be a JSON object of \"code\": [r, g, b]");
  for (const auto& [key, value] : j.items()) {
    int code = -1;
    try {
      std::size_t used = 0;
      code = std::stoi(key, &used);
      if (used != key.size()) code = -1;
    } catch (const std::exception&) {
      code = -1;
    }
    if (code < 0 || code > 255) throw ValidationError(detail::concat("palette key \"", key, "\" is not a code 0-255"));
    if (!value.is_array() || value.size() != 3) {
      throw ValidationError(detail::concat("palette entry ", code, " must be [r, g, b]"));
    }
    png::Rgb rgb{};
    for (std::size_t k = 0; k < 3; ++k) {
      if (!value[k].is_number_unsigned() || value[k].get<unsigned>() > 255) {
        throw ValidationError(detail::concat("palette entry ", code, " channel ", k, " must be 0-255"));
      }
      rgb[k] = static_cast<std::uint8_t>(value[k].get<unsigned>());
    }
    base[static_cast<std::uint8_t>(code)] = rgb;
  }
  return base;
}

/// One RGB pixel per map cell.
inline std::vector<std::uint8_t> render_map(const ByteMap& map, const Palette& palette) {
  std::vector<std::uint8_t> rgb;
  rgb.reserve(map.pixel_count() * 3);
  const auto codes = map.codes();
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const auto it = palette.find(codes[i]);
    if (it == palette.end()) {
      throw ValidationError(detail::concat("no palette entry for code ", int(codes[i]), " at row ", i / map.width(),
                                           ", col ", i % map.width()));
    }
    rgb.insert(rgb.end(), it->second.begin(), it->second.end());
  }
  return png::encode_rgb(static_cast<std::uint32_t>(map.width()), static_cast<std::uint32_t>(map.height()), rgb);
}

inline std::vector<std::uint8_t> render_map(const ByteMap& map) { return render_map(map, default_palette(map.kind())); }

}  // namespace landchange
