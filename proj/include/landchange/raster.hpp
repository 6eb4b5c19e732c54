#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "landchange/error.hpp"

namespace landchange {

/// Affine pixel-to-world mapping in the usual six-coefficient order:
///   x = origin_x + col * pixel_width  + row * row_rotation
///   y = origin_y + col * col_rotation + row * pixel_height
/// A negative pixel_height means north-up.
struct GeoTransform {
  double origin_x = 0.0;
  double pixel_width = 1.0;
  double row_rotation = 0.0;
  double origin_y = 0.0;
  double col_rotation = 0.0;
  double pixel_height = 1.0;

  static GeoTransform from_array(const std::array<double, 6>& c) {
    return {c[0], c[1], c[2], c[3], c[4], c[5]};
  }
  std::array<double, 6> to_array() const {
    return {origin_x, pixel_width, row_rotation, origin_y, col_rotation, pixel_height};
  }

  /// World coordinates of the continuous pixel position (col, row).
  std::pair<double, double> pixel_to_world(double col, double row) const {
    return {origin_x + col * pixel_width + row * row_rotation,
            origin_y + col * col_rotation + row * pixel_height};
  }

  /// Continuous (col, row) position of a world coordinate.
  std::pair<double, double> world_to_pixel(double x, double y) const {
    const double det = pixel_width * pixel_height - row_rotation * col_rotation;
    if (det == 0.0) throw ValidationError("geotransform is not invertible");
    const double dx = x - origin_x;
    const double dy = y - origin_y;
    return {(pixel_height * dx - row_rotation * dy) / det,
            (-col_rotation * dx + pixel_width * dy) / det};
  }

  /// Area of one cell in squared world units.
  double cell_area() const { return std::abs(pixel_width * pixel_height - row_rotation * col_rotation); }

  void validate() const {
    const auto c = to_array();
    for (double v : c) {
      if (!std::isfinite(v)) throw ValidationError("geotransform contains a non-finite coefficient");
    }
    if (!(pixel_width > 0.0)) throw ValidationError("geotransform pixel_width must be > 0");
    if (pixel_height == 0.0) throw ValidationError("geotransform pixel_height must be non-zero");
  }

  friend bool operator==(const GeoTransform&, const GeoTransform&) = default;
};

/// Sub-rectangle of a grid.
struct Window {
  std::size_t row0 = 0;
  std::size_t col0 = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  friend bool operator==(const Window&, const Window&) = default;
};

namespace detail {

inline void check_window(const Window& w, std::size_t width, std::size_t height) {
  if (w.rows == 0 || w.cols == 0) throw BoundsError("window must have positive rows and cols");
  if (w.row0 + w.rows > height || w.row0 + w.rows < w.row0) {
    throw BoundsError(concat("window rows [", w.row0, ", ", w.row0 + w.rows, ") exceed height ", height));
  }
  if (w.col0 + w.cols > width || w.col0 + w.cols < w.col0) {
    throw BoundsError(concat("window cols [", w.col0, ", ", w.col0 + w.cols, ") exceed width ", width));
  }
}

inline GeoTransform shift_origin(const GeoTransform& gt, const Window& w) {
  GeoTransform out = gt;
  auto [x, y] = gt.pixel_to_world(static_cast<double>(w.col0), static_cast<double>(w.row0));
  out.origin_x = x;
  out.origin_y = y;
  return out;
}

inline std::size_t checked_area(std::size_t width, std::size_t height, std::size_t bands) {
  if (width == 0 || height == 0) throw ValidationError("raster dimensions must be positive");
  if (bands == 0) throw ValidationError("band count must be positive");
  // Guard the size_t product used for allocation.
  const std::size_t limit = static_cast<std::size_t>(1) << 40;
  if (width > limit / height || width * height > limit / bands) {
    throw ValidationError(concat("raster of ", width, "x", height, "x", bands, " is too large"));
  }
  return width * height * bands;
}

}  // namespace detail

/// Multiband float32 grid, band-sequential: data[band * w * h + row * w + col].
/// Immutable after construction.
class Raster {
public:
  Raster(std::size_t width, std::size_t height, std::size_t band_count, GeoTransform geotransform,
         std::optional<double> nodata, std::vector<float> data)
      : width_(width),
        height_(height),
        bands_(band_count),
        geotransform_(geotransform),
        nodata_(nodata),
        data_(std::move(data)) {
    const std::size_t expected = detail::checked_area(width, height, band_count);
    if (data_.size() != expected) {
      throw ValidationError(detail::concat("raster data length ", data_.size(), " != width*height*bands = ", expected));
    }
    geotransform_.validate();
    if (nodata_ && !std::isfinite(*nodata_)) throw ValidationError("nodata must be finite");
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t band_count() const noexcept { return bands_; }
  std::size_t pixel_count() const noexcept { return width_ * height_; }
  const GeoTransform& geotransform() const noexcept { return geotransform_; }
  const std::optional<double>& nodata() const noexcept { return nodata_; }
  std::span<const float> data() const noexcept { return data_; }

  std::span<const float> band(std::size_t b) const {
    if (b >= bands_) throw BoundsError(detail::concat("band index ", b, " out of range [0, ", bands_, ")"));
    return std::span<const float>(data_).subspan(b * pixel_count(), pixel_count());
  }

  float get_pixel(std::size_t row, std::size_t col, std::size_t band) const {
    if (row >= height_) throw BoundsError(detail::concat("row index ", row, " out of range [0, ", height_, ")"));
    if (col >= width_) throw BoundsError(detail::concat("col index ", col, " out of range [0, ", width_, ")"));
    if (band >= bands_) throw BoundsError(detail::concat("band index ", band, " out of range [0, ", bands_, ")"));
    return data_[band * pixel_count() + row * width_ + col];
  }

  /// True iff nodata is set and every band of the pixel equals it.
  bool is_masked(std::size_t pixel_index) const noexcept {
    if (!nodata_) return false;
    const float nd = static_cast<float>(*nodata_);
    const std::size_t n = pixel_count();
    for (std::size_t b = 0; b < bands_; ++b) {
      if (data_[b * n + pixel_index] != nd) return false;
    }
    return true;
  }

  /// Copies the band vector of one pixel into `out` (size band_count).
  void pixel_vector(std::size_t pixel_index, std::span<double> out) const noexcept {
    const std::size_t n = pixel_count();
    for (std::size_t b = 0; b < bands_; ++b) out[b] = data_[b * n + pixel_index];
  }

  friend bool operator==(const Raster&, const Raster&) = default;

private:
  std::size_t width_;
  std::size_t height_;
  std::size_t bands_;
  GeoTransform geotransform_;
  std::optional<double> nodata_;
  std::vector<float> data_;
};

enum class MapKind { classmap, changemap };

inline constexpr std::uint8_t kNodataCode = 255;

inline std::string_view to_string(MapKind kind) {
  return kind == MapKind::classmap ? "classmap" : "changemap";
}

inline MapKind map_kind_from_string(std::string_view s) {
  if (s == "classmap") return MapKind::classmap;
  if (s == "changemap") return MapKind::changemap;
  throw ValidationError(detail::concat("unknown map kind \"", s, "\""));
}

inline bool is_legal_code(MapKind kind, std::uint8_t code) noexcept {
  if (code == kNodataCode) return true;
  return kind == MapKind::classmap ? code <= 1 : code <= 3;
}

/// Single-band byte grid of class or transition codes, row-major.
/// Construction checks shape only; validate_codes() checks the code domain,
/// so a corrupt map can still be held and reported on.
class ByteMap {
public:
  ByteMap(std::size_t width, std::size_t height, GeoTransform geotransform, MapKind kind,
          std::vector<std::uint8_t> codes)
      : width_(width), height_(height), geotransform_(geotransform), kind_(kind), codes_(std::move(codes)) {
    const std::size_t expected = detail::checked_area(width, height, 1);
    if (codes_.size() != expected) {
      throw ValidationError(detail::concat("map code length ", codes_.size(), " != width*height = ", expected));
    }
    geotransform_.validate();
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return width_ * height_; }
  const GeoTransform& geotransform() const noexcept { return geotransform_; }
  MapKind kind() const noexcept { return kind_; }
  std::span<const std::uint8_t> codes() const noexcept { return codes_; }

  std::uint8_t at(std::size_t row, std::size_t col) const {
    if (row >= height_) throw BoundsError(detail::concat("row index ", row, " out of range [0, ", height_, ")"));
    if (col >= width_) throw BoundsError(detail::concat("col index ", col, " out of range [0, ", width_, ")"));
    return codes_[row * width_ + col];
  }

  /// Throws on the first code outside the domain of kind(), naming its row/col.
  void validate_codes() const {
    for (std::size_t i = 0; i < codes_.size(); ++i) {
      if (!is_legal_code(kind_, codes_[i])) {
        throw ValidationError(detail::concat("illegal ", to_string(kind_), " code ", int(codes_[i]), " at row ",
                                             i / width_, ", col ", i % width_));
      }
    }
  }

  friend bool operator==(const ByteMap&, const ByteMap&) = default;

private:
  std::size_t width_;
  std::size_t height_;
  GeoTransform geotransform_;
  MapKind kind_;
  std::vector<std::uint8_t> codes_;
};

inline float get_pixel(const Raster& raster, std::size_t row, std::size_t col, std::size_t band) {
  return raster.get_pixel(row, col, band);
}

/// Copies a window out of a raster; the origin moves through the affine.
inline Raster crop(const Raster& raster, const Window& window) {
  detail::check_window(window, raster.width(), raster.height());
  std::vector<float> out;
  out.reserve(window.rows * window.cols * raster.band_count());
  for (std::size_t b = 0; b < raster.band_count(); ++b) {
    const auto band = raster.band(b);
    for (std::size_t r = 0; r < window.rows; ++r) {
      const auto first = band.begin() + static_cast<std::ptrdiff_t>((window.row0 + r) * raster.width() + window.col0);
      out.insert(out.end(), first, first + static_cast<std::ptrdiff_t>(window.cols));
    }
  }
  return Raster(window.cols, window.rows, raster.band_count(), detail::shift_origin(raster.geotransform(), window),
                raster.nodata(), std::move(out));
}

inline ByteMap crop(const ByteMap& map, const Window& window) {
  detail::check_window(window, map.width(), map.height());
  std::vector<std::uint8_t> out;
  out.reserve(window.rows * window.cols);
  const auto codes = map.codes();
  for (std::size_t r = 0; r < window.rows; ++r) {
    const auto first = codes.begin() + static_cast<std::ptrdiff_t>((window.row0 + r) * map.width() + window.col0);
    out.insert(out.end(), first, first + static_cast<std::ptrdiff_t>(window.cols));
  }
  return ByteMap(window.cols, window.rows, detail::shift_origin(map.geotransform(), window), map.kind(),
                 std::move(out));
}

}  // namespace landchange
