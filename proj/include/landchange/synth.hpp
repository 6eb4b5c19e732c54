#pragma once

// Seeded synthetic scenes with planted class and transition layouts.
//
// Band values are class_mean[truth][band] + sigma[band] * N(0, 1), drawn in
// row-major pixel order with bands innermost, so a seed fixes every bit.

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "landchange/error.hpp"
#include "landchange/raster.hpp"
#include "landchange/rng.hpp"
#include "landchange/samples.hpp"

namespace landchange::synth {

/// Disk in pixel-index space: cell (r, c) is inside iff
/// (r - row)^2 + (c - col)^2 <= radius^2.
struct Disk {
  double row = 0.0;
  double col = 0.0;
  double radius = 0.0;
  std::uint8_t code = 0;
};

/// Background code with disks painted over it in order.
struct DiskLayout {
  std::uint8_t background = 0;
  std::vector<Disk> disks;
};

/// Either a parametric layout or an explicit per-pixel code grid.
using Layout = std::variant<DiskLayout, std::vector<std::uint8_t>>;

struct SceneSpec {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t band_count = 0;
  std::array<std::vector<double>, 2> class_means;  // [class][band]
  std::vector<double> class_sigma;                 // [band]
  GeoTransform geotransform;
  Layout layout = DiskLayout{};
  std::uint64_t seed = 0;

  void validate() const {
    if (width == 0 || height == 0 || band_count == 0) {
      throw ValidationError("scene spec needs positive width, height and band count");
    }
    detail::checked_area(width, height, band_count);
    for (std::size_t c = 0; c < 2; ++c) {
      if (class_means[c].size() != band_count) {
        throw ValidationError(detail::concat("class_means[", c, "] has ", class_means[c].size(), " entries, expected ",
                                             band_count));
      }
    }
    if (class_sigma.size() != band_count) {
      throw ValidationError(detail::concat("class_sigma has ", class_sigma.size(), " entries, expected ", band_count));
    }
    for (double s : class_sigma) {
      if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("class_sigma entries must be finite and >= 0");
    }
    geotransform.validate();
  }
};

/// Rasterizes a layout to one code per pixel; every code must be <= max_code.
inline std::vector<std::uint8_t> paint(const Layout& layout, std::size_t width, std::size_t height,
                                       std::uint8_t max_code) {
  std::vector<std::uint8_t> codes;
  if (const auto* grid = std::get_if<std::vector<std::uint8_t>>(&layout)) {
    if (grid->size() != width * height) {
      throw ValidationError(detail::concat("layout grid has ", grid->size(), " cells, expected ", width * height));
    }
    codes = *grid;
  } else {
    const auto& disks = std::get<DiskLayout>(layout);
    codes.assign(width * height, disks.background);
    for (const auto& d : disks.disks) {
      const double r2 = d.radius * d.radius;
      for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
          const double dr = static_cast<double>(r) - d.row;
          const double dc = static_cast<double>(c) - d.col;
          if (dr * dr + dc * dc <= r2) codes[r * width + c] = d.code;
        }
      }
    }
  }
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] > max_code) {
      throw ValidationError(detail::concat("layout code ", int(codes[i]), " at row ", i / width, ", col ", i % width,
                                           " exceeds ", int(max_code)));
    }
  }
  return codes;
}

namespace detail {

inline Raster draw_scene(const SceneSpec& spec, const std::vector<std::uint8_t>& truth, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = spec.width * spec.height;
  std::vector<float> data(n * spec.band_count);
  for (std::size_t p = 0; p < n; ++p) {
    const auto& means = spec.class_means[truth[p]];
    for (std::size_t b = 0; b < spec.band_count; ++b) {
      const double g = rng.gaussian();
      data[b * n + p] = static_cast<float>(means[b] + spec.class_sigma[b] * g);
    }
  }
  return Raster(spec.width, spec.height, spec.band_count, spec.geotransform, std::nullopt, std::move(data));
}

}  // namespace detail

struct Scene {
  Raster raster;
  ByteMap truth;
};

inline Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  auto truth = paint(spec.layout, spec.width, spec.height, 1);
  Raster raster = detail::draw_scene(spec, truth, spec.seed);
  return {std::move(raster), ByteMap(spec.width, spec.height, spec.geotransform, MapKind::classmap, std::move(truth))};
}

struct ChangePair {
  Raster old_scene;
  Raster new_scene;
  ByteMap old_truth;
  ByteMap new_truth;
  ByteMap change_truth;
};

/// Decodes a transition plan (codes 0-3) into two truth maps and draws the
/// scenes from substreams seeded with seed and seed + 1.
inline ChangePair generate_change_pair(const SceneSpec& spec, const Layout& plan) {
  spec.validate();
  auto codes = paint(plan, spec.width, spec.height, 3);
  std::vector<std::uint8_t> old_truth(codes.size()), new_truth(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    old_truth[i] = codes[i] / 2;
    new_truth[i] = codes[i] % 2;
  }
  Raster old_scene = detail::draw_scene(spec, old_truth, spec.seed);
  Raster new_scene = detail::draw_scene(spec, new_truth, spec.seed + 1);
  const auto& gt = spec.geotransform;
  return {std::move(old_scene), std::move(new_scene),
          ByteMap(spec.width, spec.height, gt, MapKind::classmap, std::move(old_truth)),
          ByteMap(spec.width, spec.height, gt, MapKind::classmap, std::move(new_truth)),
          ByteMap(spec.width, spec.height, gt, MapKind::changemap, std::move(codes))};
}

/// Draws `per_class` distinct pixels of each class from a truth map and
/// returns them as labeled points at the cell centres (class 0 first).
inline std::vector<LabeledFeature> sample_points(const ByteMap& truth, std::size_t per_class, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledFeature> out;
  const auto codes = truth.codes();
  for (int label : {kNonUrban, kUrban}) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < codes.size(); ++i) {
      if (codes[i] == label) pool.push_back(i);
    }
    if (pool.size() < per_class) {
      throw ValidationError(landchange::detail::concat("truth map has ", pool.size(), " pixels of class ", label,
                                                       ", cannot draw ", per_class));
    }
    for (std::size_t k = 0; k < per_class; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(rng.below(pool.size() - k));
      std::swap(pool[k], pool[j]);
      const std::size_t p = pool[k];
      const auto [x, y] = truth.geotransform().pixel_to_world(static_cast<double>(p % truth.width()) + 0.5,
                                                              static_cast<double>(p / truth.width()) + 0.5);
      out.push_back({Point{x, y}, label});
    }
  }
  return out;
}

// --- JSON ------------------------------------------------------------------------

inline DiskLayout disk_layout_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("layout must be {\"background\": code, \"disks\": [...]}");
  DiskLayout layout;
  layout.background = j.value("background", std::uint8_t{0});
  for (const auto& d : j.value("disks", nlohmann::json::array())) {
    if (!d.is_object() || !d.contains("row") || !d.contains("col") || !d.contains("radius") || !d.contains("code")) {
      throw ValidationError("disk needs \"row\", \"col\", \"radius\" and \"code\"");
    }
    layout.disks.push_back({d.at("row").get<double>(), d.at("col").get<double>(), d.at("radius").get<double>(),
                            d.at("code").get<std::uint8_t>()});
  }
  return layout;
}

/// Reads the scene part of a spec; "layout"/"transitions" are handled by the caller.
inline SceneSpec scene_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("scene spec must be a JSON object");
  try {
    SceneSpec spec;
    spec.width = j.at("width").get<std::size_t>();
    spec.height = j.at("height").get<std::size_t>();
    spec.band_count = j.at("bands").get<std::size_t>();
    const auto& means = j.at("class_means");
    if (!means.is_array() || means.size() != 2) throw ValidationError("class_means must hold two per-band arrays");
    spec.class_means = {means[0].get<std::vector<double>>(), means[1].get<std::vector<double>>()};
    spec.class_sigma = j.at("class_sigma").get<std::vector<double>>();
    spec.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("geotransform")) {
      spec.geotransform = GeoTransform::from_array(j.at("geotransform").get<std::array<double, 6>>());
    }
    if (j.contains("layout")) spec.layout = disk_layout_from_json(j.at("layout"));
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(landchange::detail::concat("invalid scene spec: ", e.what()));
  }
}

}  // namespace landchange::synth
