#pragma once

// Labeled GeoJSON features and per-pixel training-table extraction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "landchange/error.hpp"
#include "landchange/raster.hpp"
#include "landchange/rng.hpp"

namespace landchange {

/// Class codes used throughout: 0 non-urban, 1 urban.
inline constexpr int kNonUrban = 0;
inline constexpr int kUrban = 1;

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Closed outer ring, first vertex repeated last. No holes.
struct Polygon {
  std::vector<Point> ring;
  friend bool operator==(const Polygon&, const Polygon&) = default;
};

struct LabeledFeature {
  std::variant<Point, Polygon> geometry;
  int label = kNonUrban;
  friend bool operator==(const LabeledFeature&, const LabeledFeature&) = default;
};

struct TrainingRow {
  std::vector<double> values;
  int label = kNonUrban;
  friend bool operator==(const TrainingRow&, const TrainingRow&) = default;
};

struct TrainingTable {
  std::size_t feature_count = 0;
  std::vector<TrainingRow> rows;

  std::size_t size() const noexcept { return rows.size(); }
  bool empty() const noexcept { return rows.empty(); }

  std::size_t count_label(int label) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [label](const TrainingRow& r) { return r.label == label; }));
  }

  void validate() const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].values.size() != feature_count) {
        throw ValidationError(detail::concat("table row ", i, " has ", rows[i].values.size(),
                                             " values, expected ", feature_count));
      }
      if (rows[i].label != kNonUrban && rows[i].label != kUrban) {
        throw ValidationError(detail::concat("table row ", i, " has label ", rows[i].label, ", expected 0 or 1"));
      }
    }
  }

  friend bool operator==(const TrainingTable&, const TrainingTable&) = default;
};

namespace detail {

inline Point parse_position(const nlohmann::json& pos, std::size_t index) {
  if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
    throw ValidationError(concat("feature ", index, ": position must be [x, y]"));
  }
  return {pos[0].get<double>(), pos[1].get<double>()};
}

inline LabeledFeature parse_feature(const nlohmann::json& f, std::size_t index) {
  if (!f.is_object() || f.value("type", "") != "Feature") {
    throw ValidationError(concat("feature ", index, ": not a GeoJSON Feature"));
  }
  LabeledFeature out;

  const auto props = f.find("properties");
  if (props == f.end() || !props->is_object() || !props->contains("landcover")) {
    throw ValidationError(concat("feature ", index, ": missing \"landcover\" property"));
  }
  const auto& lc = props->at("landcover");
  if (!lc.is_number_integer()) {
    throw ValidationError(concat("feature ", index, ": \"landcover\" must be an integer"));
  }
  const auto label = lc.get<std::int64_t>();
  if (label != kNonUrban && label != kUrban) {
    throw ValidationError(concat("feature ", index, ": landcover ", label, " outside {0, 1}"));
  }
  out.label = static_cast<int>(label);

  const auto geom = f.find("geometry");
  if (geom == f.end() || !geom->is_object() || !geom->contains("type") || !geom->at("type").is_string()) {
    throw ValidationError(concat("feature ", index, ": missing geometry"));
  }
  const std::string type = geom->at("type").get<std::string>();
  const auto coords = geom->find("coordinates");
  if (coords == geom->end()) throw ValidationError(concat("feature ", index, ": geometry has no coordinates"));

  if (type == "Point") {
    out.geometry = parse_position(*coords, index);
  } else if (type == "Polygon") {
    if (!coords->is_array() || coords->empty()) {
      throw ValidationError(concat("feature ", index, ": polygon has no rings"));
    }
    if (coords->size() > 1) throw ValidationError(concat("feature ", index, ": polygon holes are not supported"));
    Polygon poly;
    for (const auto& pos : coords->at(0)) poly.ring.push_back(parse_position(pos, index));
    if (poly.ring.size() < 4) {
      throw ValidationError(concat("feature ", index, ": polygon ring needs at least 3 vertices plus closure"));
    }
    if (poly.ring.front() != poly.ring.back()) {
      throw ValidationError(concat("feature ", index, ": polygon ring is not closed"));
    }
    out.geometry = std::move(poly);
  } else {
    throw ValidationError(concat("feature ", index, ": unsupported geometry type \"", type, "\""));
  }
  return out;
}

/// Even-odd crossing test against a ray toward +x. Half-open in y, strict in x:
/// centres on a ring's top or left edge count as inside, bottom or right as outside.
inline bool inside_ring(const std::vector<std::pair<double, double>>& ring, double px, double py) {
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const auto [xi, yi] = ring[i];
    const auto [xj, yj] = ring[j];
    if ((yi > py) != (yj > py)) {
      const double x_cross = xi + (py - yi) * (xj - xi) / (yj - yi);
      if (px < x_cross) inside = !inside;
    }
  }
  return inside;
}

}  // namespace detail

/// Parses a FeatureCollection whose features carry an integer "landcover" label.
inline std::vector<LabeledFeature> parse_feature_collection(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(detail::concat("malformed GeoJSON: ", e.what()));
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection") {
    throw ValidationError("GeoJSON document is not a FeatureCollection");
  }
  const auto feats = doc.find("features");
  if (feats == doc.end() || !feats->is_array()) throw ValidationError("FeatureCollection has no \"features\" array");

  std::vector<LabeledFeature> out;
  out.reserve(feats->size());
  for (std::size_t i = 0; i < feats->size(); ++i) out.push_back(detail::parse_feature(feats->at(i), i));
  return out;
}

inline nlohmann::json feature_collection_json(const std::vector<LabeledFeature>& features) {
  using nlohmann::json;
  json fc = {{"type", "FeatureCollection"}, {"features", json::array()}};
  for (const auto& f : features) {
    json geom;
    if (const auto* p = std::get_if<Point>(&f.geometry)) {
      geom = {{"type", "Point"}, {"coordinates", {p->x, p->y}}};
    } else {
      json ring = json::array();
      for (const auto& v : std::get<Polygon>(f.geometry).ring) ring.push_back({v.x, v.y});
      geom = {{"type", "Polygon"}, {"coordinates", json::array({ring})}};
    }
    fc["features"].push_back({{"type", "Feature"}, {"properties", {{"landcover", f.label}}}, {"geometry", geom}});
  }
  return fc;
}

inline std::string serialize_feature_collection(const std::vector<LabeledFeature>& features) {
  return feature_collection_json(features).dump(2) + "\n";
}

/// Extracts one row per sampled pixel: the containing cell for points, every
/// cell whose centre lies inside the ring for polygons. Masked pixels are skipped.
inline TrainingTable sample_raster(const Raster& raster, const std::vector<LabeledFeature>& features) {
  if (features.empty()) throw ValidationError("no features to sample");
  const GeoTransform& gt = raster.geotransform();
  const std::size_t w = raster.width();
  const std::size_t h = raster.height();

  TrainingTable table;
  table.feature_count = raster.band_count();
  auto emit = [&](std::size_t pixel, int label) {
    if (raster.is_masked(pixel)) return;
    TrainingRow row;
    row.values.resize(raster.band_count());
    raster.pixel_vector(pixel, row.values);
    row.label = label;
    table.rows.push_back(std::move(row));
  };

  for (std::size_t fi = 0; fi < features.size(); ++fi) {
    const auto& f = features[fi];
    if (const auto* p = std::get_if<Point>(&f.geometry)) {
      const auto [pc, pr] = gt.world_to_pixel(p->x, p->y);
      const double col = std::floor(pc);
      const double row = std::floor(pr);
      if (!(col >= 0.0 && col < static_cast<double>(w) && row >= 0.0 && row < static_cast<double>(h))) {
        throw ValidationError(detail::concat("feature ", fi, ": point (", p->x, ", ", p->y,
                                             ") lies outside the raster extent"));
      }
      emit(static_cast<std::size_t>(row) * w + static_cast<std::size_t>(col), f.label);
      continue;
    }

    const auto& poly = std::get<Polygon>(f.geometry);
    std::vector<std::pair<double, double>> ring;  // (col, row) in pixel space
    ring.reserve(poly.ring.size());
    double min_c = INFINITY, max_c = -INFINITY, min_r = INFINITY, max_r = -INFINITY;
    for (const auto& v : poly.ring) {
      const auto pr = gt.world_to_pixel(v.x, v.y);
      ring.push_back(pr);
      min_c = std::min(min_c, pr.first);
      max_c = std::max(max_c, pr.first);
      min_r = std::min(min_r, pr.second);
      max_r = std::max(max_r, pr.second);
    }
    // Candidate cells: centres c + 0.5 within [min, max].
    auto first_cell = [](double lo) { return std::max(0.0, std::floor(lo - 0.5)); };
    auto end_cell = [](double hi, std::size_t n) { return std::min(static_cast<double>(n), std::ceil(hi - 0.5) + 1.0); };
    const double c0 = first_cell(min_c), c1 = end_cell(max_c, w);
    const double r0 = first_cell(min_r), r1 = end_cell(max_r, h);

    std::size_t covered = 0;
    for (double r = r0; r < r1; r += 1.0) {
      for (double c = c0; c < c1; c += 1.0) {
        if (detail::inside_ring(ring, c + 0.5, r + 0.5)) {
          ++covered;
          emit(static_cast<std::size_t>(r) * w + static_cast<std::size_t>(c), f.label);
        }
      }
    }
    if (covered == 0) throw ValidationError(detail::concat("feature ", fi, ": polygon covers no pixel centres"));
  }
  return table;
}

/// Stratified, seeded split into (first, second); the first part receives
/// round(train_fraction * n_label) rows of each label.
inline std::pair<TrainingTable, TrainingTable> split_table(const TrainingTable& table, double train_fraction,
                                                           std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError(detail::concat("train_fraction ", train_fraction, " must lie in (0, 1)"));
  }
  Rng rng(seed);
  TrainingTable first{table.feature_count, {}};
  TrainingTable second{table.feature_count, {}};
  for (int label : {kNonUrban, kUrban}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      if (table.rows[i].label == label) idx.push_back(i);
    }
    if (idx.size() < 2) {
      throw ValidationError(detail::concat("label ", label, " has ", idx.size(), " rows; at least 2 are required to split"));
    }
    for (std::size_t i = idx.size() - 1; i > 0; --i) {
      std::swap(idx[i], idx[static_cast<std::size_t>(rng.below(i + 1))]);
    }
    const auto n_first = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(idx.size())));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      (k < n_first ? first : second).rows.push_back(table.rows[idx[k]]);
    }
  }
  return {std::move(first), std::move(second)};
}

/// {"feature_count": n, "rows": [[values..., label], ...]}
inline nlohmann::json table_to_json(const TrainingTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    nlohmann::json row = nlohmann::json::array();
    for (double v : r.values) row.push_back(v);
    row.push_back(r.label);
    rows.push_back(std::move(row));
  }
  return {{"feature_count", table.feature_count}, {"rows", std::move(rows)}};
}

inline TrainingTable table_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("feature_count") || !j.at("feature_count").is_number_unsigned() ||
      !j.contains("rows") || !j.at("rows").is_array()) {
    throw ValidationError("training table must be {\"feature_count\": n, \"rows\": [...]}");
  }
  TrainingTable table;
  table.feature_count = j.at("feature_count").get<std::size_t>();
  if (table.feature_count == 0) throw ValidationError("training table feature_count must be positive");
  const auto& rows = j.at("rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (!r.is_array() || r.size() != table.feature_count + 1) {
      throw ValidationError(detail::concat("table row ", i, " must hold ", table.feature_count, " values and a label"));
    }
    TrainingRow row;
    for (std::size_t k = 0; k < table.feature_count; ++k) {
      if (!r[k].is_number()) throw ValidationError(detail::concat("table row ", i, " value ", k, " is not a number"));
      row.values.push_back(r[k].get<double>());
    }
    if (!r.back().is_number_integer()) throw ValidationError(detail::concat("table row ", i, " label is not an integer"));
    row.label = r.back().get<int>();
    table.rows.push_back(std::move(row));
  }
  table.validate();
  return table;
}

}  // namespace landchange
