#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "landchange/cart.hpp"
#include "landchange/raster.hpp"

namespace landchange {

namespace detail {

struct BlockFailure {
  std::size_t pixel = std::numeric_limits<std::size_t>::max();
  std::size_t band = 0;
};

/// Classifies pixels [begin, end) into out; records the first non-finite value.
inline BlockFailure classify_block(const DecisionTree& tree, const Raster& raster, std::size_t begin,
                                   std::size_t end, std::uint8_t* out) {
  std::vector<double> values(raster.band_count());
  for (std::size_t p = begin; p < end; ++p) {
    if (raster.is_masked(p)) {
      out[p] = kNodataCode;
      continue;
    }
    raster.pixel_vector(p, values);
    for (std::size_t b = 0; b < values.size(); ++b) {
      if (!std::isfinite(values[b])) return {p, b};
    }
    out[p] = static_cast<std::uint8_t>(tree.predict_unchecked(values));
  }
  return {};
}

}  // namespace detail

/// Per-pixel prediction. Masked pixels map to 255. Work is split into
/// contiguous row blocks, one per worker; the output does not depend on
/// the worker count.
inline ByteMap classify_raster(const DecisionTree& tree, const Raster& raster, unsigned workers = 1) {
  if (raster.band_count() != tree.feature_count) {
    throw ValidationError(detail::concat("raster has ", raster.band_count(), " bands but the tree expects ",
                                         tree.feature_count));
  }
  const std::size_t w = raster.width();
  const std::size_t h = raster.height();
  std::vector<std::uint8_t> codes(w * h, kNodataCode);

  const std::size_t blocks = std::clamp<std::size_t>(workers, 1, h);
  std::vector<detail::BlockFailure> failures(blocks);
  auto run = [&](std::size_t k) {
    const std::size_t r0 = h * k / blocks;
    const std::size_t r1 = h * (k + 1) / blocks;
    failures[k] = detail::classify_block(tree, raster, r0 * w, r1 * w, codes.data());
  };
  if (blocks == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(blocks);
    for (std::size_t k = 0; k < blocks; ++k) pool.emplace_back(run, k);
  }
  // Blocks are in pixel order, so the first recorded failure is the earliest.
  for (const auto& f : failures) {
    if (f.pixel != std::numeric_limits<std::size_t>::max()) {
      throw ValidationError(detail::concat("non-finite value in band ", f.band, " at row ", f.pixel / w, ", col ",
                                           f.pixel % w, " of an unmasked pixel"));
    }
  }
  return ByteMap(w, h, raster.geotransform(), MapKind::classmap, std::move(codes));
}

struct Epoch {
  std::string label;
  Raster scene;
};

struct EpochMap {
  std::string label;
  ByteMap map;
};

/// Applies one tree to every scene of a time series.
inline std::vector<EpochMap> classify_series(const DecisionTree& tree, const std::vector<Epoch>& scenes,
                                             unsigned workers = 1) {
  std::set<std::string> seen;
  for (const auto& e : scenes) {
    if (!seen.insert(e.label).second) throw ValidationError(detail::concat("duplicate epoch label \"", e.label, "\""));
    const Raster& first = scenes.front().scene;
    if (e.scene.width() != first.width() || e.scene.height() != first.height() ||
        e.scene.band_count() != first.band_count()) {
      throw ValidationError(detail::concat("epoch \"", e.label, "\" is ", e.scene.width(), "x", e.scene.height(), "x",
                                           e.scene.band_count(), ", expected ", first.width(), "x", first.height(),
                                           "x", first.band_count()));
    }
  }
  std::vector<EpochMap> out;
  out.reserve(scenes.size());
  for (const auto& e : scenes) {
    try {
      out.push_back({e.label, classify_raster(tree, e.scene, workers)});
    } catch (const ValidationError& err) {
      throw ValidationError(detail::concat("epoch \"", e.label, "\": ", err.what()));
    }
  }
  return out;
}

}  // namespace landchange
