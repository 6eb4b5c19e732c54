#pragma once

// File-level pipeline stages behind the command-line tool. Each stage reads
// its inputs from disk and writes its products; run_pipeline chains the same
// stage functions, so a full run produces the same bytes as the stages
// invoked one by one.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "landchange/cart.hpp"
#include "landchange/change.hpp"
#include "landchange/classify.hpp"
#include "landchange/error.hpp"
#include "landchange/metrics.hpp"
#include "landchange/raster_io.hpp"
#include "landchange/samples.hpp"
#include "landchange/synth.hpp"

namespace landchange::pipeline {

namespace detail {

using landchange::detail::concat;

/// Re-raises library and JSON errors with a context prefix, keeping the type.
template <typename Fn>
auto with_context(const std::string& context, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const BoundsError& e) {
    throw BoundsError(context + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(context + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(context + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.kind(), context + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(context + ": " + e.what());
  }
}

inline fs::path resolve(const fs::path& base_dir, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

inline void check_epoch_label(const std::string& label) {
  const bool ok = !label.empty() && std::all_of(label.begin(), label.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '-' ||
           c == '.';
  });
  if (!ok || label == "." || label == "..") {
    throw ValidationError(concat("epoch label \"", label, "\" must be non-empty and use only [A-Za-z0-9_.-]"));
  }
}

}  // namespace detail

// --- stages ------------------------------------------------------------------------

/// Features + scene -> training table JSON.
inline TrainingTable sample_stage(const fs::path& scene, const fs::path& features, const fs::path& out) {
  const Raster raster = read_scene(scene);
  const auto feats = detail::with_context(features.string(), [&] { return parse_feature_collection(io::read_text(features)); });
  const TrainingTable table = detail::with_context(features.string(), [&] { return sample_raster(raster, feats); });
  io::write_json(out, table_to_json(table));
  return table;
}

struct TrainReport {
  DecisionTree tree;
  nlohmann::json summary;  // printed by the CLI / stored as run metrics
};

/// Table -> tree JSON. `params_source` names where the params came from.
inline TrainReport train_stage(const fs::path& table_path, const CartParams& params, const std::string& params_source,
                               const fs::path& out) {
  const TrainingTable table =
      detail::with_context(table_path.string(), [&] { return table_from_json(io::read_json(table_path)); });
  DecisionTree tree = detail::with_context(table_path.string(), [&] { return train(table, params); });
  io::write_text(out, serialize_tree(tree));
  nlohmann::json summary = {{"params", params_to_json(params)},
                            {"params_source", params_source},
                            {"rows", table.size()},
                            {"depth", tree.depth()},
                            {"leaves", tree.leaf_count()},
                            {"training_confusion", metrics_to_json(holdout_accuracy(tree, table))}};
  return {std::move(tree), std::move(summary)};
}

/// Reads params from a file, or defaults when no path is given.
inline std::pair<CartParams, std::string> load_params(const std::optional<fs::path>& path) {
  if (!path) return {CartParams{}, "defaults"};
  const CartParams p = detail::with_context(path->string(), [&] { return params_from_json(io::read_json(*path)); });
  return {p, path->string()};
}

inline DecisionTree load_tree(const fs::path& path) {
  return detail::with_context(path.string(), [&] { return deserialize_tree(io::read_text(path)); });
}

inline ByteMap classify_stage(const fs::path& tree_path, const fs::path& scene, const fs::path& out,
                              unsigned workers = 1) {
  const DecisionTree tree = load_tree(tree_path);
  const Raster raster = read_scene(scene);
  ByteMap map = detail::with_context(scene.string(), [&] { return classify_raster(tree, raster, workers); });
  write_bytemap(map, out);
  return map;
}

inline ChangeStats change_stage(const fs::path& old_map, const fs::path& new_map, const fs::path& out,
                                const fs::path& stats_out) {
  const ByteMap a = read_bytemap(old_map);
  const ByteMap b = read_bytemap(new_map);
  const ByteMap change = detail::with_context(detail::concat(old_map.string(), " vs ", new_map.string()),
                                              [&] { return detect_change(a, b); });
  const ChangeStats stats = change_stats(change);
  write_bytemap(change, out);
  io::write_json(stats_out, stats_to_json(stats));
  return stats;
}

inline Palette load_palette(const std::optional<nlohmann::json>& overrides, MapKind kind) {
  if (!overrides) return default_palette(kind);
  return palette_from_json(*overrides, default_palette(kind));
}

inline void render_stage(const fs::path& map_path, const fs::path& out, const std::optional<nlohmann::json>& palette) {
  const ByteMap map = read_bytemap(map_path);
  const Palette pal = detail::with_context("palette", [&] { return load_palette(palette, map.kind()); });
  const auto bytes = detail::with_context(map_path.string(), [&] { return render_map(map, pal); });
  io::write_bytes(out, bytes);
}

// --- full run -----------------------------------------------------------------------

struct RunScene {
  std::string epoch;
  fs::path header;
  std::optional<fs::path> truth;  // optional reference classmap for accuracy
};

struct RunConfig {
  std::vector<RunScene> scenes;  // chronological order
  fs::path features;
  CartParams params;
  std::optional<nlohmann::json> palette;  // change-map palette overrides
  fs::path out_dir;
  std::optional<std::string> train_epoch;
};

/// Parses run.json; relative paths resolve against the config's directory.
inline RunConfig parse_run_config(const nlohmann::json& j, const fs::path& base_dir) {
  return detail::with_context("run config", [&] {
    if (!j.is_object()) throw ValidationError("must be a JSON object");
    RunConfig cfg;
    for (const auto& s : j.at("scenes")) {
      RunScene scene{s.at("epoch").get<std::string>(), detail::resolve(base_dir, s.at("header").get<std::string>()),
                     std::nullopt};
      detail::check_epoch_label(scene.epoch);
      if (s.contains("truth")) scene.truth = detail::resolve(base_dir, s.at("truth").get<std::string>());
      for (const auto& prev : cfg.scenes) {
        if (prev.epoch == scene.epoch) throw ValidationError(detail::concat("duplicate epoch \"", scene.epoch, "\""));
      }
      cfg.scenes.push_back(std::move(scene));
    }
    cfg.features = detail::resolve(base_dir, j.at("features").get<std::string>());
    if (j.contains("cart_params")) cfg.params = params_from_json(j.at("cart_params"));
    if (j.contains("palette") && !j.at("palette").is_null()) {
      const auto& p = j.at("palette");
      cfg.palette = p.is_string() ? io::read_json(detail::resolve(base_dir, p.get<std::string>())) : p;
    }
    cfg.out_dir = detail::resolve(base_dir, j.at("out_dir").get<std::string>());
    if (j.contains("train_epoch")) cfg.train_epoch = j.at("train_epoch").get<std::string>();
    return cfg;
  });
}

inline RunConfig load_run_config(const fs::path& path) {
  return parse_run_config(io::read_json(path), path.parent_path());
}

/// Pairs to compare: (oldest, newest) then every consecutive pair not already listed.
inline std::vector<std::pair<std::size_t, std::size_t>> change_pairs(std::size_t epochs) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (epochs < 2) return pairs;
  pairs.emplace_back(0, epochs - 1);
  for (std::size_t i = 0; i + 1 < epochs; ++i) {
    if (std::pair{i, i + 1} != pairs.front()) pairs.emplace_back(i, i + 1);
  }
  return pairs;
}

/// sample -> train (one epoch) -> classify every epoch -> change maps, stats,
/// PNGs and metrics. manifest.json is written last and lists every product.
inline nlohmann::json run_pipeline(const RunConfig& cfg, unsigned workers = 1) {
  using nlohmann::json;
  if (cfg.scenes.size() < 2) {
    throw ValidationError(detail::concat("change detection needs at least 2 epochs, config lists ", cfg.scenes.size()));
  }
  const std::string train_epoch = cfg.train_epoch.value_or(cfg.scenes.front().epoch);
  const auto train_it = std::find_if(cfg.scenes.begin(), cfg.scenes.end(),
                                     [&](const RunScene& s) { return s.epoch == train_epoch; });
  if (train_it == cfg.scenes.end()) throw ValidationError(detail::concat("train epoch \"", train_epoch, "\" not in config"));

  const fs::path& out = cfg.out_dir;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError(detail::concat("cannot create ", out.string(), ": ", ec.message()));

  auto stage = [](const std::string& name, auto&& fn) { return detail::with_context("stage '" + name + "'", fn); };

  stage("sample", [&] { return sample_stage(train_it->header, cfg.features, out / "table.json"); });
  const TrainReport report =
      stage("train", [&] { return train_stage(out / "table.json", cfg.params, "run config", out / "tree.json"); });

  json classmaps = json::array();
  json pngs = json::array();
  json epoch_metrics = json::object();
  for (const auto& s : cfg.scenes) {
    const std::string map_name = "classmap_" + s.epoch + ".json";
    const std::string png_name = "classmap_" + s.epoch + ".png";
    const ByteMap map =
        stage("classify " + s.epoch, [&] { return classify_stage(out / "tree.json", s.header, out / map_name, workers); });
    stage("render " + s.epoch, [&] { render_stage(out / map_name, out / png_name, std::nullopt); });
    classmaps.push_back({{"epoch", s.epoch}, {"map", map_name}, {"png", png_name}});
    pngs.push_back(png_name);
    if (s.truth) {
      epoch_metrics[s.epoch] = stage("metrics " + s.epoch, [&] {
        return metrics_to_json(confusion(map, read_bytemap(*s.truth)));
      });
    }
  }

  json changes = json::array();
  for (const auto& [a, b] : change_pairs(cfg.scenes.size())) {
    const std::string base = "change_" + cfg.scenes[a].epoch + "_" + cfg.scenes[b].epoch;
    const std::string old_map = "classmap_" + cfg.scenes[a].epoch + ".json";
    const std::string new_map = "classmap_" + cfg.scenes[b].epoch + ".json";
    stage("change " + base, [&] {
      return change_stage(out / old_map, out / new_map, out / (base + ".json"), out / (base + "_stats.json"));
    });
    stage("render " + base, [&] { render_stage(out / (base + ".json"), out / (base + ".png"), cfg.palette); });
    changes.push_back({{"old", cfg.scenes[a].epoch},
                       {"new", cfg.scenes[b].epoch},
                       {"map", base + ".json"},
                       {"stats", base + "_stats.json"},
                       {"png", base + ".png"}});
    pngs.push_back(base + ".png");
  }

  const json metrics = {{"training", report.summary}, {"epochs", epoch_metrics}};
  io::write_json(out / "metrics.json", metrics);

  json epochs = json::array();
  for (const auto& s : cfg.scenes) epochs.push_back(s.epoch);
  const json manifest = {{"epochs", epochs},
                         {"train_epoch", train_epoch},
                         {"table", "table.json"},
                         {"tree", "tree.json"},
                         {"classmaps", classmaps},
                         {"changes", changes},
                         {"pngs", pngs},
                         {"metrics", "metrics.json"}};
  io::write_json(out / "manifest.json", manifest);
  return manifest;
}

// --- synthetic fixtures -------------------------------------------------------------

/// Writes the products of a synth spec under `prefix` and returns their paths.
/// A spec with "transitions" yields a scene pair, otherwise a single scene.
/// "samples_per_class" adds a GeoJSON of labeled points drawn from the
/// (old) truth with seed + 2.
inline nlohmann::json synth_stage(const fs::path& spec_path, const std::string& prefix) {
  using nlohmann::json;
  const json j = io::read_json(spec_path);
  const fs::path base_dir = spec_path.parent_path();
  return detail::with_context(spec_path.string(), [&] {
    synth::SceneSpec spec = synth::scene_spec_from_json(j);
    if (j.contains("layout_map")) {
      const ByteMap m = read_bytemap(detail::resolve(base_dir, j.at("layout_map").get<std::string>()));
      spec.layout = std::vector<std::uint8_t>(m.codes().begin(), m.codes().end());
    }
    json products = json::object();
    auto emit_samples = [&](const ByteMap& truth) {
      if (!j.contains("samples_per_class")) return;
      const auto feats = synth::sample_points(truth, j.at("samples_per_class").get<std::size_t>(), spec.seed + 2);
      const std::string path = prefix + "_features.geojson";
      io::write_text(path, serialize_feature_collection(feats));
      products["features"] = path;
    };

    if (j.contains("transitions") || j.contains("transitions_map")) {
      synth::Layout plan;
      if (j.contains("transitions_map")) {
        const ByteMap m = read_bytemap(detail::resolve(base_dir, j.at("transitions_map").get<std::string>()));
        plan = std::vector<std::uint8_t>(m.codes().begin(), m.codes().end());
      } else {
        plan = synth::disk_layout_from_json(j.at("transitions"));
      }
      const auto pair = synth::generate_change_pair(spec, plan);
      const std::vector<std::pair<std::string, std::string>> names = {
          {"old_scene", "_old.json"}, {"new_scene", "_new.json"}, {"old_truth", "_old_truth.json"},
          {"new_truth", "_new_truth.json"}, {"change_truth", "_change_truth.json"}};
      write_scene(pair.old_scene, prefix + names[0].second);
      write_scene(pair.new_scene, prefix + names[1].second);
      write_bytemap(pair.old_truth, prefix + names[2].second);
      write_bytemap(pair.new_truth, prefix + names[3].second);
      write_bytemap(pair.change_truth, prefix + names[4].second);
      for (const auto& [key, suffix] : names) products[key] = prefix + suffix;
      emit_samples(pair.old_truth);
    } else {
      const auto scene = synth::generate_scene(spec);
      write_scene(scene.raster, prefix + "_scene.json");
      write_bytemap(scene.truth, prefix + "_truth.json");
      products["scene"] = prefix + "_scene.json";
      products["truth"] = prefix + "_truth.json";
      emit_samples(scene.truth);
    }
    return products;
  });
}

}  // namespace landchange::pipeline
