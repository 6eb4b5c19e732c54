// landchange: command-line front end for the classification and change
// detection pipeline.
//
// Exit codes: 0 success, 1 I/O failure, 2 validation or domain error.

#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "landchange/pipeline.hpp"

namespace {

using namespace landchange;

constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Land-cover classification and post-classification change detection"};
  app.require_subcommand(1);

  unsigned workers = default_workers();

  std::string scene, features, out;
  auto* sample = app.add_subcommand("sample", "Extract a training table from labeled features over a scene");
  sample->add_option("--scene", scene, "Scene header (JSON)")->required();
  sample->add_option("--features", features, "GeoJSON FeatureCollection with integer \"landcover\"")->required();
  sample->add_option("--out", out, "Output table JSON")->required();

  std::string table, params_path, tree_out;
  auto* train = app.add_subcommand("train", "Train a CART tree; prints training-set accuracy as JSON");
  train->add_option("--table", table, "Training table JSON")->required();
  train->add_option("--params", params_path, "CART params JSON (defaults when absent)");
  train->add_option("--out", tree_out, "Output tree JSON")->required();

  std::string tree_path, map_out;
  auto* classify = app.add_subcommand("classify", "Classify a scene into a classmap");
  classify->add_option("--tree", tree_path, "Tree JSON")->required();
  classify->add_option("--scene", scene, "Scene header (JSON)")->required();
  classify->add_option("--out", map_out, "Output classmap header")->required();
  classify->add_option("--workers", workers, "Worker threads");

  std::string old_map, new_map, change_out, stats_out;
  auto* change = app.add_subcommand("change", "Compare two classmaps into a transition map");
  change->add_option("--old", old_map, "Older classmap header")->required();
  change->add_option("--new", new_map, "Newer classmap header")->required();
  change->add_option("--out", change_out, "Output changemap header")->required();
  change->add_option("--stats", stats_out, "Output statistics JSON")->required();

  std::string render_in, png_out, palette_path;
  auto* render = app.add_subcommand("render", "Render a classmap or changemap to PNG");
  render->add_option("--map", render_in, "Map header")->required();
  render->add_option("--out", png_out, "Output PNG")->required();
  render->add_option("--palette", palette_path, "Palette override JSON {\"code\": [r, g, b]}");

  std::string config_path, train_epoch;
  auto* run = app.add_subcommand("run", "Run the whole pipeline from a run.json config");
  run->add_option("--config", config_path, "Run configuration JSON")->required();
  run->add_option("--train-epoch", train_epoch, "Epoch to train on (default: oldest)");
  run->add_option("--workers", workers, "Worker threads for classification");

  std::string spec_path, prefix;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene or scene pair");
  synth->add_option("--spec", spec_path, "Synthetic scene spec JSON")->required();
  synth->add_option("--out-prefix", prefix, "Output path prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*sample) {
      const auto t = pipeline::sample_stage(scene, features, out);
      std::cout << nlohmann::json{{"rows", t.size()}, {"feature_count", t.feature_count}, {"out", out}}.dump() << "\n";
    } else if (*train) {
      std::optional<fs::path> p;
      if (!params_path.empty()) p = params_path;
      const auto [params, source] = pipeline::load_params(p);
      const auto report = pipeline::train_stage(table, params, source, tree_out);
      std::cout << report.summary.dump(2) << "\n";
    } else if (*classify) {
      pipeline::classify_stage(tree_path, scene, map_out, workers);
    } else if (*change) {
      const auto stats = pipeline::change_stage(old_map, new_map, change_out, stats_out);
      std::cout << stats_to_json(stats).dump(2) << "\n";
    } else if (*render) {
      std::optional<nlohmann::json> palette;
      if (!palette_path.empty()) palette = io::read_json(palette_path);
      pipeline::render_stage(render_in, png_out, palette);
    } else if (*run) {
      auto cfg = pipeline::load_run_config(config_path);
      if (!train_epoch.empty()) cfg.train_epoch = train_epoch;
      const auto manifest = pipeline::run_pipeline(cfg, workers);
      std::cout << manifest.dump(2) << "\n";
    } else if (*synth) {
      std::cout << pipeline::synth_stage(spec_path, prefix).dump(2) << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::io ? kExitIo : kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
