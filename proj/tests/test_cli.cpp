#include <cstdlib>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "landchange/pipeline.hpp"
#include "support/test_support.hpp"

using namespace landchange;
using landchange::testing::TempDir;
using nlohmann::json;

namespace {

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + LANDCHANGE_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

void write_spec(const fs::path& path) {
  io::write_json(path, json::parse(R"({
    "width": 24, "height": 20, "bands": 2, "seed": 5,
    "class_means": [[0.1, 0.2], [0.7, 0.6]], "class_sigma": [0.02, 0.02],
    "layout": {"background": 0, "disks": []},
    "transitions": {"background": 0, "disks": [{"row": 10, "col": 8, "radius": 5, "code": 3},
                                               {"row": 10, "col": 18, "radius": 4, "code": 1}]},
    "samples_per_class": 10})"));
}

}  // namespace

TEST(Cli, StagesSucceed) {
  TempDir t;
  write_spec(t / "spec.json");
  ASSERT_EQ(cli("synth --spec " + q(t / "spec.json") + " --out-prefix " + q(t / "fx")), 0);
  ASSERT_EQ(cli("sample --scene " + q(t / "fx_old.json") + " --features " + q(t / "fx_features.geojson") + " --out " +
                q(t / "table.json")),
            0);
  ASSERT_EQ(cli("train --table " + q(t / "table.json") + " --out " + q(t / "tree.json")), 0);
  ASSERT_EQ(cli("classify --tree " + q(t / "tree.json") + " --scene " + q(t / "fx_old.json") + " --out " +
                q(t / "a.json") + " --workers 3"),
            0);
  ASSERT_EQ(cli("classify --tree " + q(t / "tree.json") + " --scene " + q(t / "fx_new.json") + " --out " + q(t / "b.json")),
            0);
  ASSERT_EQ(cli("change --old " + q(t / "a.json") + " --new " + q(t / "b.json") + " --out " + q(t / "c.json") +
                " --stats " + q(t / "s.json")),
            0);
  ASSERT_EQ(cli("render --map " + q(t / "c.json") + " --out " + q(t / "c.png")), 0);
  EXPECT_TRUE(fs::exists(t / "c.png"));
  const auto stats = io::read_json(t / "s.json").at("transitions");
  EXPECT_GT(stats[1].at("pixels").get<int>(), 0);
  EXPECT_GT(stats[3].at("pixels").get<int>(), 0);
}

TEST(Cli, RunSubcommand) {
  TempDir t;
  write_spec(t / "spec.json");
  ASSERT_EQ(cli("synth --spec " + q(t / "spec.json") + " --out-prefix " + q(t / "fx")), 0);
  io::write_json(t / "run.json", {{"scenes", {{{"epoch", "a"}, {"header", "fx_old.json"}},
                                              {{"epoch", "b"}, {"header", "fx_new.json"}}}},
                                  {"features", "fx_features.geojson"},
                                  {"out_dir", "out"}});
  EXPECT_EQ(cli("run --config " + q(t / "run.json") + " --workers 2"), 0);
  EXPECT_TRUE(fs::exists(t / "out" / "manifest.json"));
  EXPECT_EQ(cli("run --config " + q(t / "run.json") + " --train-epoch zzz"), 2);
}

TEST(Cli, ExitCodes) {
  TempDir t;
  write_spec(t / "spec.json");
  ASSERT_EQ(cli("synth --spec " + q(t / "spec.json") + " --out-prefix " + q(t / "fx")), 0);
  // Unreadable scene is an I/O failure.
  EXPECT_EQ(cli("sample --scene " + q(t / "nope.json") + " --features " + q(t / "fx_features.geojson") + " --out " +
                q(t / "x.json")),
            1);
  // Missing landcover property is a validation failure.
  io::write_text(t / "bad.geojson", R"({"type": "FeatureCollection", "features": [
    {"type": "Feature", "properties": {}, "geometry": {"type": "Point", "coordinates": [3.5, 3.5]}}]})");
  EXPECT_EQ(cli("sample --scene " + q(t / "fx_old.json") + " --features " + q(t / "bad.geojson") + " --out " +
                q(t / "x.json")),
            2);
  io::write_json(t / "one.json", table_to_json(TrainingTable{1, {{{1}, 1}, {{2}, 1}}}));
  EXPECT_EQ(cli("train --table " + q(t / "one.json") + " --out " + q(t / "tree.json")), 2);
  EXPECT_EQ(cli("train --table " + q(t / "one.json")), 2);
  EXPECT_EQ(cli("bogus"), 2);
}
