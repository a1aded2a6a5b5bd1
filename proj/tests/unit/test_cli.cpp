#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wslab/cli/commands.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "wslab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = wslab::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "wslab_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const json& doc) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << doc.dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

std::size_t count_lines(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

json small_generate(int n = 200, int classes = 2) {
  return {{"blobs", {{"n", n}, {"num_classes", classes}, {"split", {n / 2, n / 4, n - n / 2 - n / 4}}}},
          {"lfs",
           {{{"mode", "independent"}, {"accuracy", 0.8}, {"coverage", 0.7}},
            {{"mode", "independent"}, {"accuracy", 0.75}, {"coverage", 0.6}},
            {{"mode", "independent"}, {"accuracy", 0.7}, {"coverage", 0.8}}}}};
}

}  // namespace

TEST(Synth, WritesShapesAndAReplayableManifest) {
  const fs::path dir = scratch("synth");
  json cfg = small_generate(100);
  cfg["seed"] = 5;
  const auto r = run_cli({"synth", "-c", write_config(dir, cfg).string(), "-o", (dir / "a").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(dir / "a" / "features.csv"), 100u);
  EXPECT_EQ(count_lines(dir / "a" / "labels.csv"), 100u);
  EXPECT_EQ(count_lines(dir / "a" / "label_matrix.csv"), 100u);
  const std::string first = slurp(dir / "a" / "label_matrix.csv");
  EXPECT_EQ(std::count(first.begin(), first.begin() + static_cast<long>(first.find('\n')), ','), 2);

  const auto replay = run_cli({"synth", "-c", (dir / "a" / "manifest.json").string(), "-o", (dir / "b").string()});
  ASSERT_EQ(replay.code, 0) << replay.err;
  EXPECT_EQ(slurp(dir / "b" / "label_matrix.csv"), first);
  EXPECT_EQ(slurp(dir / "b" / "features.csv"), slurp(dir / "a" / "features.csv"));
}

TEST(Synth, CoverageMatchesTheSpecAtScale) {
  const fs::path dir = scratch("coverage");
  json cfg = {{"blobs", {{"n", 50000}, {"dims", 2}}},
              {"lfs",
               {{{"mode", "independent"}, {"accuracy", 0.8}, {"coverage", 0.5}},
                {{"mode", "coin-flip"}, {"coverage", 0.5}}}}};
  const auto r = run_cli({"synth", "-c", write_config(dir, cfg).string(), "-o", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& c : read_json(dir / "out" / "stats.json").at("lf_coverage")) EXPECT_NEAR(c.get<double>(), 0.5, 0.01);
}

TEST(Train, RunsWithFlagOverrides) {
  const fs::path dir = scratch("train");
  json cfg = {{"data", {{"generate", small_generate()}}},
              {"model", {{"encoder", {{"hidden", {8}}}}, {"downstream", {{"hidden", {8}}}}}},
              {"train", {{"lr_grid", {1e-3, 3e-4}}, {"max_epochs", 2}}}};
  const auto conf = write_config(dir, cfg);
  const auto grid = run_cli({"train", "-c", conf.string(), "-o", (dir / "grid").string()});
  ASSERT_EQ(grid.code, 0) << grid.err;
  const auto metrics = read_json(dir / "grid" / "weasel.metrics.json");
  EXPECT_EQ(metrics.at("lr_results").size(), 2u);
  EXPECT_TRUE(metrics.contains("test"));
  EXPECT_EQ(count_lines(dir / "grid" / "weasel.history.jsonl"), 2u);

  const auto l1 = run_cli({"train", "-c", conf.string(), "-o", (dir / "l1").string(), "--loss", "l1", "--lr", "1e-3"});
  ASSERT_EQ(l1.code, 0) << l1.err;
  EXPECT_EQ(read_json(dir / "l1" / "weasel.config.json").at("model").at("loss"), "l1");
  EXPECT_EQ(read_json(dir / "l1" / "weasel.metrics.json").at("loss"), "l1");
  EXPECT_EQ(read_json(dir / "l1" / "weasel.metrics.json").at("lr_results").size(), 1u);
}

TEST(Baseline, MajorityOnUnanimousVotesIsOneHot) {
  const fs::path dir = scratch("majority");
  std::ofstream(dir / "x.csv") << "0.1,1\n0.2,2\n0.3,3\n0.4,4\n0.5,5\n0.6,6\n";
  std::ofstream(dir / "y.csv") << "1\n2\n1\n2\n1\n2\n";
  std::ofstream(dir / "lm.csv") << "1,1\n2,2\n1,1\n2,2\n1,0\n2,2\n";
  json cfg = {{"data",
               {{"features", (dir / "x.csv").string()},
                {"labels", (dir / "y.csv").string()},
                {"label_matrix", (dir / "lm.csv").string()},
                {"split", {4, 1, 1}},
                {"num_classes", 2}}},
              {"method", "majority"}};
  const auto r = run_cli({"baseline", "-c", write_config(dir, cfg).string(), "-o", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream soft(slurp(dir / "out" / "majority.soft_labels.csv"));
  std::string line;
  int row = 0;
  while (std::getline(soft, line)) {
    const int cls = row % 2 == 0 ? 1 : 2;
    std::istringstream cells(line);
    double p1 = 0;
    double p2 = 0;
    char comma = 0;
    cells >> p1 >> comma >> p2;
    EXPECT_EQ(p1, cls == 1 ? 1.0 : 0.0);
    EXPECT_EQ(p2, cls == 2 ? 1.0 : 0.0);
    ++row;
  }
  EXPECT_EQ(row, 6);
}

TEST(Baseline, TripletRejectsMultiClass) {
  const fs::path dir = scratch("triplet3");
  json cfg = {{"data", {{"generate", small_generate(120, 3)}}}, {"method", "triplet-mean"}};
  const auto r = run_cli({"baseline", "-c", write_config(dir, cfg).string(), "-o", (dir / "out").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST(Robustness, RecoveryGridOutputsAreCompleteAndReproducible) {
  const fs::path dir = scratch("recovery");
  json cfg = {{"experiment", "random-duplication"},
              {"counts", {2, 3}},
              {"seeds", {1, 2, 3}},
              {"models", {"weasel", "majority", "nb-em", "supervised-ceiling"}},
              {"blobs", {{"n", 240}, {"split", {160, 40, 40}}}},
              {"model", {{"encoder", {{"hidden", {8}}}}, {"downstream", {{"hidden", {8}}}}}},
              {"train", {{"lr", 1e-3}, {"max_epochs", 2}}}};
  const auto conf = write_config(dir, cfg);
  const auto a = run_cli({"robustness", "-c", conf.string(), "-o", (dir / "a").string()});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = run_cli({"robustness", "-c", conf.string(), "-o", (dir / "b").string(), "--jobs", "2"});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(count_lines(dir / "a" / "results.csv"), 1u + 4 * 2 * 3);
  EXPECT_EQ(slurp(dir / "a" / "results.csv"), slurp(dir / "b" / "results.csv"));
  const auto plot = read_json(dir / "a" / "plot_data.json");
  for (const auto& [model, series] : plot.at("series").items()) EXPECT_EQ(series.size(), 2u) << model;
  EXPECT_TRUE(fs::exists(dir / "a" / "summary.json"));
}

TEST(Errors, BadInputsExitWithTwo) {
  const fs::path dir = scratch("errors");
  EXPECT_EQ(run_cli({"train", "-c", write_config(dir, {{"data", {{"generate", small_generate()}}}, {"bogus", 1}}).string()}).code, 2);
  EXPECT_EQ(run_cli({"train", "-c", (dir / "missing.json").string()}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"robustness", "--experiment", "sideways"}).code, 2);
  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_EQ(run_cli({"synth", "-c", (dir / "broken.json").string()}).code, 2);
  EXPECT_EQ(run_cli({"eval", "-o", (dir / "e").string()}).code, 2);
}

TEST(Eval, ScoresPredictionFiles) {
  const fs::path dir = scratch("eval");
  std::ofstream(dir / "p.csv") << "0.9,0.1\n0.2,0.8\n0.4,0.6\n0.7,0.3\n";
  std::ofstream(dir / "y.csv") << "1\n2\n2\n1\n";
  json cfg = {{"predictions", (dir / "p.csv").string()}, {"labels", (dir / "y.csv").string()}};
  const auto r = run_cli({"eval", "-c", write_config(dir, cfg).string(), "-o", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = read_json(dir / "out" / "eval.metrics.json");
  EXPECT_EQ(m.at("auc").get<double>(), 1.0);
  EXPECT_EQ(m.at("f1").get<double>(), 1.0);
}
