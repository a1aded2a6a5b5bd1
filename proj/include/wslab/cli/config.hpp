#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wslab/data/synthetic.hpp"
#include "wslab/experiments/experiments.hpp"
#include "wslab/weasel/model.hpp"
#include "wslab/weasel/trainer.hpp"

namespace wslab::cli {

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "WSLAB_OUTPUT_ROOT";

/// Throws InvalidInput naming the first key of `obj` not in `allowed`.
void require_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed, const std::string& where);

struct GeneratorConfig {
  data::BlobSpec blobs = experiments::desk_blobs();
  std::vector<data::SyntheticLfSpec> lfs;
};

GeneratorConfig parse_generator(const nlohmann::json& doc);
nlohmann::json to_json(const GeneratorConfig& g);
data::SyntheticLfSpec parse_lf_spec(const nlohmann::json& doc);
nlohmann::json to_json(const data::SyntheticLfSpec& s);
data::BlobSpec parse_blobs(const nlohmann::json& doc);
nlohmann::json to_json(const data::BlobSpec& b);

/// Where a run gets its data: files on disk or an in-memory generator.
struct DataConfig {
  std::optional<GeneratorConfig> generate;
  std::filesystem::path features;
  std::filesystem::path labels;  // optional
  std::filesystem::path label_matrix;
  std::filesystem::path probabilistic_matrix;
  std::optional<std::array<Index, 3>> split;  // contiguous sizes; empty = all train
  std::optional<int> num_classes;
};

DataConfig parse_data(const nlohmann::json& doc);

struct LoadedData {
  data::Dataset dataset;
  data::LabelMatrix matrix;
};

/// Reads or generates the dataset and label matrix; `seed` drives generation.
LoadedData load_data(const DataConfig& cfg, std::uint64_t seed);

weasel::WeaselConfig parse_model(const nlohmann::json& doc);
nlohmann::json to_json(const weasel::WeaselConfig& c);

struct TrainBlock {
  weasel::TrainConfig train;
  std::vector<double> lr_grid{1e-4, 3e-5};
};

TrainBlock parse_train(const nlohmann::json& doc);
nlohmann::json to_json(const TrainBlock& t);

/// Seeds of a multi-seed run: an explicit list, or `count` seeds derived
/// from the master seed.
std::vector<std::uint64_t> replicate_seeds(std::uint64_t master, std::size_t count);

experiments::RobustnessSpec parse_robustness(const nlohmann::json& doc);
experiments::AblationSpec parse_ablation(const nlohmann::json& doc);

/// Output directory: the config's "output" when present, otherwise
/// $WSLAB_OUTPUT_ROOT (or ./runs) / <subcommand>.
std::filesystem::path resolve_output(const nlohmann::json& doc, const std::string& subcommand);

}  // namespace wslab::cli
