#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wslab/data/synthetic.hpp"
#include "wslab/eval/metrics.hpp"
#include "wslab/weasel/model.hpp"
#include "wslab/weasel/trainer.hpp"

namespace wslab::experiments {

enum class RobustnessKind { AdversarialDuplication, RandomDuplication, IndependentRandom };

std::string to_string(RobustnessKind k);
RobustnessKind robustness_kind_from_string(const std::string& name);

enum class ModelKind { Weasel, Majority, NbEm, TripletMean, TripletMedian, SupervisedCeiling };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& name);

/// Blobs at desk scale: 5000 train / 1000 val / 2000 test, d = 10, separation 6.
data::BlobSpec desk_blobs();

/// Base LF set of the adversarial experiment: ten single-polarity LFs
/// (accuracy 0.75-0.85, coverage 0.2-0.4), alternating classes, starting
/// with a positive 0.8-accurate LF that the adversarial column copies.
std::vector<data::SyntheticLfSpec> default_adversarial_base();

/// Everything shared by the robustness and ablation runners.
struct Protocol {
  data::BlobSpec blobs = desk_blobs();
  weasel::WeaselConfig weasel;
  weasel::TrainConfig train;  // seed is replaced per cell
  /// Learning rates tried per run; the one with the best validation score wins.
  std::vector<double> lr_grid{1e-4, 3e-5};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  /// Worker threads for independent cells. Output never depends on it.
  int jobs = 1;

  void validate() const;
};

struct RobustnessSpec {
  RobustnessKind kind = RobustnessKind::RandomDuplication;
  /// k for the duplication experiments, j for independent-random.
  std::vector<int> duplicate_counts;
  /// Adversarial: the accurate LF set (empty = default_adversarial_base()).
  /// Ignored by the other kinds, whose base is {y*, coin flip}.
  std::vector<data::SyntheticLfSpec> base_lf_specs;
  /// Index into the base set of the LF the adversarial column copies.
  Index adversarial_source = 0;
  std::vector<ModelKind> models{ModelKind::Weasel, ModelKind::NbEm, ModelKind::TripletMean,
                                ModelKind::SupervisedCeiling};
  Protocol protocol;
  /// Counts above 100 are refused unless this is set.
  bool allow_large_grid = false;

  void validate() const;
};

/// LF specs of one grid point.
std::vector<data::SyntheticLfSpec> scenario_lfs(const RobustnessSpec& spec, int count);

struct ResultRow {
  std::string model;
  std::string grid;  // grid value (k, j, or ablation variant)
  std::uint64_t seed = 0;
  double auc = 0.0;
  double f1 = 0.0;
};

struct SkippedCell {
  std::string model;
  std::string grid;
  std::uint64_t seed = 0;
  std::string reason;
};

struct ResultsTable {
  std::string experiment;
  std::string grid_name;
  std::vector<ResultRow> rows;
  std::vector<SkippedCell> skipped;

  std::vector<double> auc_of(const std::string& model, const std::string& grid) const;
};

ResultsTable run_adversarial_duplication(const RobustnessSpec& spec);
ResultsTable run_recovery(const RobustnessSpec& spec);
ResultsTable run_independent_random(const RobustnessSpec& spec);
/// Dispatches on spec.kind.
ResultsTable run_robustness(const RobustnessSpec& spec);

/// Trains one model on one label matrix and scores it on the test split.
/// The F1 threshold is tuned on the validation split.
eval::MetricsReport run_model(ModelKind model, const data::LabelMatrix& lm, const data::Dataset& ds,
                              const Protocol& protocol, std::uint64_t seed);

/// One-factor-at-a-time variants of the WeaSEL configuration.
struct AblationSpec {
  RobustnessKind scenario = RobustnessKind::RandomDuplication;
  int count = 25;
  /// Axis names; see ablation_axes(). Empty = base run only.
  std::vector<std::string> axes;
  Protocol protocol;
};

/// Recognized axis names.
std::vector<std::string> ablation_axes();

struct AblationVariant {
  std::string name;
  weasel::WeaselConfig config;
};

/// The base configuration first, then one variant per axis value.
/// `num_lfs` resolves scale choices that depend on m. Throws on unknown axes.
std::vector<AblationVariant> expand_ablation(const weasel::WeaselConfig& base, const std::vector<std::string>& axes,
                                             Index num_lfs);

ResultsTable run_ablation_grid(const AblationSpec& spec);

/// CSV with header model,grid,seed,auc,f1.
std::string results_csv(const ResultsTable& table);
/// Per (model, grid): n, median/p25/p75 and mean/std of AUC and F1.
nlohmann::json summary_json(const ResultsTable& table);
/// Per model: series of {x, median, p25, p75} AUC points in grid order.
nlohmann::json plot_data_json(const ResultsTable& table);

/// Writes results.csv, summary.json and plot_data.json into `dir`.
void write_results(const ResultsTable& table, const std::filesystem::path& dir);

}  // namespace wslab::experiments
