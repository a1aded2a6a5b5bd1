#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wslab/data/dataset.hpp"
#include "wslab/weasel/model.hpp"

namespace wslab::weasel {

enum class EarlyStopping { ValAuc, ValAccuracy, None };

std::string to_string(EarlyStopping e);
EarlyStopping early_stopping_from_string(const std::string& name);

struct TrainConfig {
  double lr = 1e-4;
  double weight_decay = 7e-7;
  Index batch_size = 64;
  int max_epochs = 150;
  EarlyStopping early_stopping = EarlyStopping::ValAuc;
  std::uint64_t seed = 0;
  /// Also evaluate the test split after every epoch (reporting only).
  bool record_test = false;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_metric;
  std::optional<double> test_metric;
};

nlohmann::json to_json(const EpochRecord& r);

/// Per-batch view handed to TrainHooks::on_batch.
struct BatchDiagnostics {
  int epoch = 0;
  int batch = 0;
  const LossResult* loss = nullptr;
  /// For each loss term: max |gradient| over encoder parameters and over
  /// downstream parameters when only that term is backpropagated.
  std::vector<double> term_encoder_grad_max;
  std::vector<double> term_downstream_grad_max;
};

struct TrainHooks {
  std::function<void(const BatchDiagnostics&)> on_batch;
};

struct TrainResult {
  WeaselModel model;
  std::vector<EpochRecord> history;
  int best_epoch = 0;  // 0 when no epoch ran
  std::optional<double> best_val_metric;
};

/// Joint training of encoder and downstream network.
///
/// Each batch runs both forward passes, evaluates the configured loss,
/// backpropagates once and applies one Adam step per network. After each
/// epoch the downstream model is scored on the validation split and the
/// best epoch is checkpointed and restored at the end. Only the training
/// split is used for updates; the caller applies covered_subset first.
/// Throws RuntimeFailure on a non-finite loss.
TrainResult train(WeaselModel model, const data::LabelMatrix& lm, const data::Dataset& ds, const TrainConfig& cfg,
                  const TrainHooks& hooks = {});

struct DownstreamResult {
  nn::Mlp net;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  std::optional<double> best_val_metric;
};

/// Trains a classifier alone on fixed soft targets (one row per entry of
/// ds.split().train, in that order) with cross-entropy, using the same
/// optimizer, batching and validation protocol as train().
DownstreamResult train_downstream(nn::Mlp net, const data::Dataset& ds, const Matrix& train_targets,
                                  const TrainConfig& cfg);

/// Validation score of class probabilities: AUC (macro one-vs-rest when
/// C > 2) or accuracy.
double validation_score(const Matrix& probs, const std::vector<int>& labels, EarlyStopping metric);

}  // namespace wslab::weasel
