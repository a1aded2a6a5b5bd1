#include "wslab/weasel/trainer.hpp"

#include <cmath>

#include "wslab/eval/metrics.hpp"
#include "wslab/nn/adam.hpp"
#include "wslab/nn/functional.hpp"

namespace wslab::weasel {

std::string to_string(EarlyStopping e) {
  switch (e) {
    case EarlyStopping::ValAuc: return "val-auc";
    case EarlyStopping::ValAccuracy: return "val-accuracy";
    case EarlyStopping::None: return "none";
  }
  return "unknown";
}

EarlyStopping early_stopping_from_string(const std::string& name) {
  for (const auto e : {EarlyStopping::ValAuc, EarlyStopping::ValAccuracy, EarlyStopping::None})
    if (to_string(e) == name) return e;
  throw InvalidInput("unknown early-stopping metric '" + name + "'");
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw InvalidInput("train: learning rate must be positive");
  if (weight_decay < 0.0) throw InvalidInput("train: weight decay must be non-negative");
  if (batch_size < 2) throw InvalidInput("train: batch size must be at least 2");
  if (max_epochs < 0) throw InvalidInput("train: max_epochs must be non-negative");
}

nlohmann::json to_json(const EpochRecord& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"val_metric", opt(r.val_metric)},
          {"test_metric", opt(r.test_metric)}};
}

double validation_score(const Matrix& probs, const std::vector<int>& labels, EarlyStopping metric) {
  if (metric == EarlyStopping::ValAccuracy) return eval::accuracy(eval::argmax_classes(probs), labels);
  return eval::macro_auc(probs, labels);
}

namespace {

Matrix gather(const Matrix& source, std::span<const Index> idx) {
  Matrix out(static_cast<Index>(idx.size()), source.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Index>(k)) = source.row(idx[k]);
  return out;
}

double max_abs_grad(nn::Mlp& net) {
  double m = 0.0;
  for (const nn::Parameter* p : net.parameters()) m = std::max(m, p->grad.cwiseAbs().maxCoeff());
  return m;
}

// Shared epoch/batch/validation scaffolding. `step` runs one batch given
// training positions and returns the loss; `predict` maps features to
// probabilities in eval mode; `snapshot`/`restore` checkpoint the model.
struct Loop {
  const data::Dataset& ds;
  const TrainConfig& cfg;

  template <typename Step, typename Predict, typename Snapshot, typename Restore>
  void run(std::vector<EpochRecord>& history, int& best_epoch, std::optional<double>& best_val, Step step,
           Predict predict, Snapshot snapshot, Restore restore) {
    cfg.validate();
    const auto& split = ds.split();
    if (split.train.empty()) throw InvalidInput("train: empty training split");
    const bool use_val = cfg.early_stopping != EarlyStopping::None;
    if (use_val && split.val.empty()) throw InvalidInput("train: early stopping needs a non-empty validation split");
    const EarlyStopping score_kind = cfg.early_stopping == EarlyStopping::None ? EarlyStopping::ValAuc : cfg.early_stopping;

    Matrix val_x;
    std::vector<int> val_y;
    if (use_val) {
      val_x = ds.rows(split.val);
      val_y = ds.labels_at(split.val);
    }
    Matrix test_x;
    std::vector<int> test_y;
    if (cfg.record_test && !split.test.empty()) {
      test_x = ds.rows(split.test);
      test_y = ds.labels_at(split.test);
    }

    std::vector<Index> order(split.train.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<Index>(k);
    Rng shuffle_rng(derive_seed(cfg.seed, 3));
    const auto batch = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
      shuffle(order, shuffle_rng);
      double loss_sum = 0.0;
      std::size_t loss_rows = 0;
      int batch_no = 0;
      for (std::size_t start = 0; start < order.size(); start += batch) {
        const std::size_t size = std::min(batch, order.size() - start);
        if (size < 2) continue;  // batch norm needs two rows
        const std::span<const Index> positions(order.data() + start, size);
        ++batch_no;
        const std::string where = "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_no);
        double loss = 0.0;
        try {
          loss = step(positions, epoch, batch_no);
        } catch (const InvalidInput& e) {
          // shapes are checked up front, so this is a NaN inside a forward pass
          throw RuntimeFailure("non-finite values at " + where + ": " + e.what());
        }
        if (!std::isfinite(loss)) throw RuntimeFailure("non-finite loss at " + where);
        loss_sum += loss * static_cast<double>(size);
        loss_rows += size;
      }
      EpochRecord rec;
      rec.epoch = epoch;
      rec.train_loss = loss_rows ? loss_sum / static_cast<double>(loss_rows) : 0.0;
      if (use_val) rec.val_metric = validation_score(predict(val_x), val_y, score_kind);
      if (test_x.rows() > 0) rec.test_metric = validation_score(predict(test_x), test_y, score_kind);
      if (use_val && (!best_val || *rec.val_metric > *best_val)) {
        best_val = rec.val_metric;
        best_epoch = epoch;
        snapshot();
      }
      history.push_back(rec);
    }
    if (use_val && best_epoch > 0) {
      restore();
    } else if (!history.empty()) {
      best_epoch = history.back().epoch;
    }
  }
};

}  // namespace

TrainResult train(WeaselModel model, const data::LabelMatrix& lm, const data::Dataset& ds, const TrainConfig& cfg,
                  const TrainHooks& hooks) {
  if (lm.rows() != ds.size()) throw InvalidInput("train: label matrix and dataset differ in row count");
  if (lm.num_lfs() != model.encoder.num_lfs() || lm.num_classes() != model.num_classes()) {
    throw InvalidInput("train: label matrix does not match the encoder shape");
  }
  if (ds.dims() != model.downstream.input_dim()) throw InvalidInput("train: feature width does not match the model");

  TrainResult result;
  const auto& train_rows = ds.split().train;
  const Matrix votes_all = lm.one_hot();
  Rng rng(derive_seed(cfg.seed, 4));
  nn::Adam enc_opt({cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
  nn::Adam down_opt({cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
  std::vector<double> best_enc;
  std::vector<double> best_down;
  std::vector<Index> rows;

  auto step = [&](std::span<const Index> positions, int epoch, int batch_no) {
    rows.clear();
    for (const Index p : positions) rows.push_back(train_rows[static_cast<std::size_t>(p)]);
    const Matrix votes = gather(votes_all, rows);
    const Matrix x = gather(ds.features(), rows);
    const EncoderPass pass = model.encoder.forward(votes, x, model.prior, nn::Mode::Train, rng);
    const Matrix logits_f = model.downstream.forward(x, nn::Mode::Train, rng);
    const LossResult loss = compute_loss(model.loss, logits_f, pass.logits, model.prior);
    if (!std::isfinite(loss.value)) return loss.value;

    if (hooks.on_batch) {
      BatchDiagnostics diag;
      diag.epoch = epoch;
      diag.batch = batch_no;
      diag.loss = &loss;
      for (const auto& term : loss.terms) {
        model.encoder.body().zero_grad();
        model.downstream.zero_grad();
        model.encoder.backward(pass, votes, term.grad_encoder);
        model.downstream.backward(term.grad_downstream);
        diag.term_encoder_grad_max.push_back(max_abs_grad(model.encoder.body()));
        diag.term_downstream_grad_max.push_back(max_abs_grad(model.downstream));
      }
      hooks.on_batch(diag);
    }

    model.encoder.body().zero_grad();
    model.downstream.zero_grad();
    model.encoder.backward(pass, votes, loss.grad_encoder);
    model.downstream.backward(loss.grad_downstream);
    enc_opt.step(model.encoder.body().parameters());
    down_opt.step(model.downstream.parameters());
    return loss.value;
  };
  auto predict = [&](const Matrix& x) { return model.predict(x); };
  auto snapshot = [&] {
    best_enc = model.encoder.body().state();
    best_down = model.downstream.state();
  };
  auto restore = [&] {
    model.encoder.body().load_state(best_enc);
    model.downstream.load_state(best_down);
  };

  Loop{ds, cfg}.run(result.history, result.best_epoch, result.best_val_metric, step, predict, snapshot, restore);
  result.model = std::move(model);
  return result;
}

DownstreamResult train_downstream(nn::Mlp net, const data::Dataset& ds, const Matrix& train_targets,
                                  const TrainConfig& cfg) {
  const auto& train_rows = ds.split().train;
  if (train_targets.rows() != static_cast<Index>(train_rows.size())) {
    throw InvalidInput("train_downstream: need one target row per training index");
  }
  if (train_targets.cols() != net.output_dim()) throw InvalidInput("train_downstream: target width mismatch");
  if (ds.dims() != net.input_dim()) throw InvalidInput("train_downstream: feature width does not match the model");

  DownstreamResult result;
  const Matrix x_train = ds.rows(train_rows);
  Rng rng(derive_seed(cfg.seed, 4));
  nn::Adam opt({cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
  std::vector<double> best;

  auto step = [&](std::span<const Index> positions, int, int) {
    const Matrix x = gather(x_train, positions);
    const Matrix targets = gather(train_targets, positions);
    const Matrix logits = net.forward(x, nn::Mode::Train, rng);
    const LossTerm loss = soft_target_cross_entropy(logits, targets);
    if (!std::isfinite(loss.value)) return loss.value;
    net.zero_grad();
    net.backward(loss.grad_downstream);
    opt.step(net.parameters());
    return loss.value;
  };
  auto predict = [&](const Matrix& x) { return nn::softmax(net.predict(x)); };
  auto snapshot = [&] { best = net.state(); };
  auto restore = [&] { net.load_state(best); };

  Loop{ds, cfg}.run(result.history, result.best_epoch, result.best_val_metric, step, predict, snapshot, restore);
  result.net = std::move(net);
  return result;
}

}  // namespace wslab::weasel
