#include "wslab/experiments/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <thread>

#include "wslab/labelmodels/majority_vote.hpp"
#include "wslab/labelmodels/naive_bayes.hpp"
#include "wslab/labelmodels/triplet.hpp"
#include "wslab/nn/functional.hpp"

namespace wslab::experiments {

namespace {

constexpr std::uint64_t kDataStream = 101;
constexpr std::uint64_t kLfStream = 102;
constexpr std::uint64_t kTrainStream = 103;
constexpr int kLargeGrid = 100;

const std::vector<ModelKind> kAllModels{ModelKind::Weasel,      ModelKind::Majority,      ModelKind::NbEm,
                                        ModelKind::TripletMean, ModelKind::TripletMedian, ModelKind::SupervisedCeiling};

}  // namespace

std::string to_string(RobustnessKind k) {
  switch (k) {
    case RobustnessKind::AdversarialDuplication: return "adversarial-duplication";
    case RobustnessKind::RandomDuplication: return "random-duplication";
    case RobustnessKind::IndependentRandom: return "independent-random";
  }
  return "unknown";
}

RobustnessKind robustness_kind_from_string(const std::string& name) {
  for (const auto k : {RobustnessKind::AdversarialDuplication, RobustnessKind::RandomDuplication,
                       RobustnessKind::IndependentRandom})
    if (to_string(k) == name) return k;
  throw InvalidInput("unknown robustness experiment '" + name + "'");
}

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Weasel: return "weasel";
    case ModelKind::Majority: return "majority";
    case ModelKind::NbEm: return "nb-em";
    case ModelKind::TripletMean: return "triplet-mean";
    case ModelKind::TripletMedian: return "triplet-median";
    case ModelKind::SupervisedCeiling: return "supervised-ceiling";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  for (const auto k : kAllModels)
    if (to_string(k) == name) return k;
  throw InvalidInput("unknown model '" + name + "'");
}

data::BlobSpec desk_blobs() {
  data::BlobSpec b;
  b.n = 8000;
  b.dims = 10;
  b.num_classes = 2;
  b.separation = 6.0;
  b.split = std::array<Index, 3>{5000, 1000, 2000};
  return b;
}

std::vector<data::SyntheticLfSpec> default_adversarial_base() {
  const double acc[] = {0.80, 0.75, 0.85, 0.80, 0.78, 0.82, 0.80, 0.76, 0.84, 0.80};
  const double cov[] = {0.30, 0.25, 0.35, 0.20, 0.30, 0.40, 0.25, 0.30, 0.20, 0.35};
  std::vector<data::SyntheticLfSpec> specs;
  for (int j = 0; j < 10; ++j) specs.push_back(data::SyntheticLfSpec::unipolar(j % 2 == 0 ? 2 : 1, acc[j], cov[j]));
  return specs;
}

void Protocol::validate() const {
  train.validate();
  if (lr_grid.empty()) throw InvalidInput("protocol: empty learning-rate grid");
  for (const double lr : lr_grid)
    if (!(lr > 0.0)) throw InvalidInput("protocol: learning rates must be positive");
  if (seeds.empty()) throw InvalidInput("protocol: no seeds");
  if (jobs < 1) throw InvalidInput("protocol: jobs must be at least 1");
  if (!blobs.split) throw InvalidInput("protocol: the blob spec needs a train/val/test split");
  if ((*blobs.split)[2] == 0) throw InvalidInput("protocol: empty test split");
}

void RobustnessSpec::validate() const {
  protocol.validate();
  if (models.empty()) throw InvalidInput("robustness: no models");
  if (duplicate_counts.empty()) throw InvalidInput("robustness: empty grid");
  for (const int k : duplicate_counts) {
    if (k < 0) throw InvalidInput("robustness: counts must be non-negative");
    if (k > kLargeGrid && !allow_large_grid) {
      throw InvalidInput("robustness: count " + std::to_string(k) + " exceeds " + std::to_string(kLargeGrid) +
                         "; enable the large-grid flag to run it");
    }
  }
  if (kind == RobustnessKind::AdversarialDuplication && protocol.blobs.num_classes != 2)
    throw InvalidInput("robustness: the adversarial experiment needs C = 2");
  if (kind == RobustnessKind::AdversarialDuplication) {
    const auto base = base_lf_specs.empty() ? default_adversarial_base() : base_lf_specs;
    if (adversarial_source < 0 || adversarial_source >= static_cast<Index>(base.size()))
      throw InvalidInput("robustness: adversarial source outside the base LF set");
  }
}

std::vector<data::SyntheticLfSpec> scenario_lfs(const RobustnessSpec& spec, int count) {
  using data::SyntheticLfSpec;
  std::vector<SyntheticLfSpec> specs;
  switch (spec.kind) {
    case RobustnessKind::AdversarialDuplication: {
      specs = spec.base_lf_specs.empty() ? default_adversarial_base() : spec.base_lf_specs;
      const auto adversarial = static_cast<Index>(specs.size());
      specs.push_back(SyntheticLfSpec::adversarial_flip_of(spec.adversarial_source));
      for (int i = 0; i < count; ++i) specs.push_back(SyntheticLfSpec::duplicate_of(adversarial));
      break;
    }
    case RobustnessKind::RandomDuplication:
      // lambda_1 = y*, then `count` identical copies of one coin flip
      specs.push_back(SyntheticLfSpec::independent(1.0, 1.0));
      for (int i = 0; i < count; ++i)
        specs.push_back(i == 0 ? SyntheticLfSpec::coin_flip() : SyntheticLfSpec::duplicate_of(1));
      break;
    case RobustnessKind::IndependentRandom:
      specs.push_back(SyntheticLfSpec::independent(1.0, 1.0));
      for (int i = 0; i < count; ++i) specs.push_back(SyntheticLfSpec::coin_flip());
      break;
  }
  return specs;
}

std::vector<double> ResultsTable::auc_of(const std::string& model, const std::string& grid) const {
  std::vector<double> out;
  for (const auto& r : rows)
    if (r.model == model && r.grid == grid) out.push_back(r.auc);
  return out;
}

namespace {

// Runs `fit(lr)` for every learning rate and keeps the result with the
// best validation score (first on ties).
template <typename Fit>
auto best_over_lr(const Protocol& protocol, Fit fit) {
  auto best = fit(protocol.lr_grid.front());
  for (std::size_t i = 1; i < protocol.lr_grid.size(); ++i) {
    auto candidate = fit(protocol.lr_grid[i]);
    if (candidate.first > best.first) best = std::move(candidate);
  }
  return best.second;
}

double selection_score(const std::optional<double>& best_val, const std::function<Matrix(const Matrix&)>& predict,
                       const data::Dataset& ds, const weasel::TrainConfig& cfg) {
  if (best_val) return *best_val;
  const auto& val = ds.split().val;
  if (val.empty()) return 0.0;
  const auto metric = cfg.early_stopping == weasel::EarlyStopping::None ? weasel::EarlyStopping::ValAuc
                                                                         : cfg.early_stopping;
  return weasel::validation_score(predict(ds.rows(val)), ds.labels_at(val), metric);
}

eval::MetricsReport report_for(const std::function<Matrix(const Matrix&)>& predict, const data::Dataset& ds,
                               std::uint64_t seed) {
  const auto& split = ds.split();
  const Matrix val_probs = split.val.empty() ? Matrix(0, ds.num_classes()) : predict(ds.rows(split.val));
  return eval::tuned_report(val_probs, ds.labels_at(split.val), predict(ds.rows(split.test)),
                            ds.labels_at(split.test), seed);
}

// Downstream classifier on fixed soft targets for the training rows of `ds`.
eval::MetricsReport downstream_on_targets(const Matrix& targets, const data::Dataset& ds, const Protocol& protocol,
                                          std::uint64_t seed) {
  const auto& wc = protocol.weasel;
  nn::Mlp best = best_over_lr(protocol, [&](double lr) {
    weasel::TrainConfig cfg = protocol.train;
    cfg.lr = lr;
    cfg.seed = seed;
    cfg.record_test = false;
    auto net = weasel::make_downstream(wc.downstream, ds.dims(), ds.num_classes(), wc.dropout, seed);
    auto result = weasel::train_downstream(std::move(net), ds, targets, cfg);
    auto predict = [&](const Matrix& x) { return nn::softmax(result.net.predict(x)); };
    const double score = selection_score(result.best_val_metric, predict, ds, cfg);
    return std::make_pair(score, std::move(result.net));
  });
  return report_for([&](const Matrix& x) { return nn::softmax(best.predict(x)); }, ds, seed);
}

}  // namespace

eval::MetricsReport run_model(ModelKind model, const data::LabelMatrix& lm, const data::Dataset& ds,
                              const Protocol& protocol, std::uint64_t seed) {
  const std::vector<double>& prior = ds.class_balance();
  if (model == ModelKind::SupervisedCeiling) {
    // ground truth only; the label matrix is never consulted
    return downstream_on_targets(labelmodels::one_hot_labels(ds.labels_at(ds.split().train), ds.num_classes()), ds,
                                 protocol, seed);
  }

  const data::CoveredSubset sub = data::covered_subset(lm, ds);
  const auto& train_rows = sub.dataset.split().train;

  if (model == ModelKind::Weasel) {
    weasel::WeaselModel best = best_over_lr(protocol, [&](double lr) {
      weasel::TrainConfig cfg = protocol.train;
      cfg.lr = lr;
      cfg.seed = seed;
      cfg.record_test = false;
      auto init = weasel::make_weasel_model(protocol.weasel, lm.num_lfs(), lm.num_classes(), ds.dims(), seed);
      auto result = weasel::train(std::move(init), sub.matrix, sub.dataset, cfg);
      auto predict = [&](const Matrix& x) { return result.model.predict(x); };
      const double score = selection_score(result.best_val_metric, predict, sub.dataset, cfg);
      return std::make_pair(score, std::move(result.model));
    });
    return report_for([&](const Matrix& x) { return best.predict(x); }, sub.dataset, seed);
  }

  const data::LabelMatrix train_lm = sub.matrix.select_rows(train_rows);
  Matrix targets;
  switch (model) {
    case ModelKind::Majority:
      targets = labelmodels::one_hot_labels(labelmodels::majority_vote_hard(train_lm, prior, seed), lm.num_classes());
      break;
    case ModelKind::NbEm:
      targets = labelmodels::nb_posterior(labelmodels::nb_em_fit(train_lm, prior), train_lm);
      break;
    case ModelKind::TripletMean:
    case ModelKind::TripletMedian: {
      const auto agg = model == ModelKind::TripletMean ? labelmodels::TripletAggregation::Mean
                                                       : labelmodels::TripletAggregation::Median;
      targets = labelmodels::triplet_posterior(labelmodels::triplet_fit(train_lm, agg), train_lm, prior);
      break;
    }
    default: throw std::logic_error("run_model: unhandled model");
  }
  return downstream_on_targets(targets, sub.dataset, protocol, seed);
}

namespace {

struct Cell {
  std::size_t seed_index = 0;
  std::size_t grid_index = 0;
  ModelKind model = ModelKind::Weasel;
  std::string variant;  // ablation only
};

struct CellOutcome {
  std::optional<eval::MetricsReport> report;
  std::string skip_reason;
};

// Runs cells on `jobs` threads; results are indexed by cell so the output
// does not depend on scheduling.
std::vector<CellOutcome> run_cells(const std::vector<Cell>& cells, int jobs,
                                   const std::function<CellOutcome(const Cell&)>& work) {
  std::vector<CellOutcome> out(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        out[i] = work(cells[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), cells.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::optional<std::string> precondition_failure(ModelKind model, const data::LabelMatrix& lm) {
  if (model != ModelKind::TripletMean && model != ModelKind::TripletMedian) return std::nullopt;
  if (lm.num_classes() != 2) return "triplet needs C = 2";
  if (lm.num_lfs() < 3) return "triplet needs at least 3 LFs";
  return std::nullopt;
}

data::Dataset replicate_dataset(const Protocol& protocol, std::uint64_t seed) {
  return data::generate_blobs(protocol.blobs, derive_seed(seed, kDataStream));
}

std::uint64_t train_seed(std::uint64_t seed, std::uint64_t slot) { return derive_seed(seed, kTrainStream, slot); }

ResultsTable run_grid(const RobustnessSpec& spec, const std::string& grid_name) {
  spec.validate();
  const Protocol& protocol = spec.protocol;
  for (const int k : spec.duplicate_counts)
    if (k > kLargeGrid) std::cerr << "warning: grid value " << k << " is beyond desk scale and will run slowly\n";

  std::vector<Cell> cells;
  for (std::size_t s = 0; s < protocol.seeds.size(); ++s) {
    for (std::size_t g = 0; g < spec.duplicate_counts.size(); ++g) {
      for (const ModelKind model : spec.models) {
        // the ceiling ignores LFs, so one run per seed serves every grid value
        if (model == ModelKind::SupervisedCeiling && g > 0) continue;
        cells.push_back({s, g, model, {}});
      }
    }
  }

  const auto outcomes = run_cells(cells, protocol.jobs, [&](const Cell& cell) {
    const std::uint64_t seed = protocol.seeds[cell.seed_index];
    const data::Dataset ds = replicate_dataset(protocol, seed);
    const auto specs = scenario_lfs(spec, spec.duplicate_counts[cell.grid_index]);
    const data::LabelMatrix lm = data::generate_lfs(ds, specs, derive_seed(seed, kLfStream));
    CellOutcome outcome;
    if (auto reason = precondition_failure(cell.model, lm)) {
      outcome.skip_reason = *reason;
      return outcome;
    }
    outcome.report = run_model(cell.model, lm, ds, protocol, train_seed(seed, static_cast<std::uint64_t>(cell.model)));
    return outcome;
  });

  ResultsTable table;
  table.experiment = to_string(spec.kind);
  table.grid_name = grid_name;
  // emit rows in (model, grid, seed) order
  for (const ModelKind model : spec.models) {
    for (std::size_t g = 0; g < spec.duplicate_counts.size(); ++g) {
      const std::string grid = std::to_string(spec.duplicate_counts[g]);
      for (std::size_t s = 0; s < protocol.seeds.size(); ++s) {
        const std::size_t source_g = model == ModelKind::SupervisedCeiling ? 0 : g;
        for (std::size_t c = 0; c < cells.size(); ++c) {
          const Cell& cell = cells[c];
          if (cell.model != model || cell.grid_index != source_g || cell.seed_index != s) continue;
          const auto& o = outcomes[c];
          if (o.report) {
            table.rows.push_back({to_string(model), grid, protocol.seeds[s], o.report->auc, o.report->f1});
          } else {
            table.skipped.push_back({to_string(model), grid, protocol.seeds[s], o.skip_reason});
          }
        }
      }
    }
  }
  return table;
}

}  // namespace

ResultsTable run_adversarial_duplication(const RobustnessSpec& spec) {
  if (spec.kind != RobustnessKind::AdversarialDuplication)
    throw InvalidInput("run_adversarial_duplication: spec is for " + to_string(spec.kind));
  return run_grid(spec, "k");
}

ResultsTable run_recovery(const RobustnessSpec& spec) {
  if (spec.kind != RobustnessKind::RandomDuplication) throw InvalidInput("run_recovery: spec is for " + to_string(spec.kind));
  return run_grid(spec, "k");
}

ResultsTable run_independent_random(const RobustnessSpec& spec) {
  if (spec.kind != RobustnessKind::IndependentRandom)
    throw InvalidInput("run_independent_random: spec is for " + to_string(spec.kind));
  return run_grid(spec, "j");
}

ResultsTable run_robustness(const RobustnessSpec& spec) {
  switch (spec.kind) {
    case RobustnessKind::AdversarialDuplication: return run_adversarial_duplication(spec);
    case RobustnessKind::RandomDuplication: return run_recovery(spec);
    case RobustnessKind::IndependentRandom: return run_independent_random(spec);
  }
  throw InvalidInput("unknown robustness experiment");
}

std::vector<std::string> ablation_axes() {
  return {"no-features",   "linear-encoder",    "deep-encoder", "tau1",
          "tau2",          "no-stopgrad",       "asymmetric-ce", "l1",
          "squared-hellinger", "mig",           "losses",       "sigmoid-accuracies",
          "relu-accuracies", "tanh-accuracies"};
}

std::vector<AblationVariant> expand_ablation(const weasel::WeaselConfig& base, const std::vector<std::string>& axes,
                                             Index num_lfs) {
  std::vector<AblationVariant> out{{"base", base}};
  auto add = [&](std::string name, const std::function<void(weasel::WeaselConfig&)>& change) {
    // overlapping axes ("losses" and "l1", say) produce each variant once
    for (const auto& v : out)
      if (v.name == name) return;
    weasel::WeaselConfig c = base;
    change(c);
    out.push_back({std::move(name), std::move(c)});
  };
  auto add_loss = [&](weasel::LossKind kind) {
    add("loss=" + weasel::to_string(kind), [kind](weasel::WeaselConfig& c) { c.loss = kind; });
  };
  for (const auto& axis : axes) {
    if (axis == "no-features") {
      add(axis, [](weasel::WeaselConfig& c) { c.encoder.use_features = false; });
    } else if (axis == "linear-encoder") {
      add(axis, [](weasel::WeaselConfig& c) { c.encoder.hidden.clear(); });
    } else if (axis == "deep-encoder") {
      add(axis, [](weasel::WeaselConfig& c) { c.encoder.hidden = {70, 70, 70, 70}; });
    } else if (axis == "tau1") {
      for (const double t : {0.1, 1.0 / 3.0, 3.0}) {
        char name[32];
        std::snprintf(name, sizeof name, "tau1=%.3g", t);
        add(name, [t](weasel::WeaselConfig& c) { c.encoder.inverse_temperature = t; });
      }
    } else if (axis == "tau2") {
      add("tau2=1", [](weasel::WeaselConfig& c) { c.encoder.scale = 1.0; });
      add("tau2=m", [num_lfs](weasel::WeaselConfig& c) { c.encoder.scale = static_cast<double>(num_lfs); });
    } else if (axis == "no-stopgrad") {
      add_loss(weasel::LossKind::CeNoStopGrad);
    } else if (axis == "asymmetric-ce") {
      add_loss(weasel::LossKind::AsymmetricCe);
    } else if (axis == "l1") {
      add_loss(weasel::LossKind::L1);
    } else if (axis == "squared-hellinger") {
      add_loss(weasel::LossKind::SquaredHellinger);
    } else if (axis == "mig") {
      add_loss(weasel::LossKind::Mig);
    } else if (axis == "losses") {
      for (const auto k : {weasel::LossKind::CeNoStopGrad, weasel::LossKind::AsymmetricCe, weasel::LossKind::L1,
                           weasel::LossKind::SquaredHellinger, weasel::LossKind::Mig})
        add_loss(k);
    } else if (axis == "sigmoid-accuracies") {
      add(axis, [](weasel::WeaselConfig& c) { c.encoder.activation = weasel::AccuracyActivation::Sigmoid; });
    } else if (axis == "relu-accuracies") {
      add(axis, [](weasel::WeaselConfig& c) { c.encoder.activation = weasel::AccuracyActivation::Relu; });
    } else if (axis == "tanh-accuracies") {
      add(axis, [](weasel::WeaselConfig& c) { c.encoder.activation = weasel::AccuracyActivation::Tanh; });
    } else {
      throw InvalidInput("unknown ablation axis '" + axis + "'");
    }
  }
  return out;
}

ResultsTable run_ablation_grid(const AblationSpec& spec) {
  spec.protocol.validate();
  RobustnessSpec scenario;
  scenario.kind = spec.scenario;
  scenario.duplicate_counts = {spec.count};
  scenario.protocol = spec.protocol;
  scenario.validate();
  const Index num_lfs = static_cast<Index>(scenario_lfs(scenario, spec.count).size());
  const auto variants = expand_ablation(spec.protocol.weasel, spec.axes, num_lfs);
  const Protocol& protocol = spec.protocol;

  std::vector<Cell> cells;
  for (std::size_t v = 0; v < variants.size(); ++v)
    for (std::size_t s = 0; s < protocol.seeds.size(); ++s) cells.push_back({s, v, ModelKind::Weasel, variants[v].name});

  const auto outcomes = run_cells(cells, protocol.jobs, [&](const Cell& cell) {
    const std::uint64_t seed = protocol.seeds[cell.seed_index];
    const data::Dataset ds = replicate_dataset(protocol, seed);
    const data::LabelMatrix lm = data::generate_lfs(ds, scenario_lfs(scenario, spec.count), derive_seed(seed, kLfStream));
    Protocol variant_protocol = protocol;
    variant_protocol.weasel = variants[cell.grid_index].config;
    CellOutcome outcome;
    outcome.report = run_model(ModelKind::Weasel, lm, ds, variant_protocol,
                               train_seed(seed, static_cast<std::uint64_t>(ModelKind::Weasel)));
    return outcome;
  });

  ResultsTable table;
  table.experiment = "ablation/" + to_string(spec.scenario) + "/" + std::to_string(spec.count);
  table.grid_name = "variant";
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& r = *outcomes[c].report;
    table.rows.push_back({"weasel", cells[c].variant, protocol.seeds[cells[c].seed_index], r.auc, r.f1});
  }
  return table;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", v);
  return buf;
}

// (model, grid) pairs in order of first appearance.
std::vector<std::pair<std::string, std::string>> groups(const ResultsTable& table) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& r : table.rows) {
    std::pair<std::string, std::string> key{r.model, r.grid};
    if (std::find(out.begin(), out.end(), key) == out.end()) out.push_back(std::move(key));
  }
  return out;
}

nlohmann::json grid_value(const std::string& grid) {
  long long v = 0;
  const auto* end = grid.data() + grid.size();
  const auto [ptr, ec] = std::from_chars(grid.data(), end, v);
  if (ec == std::errc() && ptr == end) return v;
  return grid;
}

nlohmann::json stats(const std::vector<double>& values) {
  const auto s = eval::summarize(values);
  return {{"median", eval::median(values)},
          {"p25", eval::quantile(values, 0.25)},
          {"p75", eval::quantile(values, 0.75)},
          {"mean", s.mean},
          {"std", s.std}};
}

}  // namespace

std::string results_csv(const ResultsTable& table) {
  std::string out = "model,grid,seed,auc,f1\n";
  for (const auto& r : table.rows)
    out += r.model + "," + r.grid + "," + std::to_string(r.seed) + "," + fmt(r.auc) + "," + fmt(r.f1) + "\n";
  return out;
}

nlohmann::json summary_json(const ResultsTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [model, grid] : groups(table)) {
    std::vector<double> auc;
    std::vector<double> f1;
    for (const auto& r : table.rows) {
      if (r.model != model || r.grid != grid) continue;
      auc.push_back(r.auc);
      f1.push_back(r.f1);
    }
    rows.push_back({{"model", model},
                    {table.grid_name, grid_value(grid)},
                    {"n", auc.size()},
                    {"auc", stats(auc)},
                    {"f1", stats(f1)}});
  }
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : table.skipped)
    skipped.push_back({{"model", s.model}, {table.grid_name, grid_value(s.grid)}, {"seed", s.seed}, {"reason", s.reason}});
  return {{"experiment", table.experiment}, {"grid", table.grid_name}, {"groups", rows}, {"skipped", skipped}};
}

nlohmann::json plot_data_json(const ResultsTable& table) {
  nlohmann::json series = nlohmann::json::object();
  std::vector<std::string> model_order;
  for (const auto& [model, grid] : groups(table)) {
    const auto auc = table.auc_of(model, grid);
    series[model].push_back({{"x", grid_value(grid)},
                             {"median", eval::median(auc)},
                             {"p25", eval::quantile(auc, 0.25)},
                             {"p75", eval::quantile(auc, 0.75)}});
  }
  return {{"experiment", table.experiment}, {"x", table.grid_name}, {"metric", "auc"}, {"series", series}};
}

void write_results(const ResultsTable& table, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write " + (dir / name).string());
    out << text;
  };
  write("results.csv", results_csv(table));
  write("summary.json", summary_json(table).dump(2) + "\n");
  write("plot_data.json", plot_data_json(table).dump(2) + "\n");
}

}  // namespace wslab::experiments
