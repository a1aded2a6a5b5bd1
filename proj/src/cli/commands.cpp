#include "wslab/cli/commands.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "wslab/cli/config.hpp"
#include "wslab/data/io.hpp"
#include "wslab/eval/metrics.hpp"
#include "wslab/labelmodels/majority_vote.hpp"
#include "wslab/labelmodels/naive_bayes.hpp"
#include "wslab/labelmodels/triplet.hpp"
#include "wslab/nn/functional.hpp"

namespace wslab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

fs::path prepare_output(const json& config, const std::string& subcommand) {
  const fs::path dir = resolve_output(config, subcommand);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InvalidInput("cannot create output directory " + dir.string());
  return dir;
}

std::uint64_t seed_of(const json& config) {
  if (!config.contains("seed")) return 0;
  if (!config.at("seed").is_number_unsigned()) throw InvalidInput("'seed' must be a non-negative integer");
  return config.at("seed").get<std::uint64_t>();
}

const json& block(const json& config, const char* key) {
  static const json empty = json::object();
  return config.contains(key) ? config.at(key) : empty;
}

json data_snapshot(const json& config) {
  if (!config.contains("data")) throw InvalidInput("'data' block is required");
  const DataConfig d = parse_data(config.at("data"));
  if (d.generate) return {{"generate", to_json(*d.generate)}};
  return config.at("data");
}

Matrix load_probability_csv(const fs::path& path) {
  if (!fs::exists(path)) throw InvalidInput("file not found: " + path.string());
  return data::load_features(path);
}

json metrics_block(const eval::MetricsReport& r) { return eval::to_json(r); }

}  // namespace

fs::path cmd_synth(const json& config, std::ostream& log) {
  require_keys(config, {"output", "seed", "blobs", "lfs"}, "synth");
  const std::uint64_t seed = seed_of(config);
  json gen = {{"lfs", config.contains("lfs") ? config.at("lfs") : json::array()}};
  if (config.contains("blobs")) gen["blobs"] = config.at("blobs");
  const GeneratorConfig g = parse_generator(gen);
  const fs::path dir = prepare_output(config, "synth");

  DataConfig dc;
  dc.generate = g;
  const LoadedData loaded = load_data(dc, seed);
  data::save_features(dir / "features.csv", loaded.dataset.features());
  data::save_labels(dir / "labels.csv", loaded.dataset.labels());
  data::save_label_matrix(dir / "label_matrix.csv", loaded.matrix);

  json manifest = to_json(g);
  manifest["seed"] = seed;
  manifest["output"] = dir.string();
  write_json(dir / "manifest.json", manifest);

  json coverage = json::array();
  for (Index j = 0; j < loaded.matrix.num_lfs(); ++j) {
    const Index idx[] = {j};
    coverage.push_back(data::coverage(loaded.matrix.select_columns(idx)));
  }
  write_json(dir / "stats.json", {{"rows", loaded.dataset.size()},
                                  {"lfs", loaded.matrix.num_lfs()},
                                  {"coverage", data::coverage(loaded.matrix)},
                                  {"lf_coverage", coverage}});
  log << "synth: " << loaded.dataset.size() << " rows, " << loaded.matrix.num_lfs() << " LFs, coverage "
      << data::format_coverage_percent(data::coverage(loaded.matrix)) << "% -> " << dir.string() << "\n";
  return dir;
}

fs::path cmd_train(const json& config, std::ostream& log) {
  require_keys(config, {"output", "seed", "data", "model", "train"}, "train");
  const std::uint64_t seed = seed_of(config);
  const DataConfig dc = parse_data(block(config, "data"));
  const weasel::WeaselConfig model_cfg = parse_model(block(config, "model"));
  const TrainBlock tb = parse_train(block(config, "train"));
  const fs::path dir = prepare_output(config, "train");
  write_json(dir / "weasel.config.json", {{"output", dir.string()},
                                          {"seed", seed},
                                          {"data", data_snapshot(config)},
                                          {"model", to_json(model_cfg)},
                                          {"train", to_json(tb)}});

  const LoadedData loaded = load_data(dc, seed);
  const data::CoveredSubset sub = data::covered_subset(loaded.matrix, loaded.dataset);
  const data::Dataset& ds = sub.dataset;

  json lr_results = json::array();
  std::optional<weasel::TrainResult> best;
  double best_lr = tb.lr_grid.front();
  double best_score = 0.0;
  for (const double lr : tb.lr_grid) {
    weasel::TrainConfig cfg = tb.train;
    cfg.lr = lr;
    cfg.seed = seed;
    auto init = weasel::make_weasel_model(model_cfg, loaded.matrix.num_lfs(), loaded.matrix.num_classes(), ds.dims(),
                                          derive_seed(seed, 3));
    auto result = weasel::train(std::move(init), sub.matrix, ds, cfg);
    const double score = result.best_val_metric.value_or(0.0);
    lr_results.push_back({{"lr", lr}, {"best_epoch", result.best_epoch},
                          {"best_val_metric", result.best_val_metric ? json(*result.best_val_metric) : json(nullptr)}});
    log << "train: lr " << lr << " best epoch " << result.best_epoch << " val " << score << "\n";
    if (!best || score > best_score) {
      best_score = score;
      best_lr = lr;
      best = std::move(result);
    }
  }

  std::string history;
  for (const auto& rec : best->history) history += weasel::to_json(rec).dump() + "\n";
  write_text(dir / "weasel.history.jsonl", history);
  write_json(dir / "weasel.checkpoint.json", weasel::checkpoint_json(best->model));

  json metrics = {{"model", "weasel"},
                  {"loss", weasel::to_string(model_cfg.loss)},
                  {"selected_lr", best_lr},
                  {"lr_results", lr_results},
                  {"best_epoch", best->best_epoch},
                  {"seed", seed}};
  const auto& split = ds.split();
  if (!split.test.empty() && ds.has_labels()) {
    auto predict = [&](const Matrix& x) { return best->model.predict(x); };
    const Matrix val = split.val.empty() ? Matrix(0, ds.num_classes()) : predict(ds.rows(split.val));
    metrics["test"] = metrics_block(
        eval::tuned_report(val, ds.labels_at(split.val), predict(ds.rows(split.test)), ds.labels_at(split.test), seed));
  }
  write_json(dir / "weasel.metrics.json", metrics);
  if (metrics.contains("test")) log << "train: test auc " << metrics["test"]["auc"].get<double>() << "\n";
  return dir;
}

fs::path cmd_baseline(const json& config, std::ostream& log) {
  require_keys(config, {"output", "seed", "data", "method", "train_downstream", "model", "train"}, "baseline");
  const std::uint64_t seed = seed_of(config);
  const DataConfig dc = parse_data(block(config, "data"));
  if (!config.contains("method") || !config.at("method").is_string()) throw InvalidInput("baseline: 'method' is required");
  const std::string method = config.at("method").get<std::string>();
  const experiments::ModelKind kind = experiments::model_kind_from_string(method);
  if (kind == experiments::ModelKind::Weasel || kind == experiments::ModelKind::SupervisedCeiling)
    throw InvalidInput("baseline: method must be majority, nb-em, triplet-mean or triplet-median");
  const bool downstream = config.value("train_downstream", false);
  const weasel::WeaselConfig model_cfg = parse_model(block(config, "model"));
  const TrainBlock tb = parse_train(block(config, "train"));

  const LoadedData loaded = load_data(dc, seed);
  const data::LabelMatrix& lm = loaded.matrix;
  const data::Dataset& ds = loaded.dataset;
  const std::vector<double>& prior = ds.class_balance();

  const data::CoveredSubset sub = data::covered_subset(lm, ds);
  const data::LabelMatrix train_lm = lm.select_rows(sub.dataset.split().train);

  Matrix soft;
  json label_model;
  switch (kind) {
    case experiments::ModelKind::Majority:
      soft = labelmodels::majority_vote_soft(lm, prior);
      label_model = {{"method", method}};
      break;
    case experiments::ModelKind::NbEm: {
      const auto model = labelmodels::nb_em_fit(train_lm, prior);
      soft = labelmodels::nb_posterior(model, lm);
      label_model = labelmodels::to_json(model);
      break;
    }
    default: {
      const auto agg = kind == experiments::ModelKind::TripletMean ? labelmodels::TripletAggregation::Mean
                                                                    : labelmodels::TripletAggregation::Median;
      const auto est = labelmodels::triplet_fit(train_lm, agg);
      soft = labelmodels::triplet_posterior(est, lm, prior);
      label_model = labelmodels::to_json(est);
      if (!est.fallbacks.empty())
        log << "baseline: warning: " << est.fallbacks.size() << " LF(s) had no admissible triplet\n";
      break;
    }
  }

  const fs::path dir = prepare_output(config, "baseline");
  write_json(dir / (method + ".config.json"), {{"output", dir.string()},
                                               {"seed", seed},
                                               {"data", data_snapshot(config)},
                                               {"method", method},
                                               {"train_downstream", downstream},
                                               {"model", to_json(model_cfg)},
                                               {"train", to_json(tb)}});
  data::save_soft_labels(dir / (method + ".soft_labels.csv"), soft);
  write_json(dir / (method + ".label_model.json"), label_model);

  json metrics = {{"model", method}, {"seed", seed}};
  const auto& train_rows = sub.dataset.split().train;
  if (ds.has_labels()) {
    Matrix train_soft(static_cast<Index>(train_rows.size()), soft.cols());
    for (std::size_t i = 0; i < train_rows.size(); ++i) train_soft.row(static_cast<Index>(i)) = soft.row(train_rows[i]);
    metrics["label_model_train"] = metrics_block(eval::make_report(train_soft, ds.labels_at(train_rows), std::nullopt, seed));
  }
  if (downstream) {
    experiments::Protocol protocol;
    protocol.weasel = model_cfg;
    protocol.train = tb.train;
    protocol.lr_grid = tb.lr_grid;
    metrics["test"] = metrics_block(experiments::run_model(kind, lm, ds, protocol, seed));
    log << "baseline: " << method << " downstream test auc " << metrics["test"]["auc"].get<double>() << "\n";
  }
  write_json(dir / (method + ".metrics.json"), metrics);
  return dir;
}

fs::path cmd_robustness(const json& config, std::ostream& log) {
  const experiments::RobustnessSpec spec = parse_robustness(config);
  const fs::path dir = prepare_output(config, "robustness");
  json snapshot = config;
  snapshot["output"] = dir.string();
  write_json(dir / "config.json", snapshot);
  const auto table = experiments::run_robustness(spec);
  experiments::write_results(table, dir);
  log << "robustness: " << table.rows.size() << " rows -> " << (dir / "results.csv").string() << "\n";
  return dir;
}

fs::path cmd_ablate(const json& config, std::ostream& log) {
  const experiments::AblationSpec spec = parse_ablation(config);
  const fs::path dir = prepare_output(config, "ablate");
  json snapshot = config;
  snapshot["output"] = dir.string();
  write_json(dir / "config.json", snapshot);
  const auto table = experiments::run_ablation_grid(spec);
  experiments::write_results(table, dir);
  log << "ablate: " << table.rows.size() << " rows -> " << (dir / "results.csv").string() << "\n";
  return dir;
}

fs::path cmd_eval(const json& config, std::ostream& log) {
  require_keys(config, {"output", "seed", "predictions", "labels", "val_predictions", "val_labels", "threshold"}, "eval");
  auto path = [&](const char* key) -> fs::path {
    if (!config.contains(key)) return {};
    if (!config.at(key).is_string()) throw InvalidInput(std::string("eval: '") + key + "' must be a path");
    return config.at(key).get<std::string>();
  };
  const fs::path pred_path = path("predictions");
  const fs::path label_path = path("labels");
  if (pred_path.empty() || label_path.empty()) throw InvalidInput("eval: 'predictions' and 'labels' are required");
  const Matrix probs = load_probability_csv(pred_path);
  if (!fs::exists(label_path)) throw InvalidInput("file not found: " + label_path.string());
  const auto labels = data::load_labels(label_path);
  std::optional<double> threshold;
  if (config.contains("threshold")) threshold = config.at("threshold").get<double>();
  const fs::path val_pred = path("val_predictions");
  const fs::path val_lab = path("val_labels");
  if (!val_pred.empty() != !val_lab.empty()) throw InvalidInput("eval: give both validation files or neither");
  if (threshold && !val_pred.empty()) throw InvalidInput("eval: give 'threshold' or validation files, not both");
  const std::uint64_t seed = seed_of(config);

  eval::MetricsReport report;
  if (!val_pred.empty()) {
    if (!fs::exists(val_lab)) throw InvalidInput("file not found: " + val_lab.string());
    report = eval::tuned_report(load_probability_csv(val_pred), data::load_labels(val_lab), probs, labels, seed);
  } else {
    report = eval::make_report(probs, labels, threshold, seed);
  }
  const fs::path dir = prepare_output(config, "eval");
  json snapshot = config;
  snapshot["output"] = dir.string();
  write_json(dir / "eval.config.json", snapshot);
  write_json(dir / "eval.metrics.json", metrics_block(report));
  log << "eval: auc " << report.auc << " f1 " << report.f1 << "\n";
  return dir;
}

namespace {

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read config " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidInput("config " + path + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw InvalidInput("config " + path + " must be a JSON object");
  return doc;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weak-supervision end-to-end learner and baselines"};
  app.require_subcommand(1);

  struct Flags {
    std::string config;
    std::string output;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<std::string> loss;
    std::optional<double> lr;
    std::optional<int> epochs;
    std::optional<std::string> method;
    std::optional<std::string> experiment;
    bool downstream = false;
  } f;

  std::map<std::string, CLI::App*> subs;
  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("-c,--config", f.config, "JSON config file");
    s->add_option("-o,--output", f.output, "output directory");
    s->add_option("--seed", f.seed, "master seed");
    subs[name] = s;
    return s;
  };
  add("synth", "generate blobs and synthetic LF votes");
  CLI::App* train = add("train", "train the end-to-end model");
  train->add_option("--loss", f.loss, "loss variant");
  train->add_option("--lr", f.lr, "single learning rate instead of the grid");
  train->add_option("--epochs", f.epochs, "maximum epochs");
  CLI::App* baseline = add("baseline", "run a label-model baseline");
  baseline->add_option("--method", f.method, "majority | nb-em | triplet-mean | triplet-median");
  baseline->add_flag("--train-downstream", f.downstream, "also train the downstream model on the labels");
  baseline->add_option("--lr", f.lr, "single learning rate instead of the grid");
  baseline->add_option("--epochs", f.epochs, "maximum epochs");
  CLI::App* robust = add("robustness", "robustness experiment grid");
  robust->add_option("--experiment", f.experiment, "adversarial-duplication | random-duplication | independent-random");
  robust->add_option("--jobs", f.jobs, "parallel experiment cells");
  robust->add_option("--epochs", f.epochs, "maximum epochs");
  CLI::App* ablate = add("ablate", "one-factor-at-a-time ablation grid");
  ablate->add_option("--jobs", f.jobs, "parallel experiment cells");
  ablate->add_option("--epochs", f.epochs, "maximum epochs");
  add("eval", "score saved predictions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidInput;
  }

  std::string name;
  for (const auto& [n, s] : subs)
    if (s->parsed()) name = n;

  try {
    json config = load_config(f.config);
    if (!f.output.empty()) config["output"] = f.output;
    if (f.seed) config["seed"] = *f.seed;
    if (f.jobs) config["jobs"] = *f.jobs;
    if (f.method) config["method"] = *f.method;
    if (f.experiment) config["experiment"] = *f.experiment;
    if (f.downstream) config["train_downstream"] = true;
    if (f.loss) config["model"]["loss"] = *f.loss;
    if (f.lr) {
      config["train"]["lr"] = *f.lr;
      config["train"].erase("lr_grid");
    }
    if (f.epochs) config["train"]["max_epochs"] = *f.epochs;

    if (name == "synth") cmd_synth(config, out);
    else if (name == "train") cmd_train(config, out);
    else if (name == "baseline") cmd_baseline(config, out);
    else if (name == "robustness") cmd_robustness(config, out);
    else if (name == "ablate") cmd_ablate(config, out);
    else cmd_eval(config, out);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const json::exception& e) {
    err << "error: invalid configuration: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kOk;
}

}  // namespace wslab::cli
