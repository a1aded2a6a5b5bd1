#include "wslab/cli/config.hpp"

#include <cstdlib>

#include "wslab/data/io.hpp"

namespace wslab::cli {

using nlohmann::json;

void require_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw InvalidInput(where + ": expected a JSON object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) throw InvalidInput(where + ": unknown key '" + item.key() + "'");
  }
}

namespace {

template <typename T>
T get(const json& obj, const char* key, const T& fallback, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(where + ": key '" + key + "' has the wrong type");
  }
}

std::optional<std::array<Index, 3>> parse_split(const json& obj, const std::string& where) {
  if (!obj.contains("split") || obj.at("split").is_null()) return std::nullopt;
  const auto v = get<std::vector<Index>>(obj, "split", {}, where);
  if (v.size() != 3) throw InvalidInput(where + ": split needs three sizes [train, val, test]");
  for (const Index x : v)
    if (x < 0) throw InvalidInput(where + ": split sizes must be non-negative");
  return std::array<Index, 3>{v[0], v[1], v[2]};
}

}  // namespace

data::BlobSpec parse_blobs(const json& doc) {
  const std::string where = "blobs";
  require_keys(doc, {"n", "dims", "num_classes", "separation", "balance", "split"}, where);
  data::BlobSpec b = experiments::desk_blobs();
  b.n = get<Index>(doc, "n", b.n, where);
  b.dims = get<Index>(doc, "dims", b.dims, where);
  b.num_classes = get<int>(doc, "num_classes", b.num_classes, where);
  b.separation = get<double>(doc, "separation", b.separation, where);
  b.balance = get<std::vector<double>>(doc, "balance", {}, where);
  if (doc.contains("split")) {
    b.split = parse_split(doc, where);
  } else if (doc.contains("n")) {
    b.split.reset();  // a custom size without a split means all-train
  }
  return b;
}

json to_json(const data::BlobSpec& b) {
  json j = {{"n", b.n}, {"dims", b.dims}, {"num_classes", b.num_classes}, {"separation", b.separation},
            {"balance", b.balance}};
  j["split"] = b.split ? json(std::vector<Index>(b.split->begin(), b.split->end())) : json(nullptr);
  return j;
}

data::SyntheticLfSpec parse_lf_spec(const json& doc) {
  const std::string where = "lf";
  require_keys(doc, {"mode", "accuracy", "coverage", "source", "polarity"}, where);
  const auto mode = get<std::string>(doc, "mode", "independent", where);
  data::SyntheticLfSpec s;
  if (mode == "independent") {
    s = data::SyntheticLfSpec::independent(get<double>(doc, "accuracy", 0.7, where),
                                           get<double>(doc, "coverage", 1.0, where));
    if (doc.contains("polarity")) s.polarity = get<int>(doc, "polarity", 1, where);
  } else if (mode == "coin-flip") {
    s = data::SyntheticLfSpec::coin_flip(get<double>(doc, "coverage", 1.0, where));
  } else if (mode == "duplicate") {
    s = data::SyntheticLfSpec::duplicate_of(get<Index>(doc, "source", -1, where));
  } else if (mode == "adversarial-flip") {
    s = data::SyntheticLfSpec::adversarial_flip_of(get<Index>(doc, "source", -1, where));
  } else {
    throw InvalidInput("lf: unknown mode '" + mode + "'");
  }
  return s;
}

json to_json(const data::SyntheticLfSpec& s) {
  switch (s.mode) {
    case data::LfMode::Independent: {
      json j = {{"mode", "independent"}, {"accuracy", s.accuracy}, {"coverage", s.coverage}};
      if (s.polarity) j["polarity"] = *s.polarity;
      return j;
    }
    case data::LfMode::ClassBalance: return {{"mode", "coin-flip"}, {"coverage", s.coverage}};
    case data::LfMode::Duplicate: return {{"mode", "duplicate"}, {"source", s.source}};
    case data::LfMode::AdversarialFlip: return {{"mode", "adversarial-flip"}, {"source", s.source}};
  }
  return nullptr;
}

GeneratorConfig parse_generator(const json& doc) {
  require_keys(doc, {"blobs", "lfs"}, "generate");
  GeneratorConfig g;
  if (doc.contains("blobs")) g.blobs = parse_blobs(doc.at("blobs"));
  if (!doc.contains("lfs") || !doc.at("lfs").is_array() || doc.at("lfs").empty())
    throw InvalidInput("generate: 'lfs' must be a non-empty array");
  for (const auto& item : doc.at("lfs")) g.lfs.push_back(parse_lf_spec(item));
  return g;
}

json to_json(const GeneratorConfig& g) {
  json lfs = json::array();
  for (const auto& s : g.lfs) lfs.push_back(to_json(s));
  return {{"blobs", to_json(g.blobs)}, {"lfs", lfs}};
}

DataConfig parse_data(const json& doc) {
  const std::string where = "data";
  require_keys(doc, {"generate", "features", "labels", "label_matrix", "probabilistic_matrix", "split", "num_classes"},
               where);
  DataConfig c;
  if (doc.contains("generate")) {
    if (doc.contains("features") || doc.contains("label_matrix") || doc.contains("probabilistic_matrix"))
      throw InvalidInput("data: 'generate' cannot be combined with input files");
    c.generate = parse_generator(doc.at("generate"));
    return c;
  }
  c.features = get<std::string>(doc, "features", "", where);
  c.labels = get<std::string>(doc, "labels", "", where);
  c.label_matrix = get<std::string>(doc, "label_matrix", "", where);
  c.probabilistic_matrix = get<std::string>(doc, "probabilistic_matrix", "", where);
  c.split = parse_split(doc, where);
  if (doc.contains("num_classes")) c.num_classes = get<int>(doc, "num_classes", 2, where);
  if (c.features.empty()) throw InvalidInput("data: 'features' is required");
  if (c.label_matrix.empty() == c.probabilistic_matrix.empty())
    throw InvalidInput("data: give exactly one of 'label_matrix' and 'probabilistic_matrix'");
  for (const auto* p : {&c.features, &c.labels, &c.label_matrix, &c.probabilistic_matrix})
    if (!p->empty() && !std::filesystem::exists(*p)) throw InvalidInput("data: file not found: " + p->string());
  return c;
}

LoadedData load_data(const DataConfig& cfg, std::uint64_t seed) {
  if (cfg.generate) {
    data::Dataset ds = data::generate_blobs(cfg.generate->blobs, derive_seed(seed, 1));
    data::LabelMatrix lm = data::generate_lfs(ds, cfg.generate->lfs, derive_seed(seed, 2));
    return {std::move(ds), std::move(lm)};
  }
  Matrix x = data::load_features(cfg.features);
  std::optional<std::vector<int>> y;
  if (!cfg.labels.empty()) y = data::load_labels(cfg.labels);
  data::LabelMatrix lm = cfg.label_matrix.empty() ? data::load_probabilistic_matrix(cfg.probabilistic_matrix)
                                                  : data::load_label_matrix(cfg.label_matrix, cfg.num_classes);
  int classes = lm.num_classes();
  if (y) {
    for (const int v : *y) classes = std::max(classes, v);
  }
  if (cfg.num_classes) classes = std::max(classes, *cfg.num_classes);
  if (lm.num_classes() != classes) {
    if (lm.is_probabilistic()) throw InvalidInput("data: labels exceed the probabilistic matrix's class count");
    lm = data::LabelMatrix(lm.rows(), lm.num_lfs(), classes, lm.votes());
  }
  if (lm.rows() != x.rows()) throw InvalidInput("data: label matrix and features differ in row count");
  data::Split split = data::all_train(x.rows());
  if (cfg.split) {
    const auto& s = *cfg.split;
    if (s[0] + s[1] + s[2] != x.rows()) throw InvalidInput("data: split sizes do not add up to the row count");
    split = data::contiguous_split(s[0], s[1], s[2]);
  }
  // class balance from labels when present, else uniform
  std::vector<double> balance(static_cast<std::size_t>(classes), 1.0 / classes);
  if (y) {
    std::fill(balance.begin(), balance.end(), 0.0);
    for (const int v : *y) balance[static_cast<std::size_t>(v - 1)] += 1.0 / static_cast<double>(y->size());
    double total = 0.0;
    for (const double b : balance) total += b;
    for (double& b : balance) b /= total;
  }
  return {data::Dataset(std::move(x), std::move(y), std::move(balance), std::move(split)), std::move(lm)};
}

weasel::WeaselConfig parse_model(const json& doc) {
  const std::string where = "model";
  require_keys(doc, {"encoder", "downstream", "loss", "prior", "dropout"}, where);
  weasel::WeaselConfig c;
  if (doc.contains("encoder")) {
    const auto& e = doc.at("encoder");
    const std::string w = "model.encoder";
    require_keys(e, {"hidden", "batchnorm", "inverse_temperature", "scale", "class_conditional", "use_features",
                     "activation"},
                 w);
    c.encoder.hidden = get<std::vector<Index>>(e, "hidden", c.encoder.hidden, w);
    c.encoder.batchnorm = get<bool>(e, "batchnorm", c.encoder.batchnorm, w);
    c.encoder.inverse_temperature = get<double>(e, "inverse_temperature", c.encoder.inverse_temperature, w);
    if (e.contains("scale") && !e.at("scale").is_null()) c.encoder.scale = get<double>(e, "scale", 1.0, w);
    c.encoder.class_conditional = get<bool>(e, "class_conditional", c.encoder.class_conditional, w);
    c.encoder.use_features = get<bool>(e, "use_features", c.encoder.use_features, w);
    c.encoder.activation = weasel::accuracy_activation_from_string(
        get<std::string>(e, "activation", weasel::to_string(c.encoder.activation), w));
  }
  if (doc.contains("downstream")) {
    const auto& d = doc.at("downstream");
    const std::string w = "model.downstream";
    require_keys(d, {"hidden", "batchnorm"}, w);
    c.downstream.hidden = get<std::vector<Index>>(d, "hidden", c.downstream.hidden, w);
    c.downstream.batchnorm = get<bool>(d, "batchnorm", c.downstream.batchnorm, w);
  }
  c.loss = weasel::loss_kind_from_string(get<std::string>(doc, "loss", weasel::to_string(c.loss), where));
  c.prior = get<std::vector<double>>(doc, "prior", c.prior, where);
  c.dropout = get<double>(doc, "dropout", c.dropout, where);
  if (c.encoder.inverse_temperature < 0.0) throw InvalidInput("model.encoder: inverse_temperature must be >= 0");
  if (c.encoder.scale && !(*c.encoder.scale > 0.0)) throw InvalidInput("model.encoder: scale must be positive");
  if (c.dropout < 0.0 || c.dropout >= 1.0) throw InvalidInput("model: dropout must lie in [0, 1)");
  return c;
}

json to_json(const weasel::WeaselConfig& c) {
  json enc = {{"hidden", c.encoder.hidden},
              {"batchnorm", c.encoder.batchnorm},
              {"inverse_temperature", c.encoder.inverse_temperature},
              {"class_conditional", c.encoder.class_conditional},
              {"use_features", c.encoder.use_features},
              {"activation", weasel::to_string(c.encoder.activation)}};
  enc["scale"] = c.encoder.scale ? json(*c.encoder.scale) : json(nullptr);
  return {{"encoder", enc},
          {"downstream", {{"hidden", c.downstream.hidden}, {"batchnorm", c.downstream.batchnorm}}},
          {"loss", weasel::to_string(c.loss)},
          {"prior", c.prior},
          {"dropout", c.dropout}};
}

TrainBlock parse_train(const json& doc) {
  const std::string where = "train";
  require_keys(doc, {"lr", "lr_grid", "weight_decay", "batch_size", "max_epochs", "early_stopping", "record_test"},
               where);
  TrainBlock t;
  if (doc.contains("lr") && doc.contains("lr_grid")) throw InvalidInput("train: give 'lr' or 'lr_grid', not both");
  if (doc.contains("lr")) t.lr_grid = {get<double>(doc, "lr", 1e-4, where)};
  t.lr_grid = get<std::vector<double>>(doc, "lr_grid", t.lr_grid, where);
  if (t.lr_grid.empty()) throw InvalidInput("train: empty lr_grid");
  t.train.lr = t.lr_grid.front();
  t.train.weight_decay = get<double>(doc, "weight_decay", t.train.weight_decay, where);
  t.train.batch_size = get<Index>(doc, "batch_size", t.train.batch_size, where);
  t.train.max_epochs = get<int>(doc, "max_epochs", t.train.max_epochs, where);
  t.train.early_stopping = weasel::early_stopping_from_string(
      get<std::string>(doc, "early_stopping", weasel::to_string(t.train.early_stopping), where));
  t.train.record_test = get<bool>(doc, "record_test", t.train.record_test, where);
  for (const double lr : t.lr_grid) {
    weasel::TrainConfig probe = t.train;
    probe.lr = lr;
    probe.validate();
  }
  return t;
}

json to_json(const TrainBlock& t) {
  return {{"lr_grid", t.lr_grid},
          {"weight_decay", t.train.weight_decay},
          {"batch_size", t.train.batch_size},
          {"max_epochs", t.train.max_epochs},
          {"early_stopping", weasel::to_string(t.train.early_stopping)},
          {"record_test", t.train.record_test}};
}

std::vector<std::uint64_t> replicate_seeds(std::uint64_t master, std::size_t count) {
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(derive_seed(master, 7, i));
  return out;
}

namespace {

experiments::Protocol parse_protocol(const json& doc, const std::string& where) {
  experiments::Protocol p;
  if (doc.contains("blobs")) p.blobs = parse_blobs(doc.at("blobs"));
  if (doc.contains("model")) p.weasel = parse_model(doc.at("model"));
  if (doc.contains("train")) {
    const TrainBlock t = parse_train(doc.at("train"));
    p.train = t.train;
    p.lr_grid = t.lr_grid;
  }
  if (doc.contains("seeds") && doc.contains("num_seeds")) throw InvalidInput(where + ": give 'seeds' or 'num_seeds'");
  if (doc.contains("seeds")) {
    p.seeds = get<std::vector<std::uint64_t>>(doc, "seeds", {}, where);
  } else {
    const auto master = get<std::uint64_t>(doc, "seed", 0, where);
    const auto count = get<std::size_t>(doc, "num_seeds", 5, where);
    p.seeds = replicate_seeds(master, count);
  }
  if (p.seeds.size() < 3) throw InvalidInput(where + ": medians need at least 3 seeds");
  p.jobs = get<int>(doc, "jobs", 1, where);
  return p;
}

}  // namespace

experiments::RobustnessSpec parse_robustness(const json& doc) {
  const std::string where = "robustness";
  require_keys(doc,
               {"output", "seed", "seeds", "num_seeds", "jobs", "experiment", "counts", "models", "base_lfs",
                "adversarial_source", "allow_large_grid", "blobs", "model", "train"},
               where);
  experiments::RobustnessSpec s;
  s.kind = experiments::robustness_kind_from_string(get<std::string>(doc, "experiment", "random-duplication", where));
  s.duplicate_counts = get<std::vector<int>>(doc, "counts", {}, where);
  if (s.duplicate_counts.empty()) {
    switch (s.kind) {
      case experiments::RobustnessKind::AdversarialDuplication: s.duplicate_counts = {0, 2, 4, 6, 8, 10}; break;
      case experiments::RobustnessKind::RandomDuplication: s.duplicate_counts = {2, 25, 100}; break;
      case experiments::RobustnessKind::IndependentRandom: s.duplicate_counts = {1, 2, 3, 5, 10}; break;
    }
  }
  if (doc.contains("models")) {
    s.models.clear();
    for (const auto& m : get<std::vector<std::string>>(doc, "models", {}, where))
      s.models.push_back(experiments::model_kind_from_string(m));
  }
  if (doc.contains("base_lfs")) {
    if (!doc.at("base_lfs").is_array()) throw InvalidInput(where + ": 'base_lfs' must be an array");
    for (const auto& item : doc.at("base_lfs")) s.base_lf_specs.push_back(parse_lf_spec(item));
  }
  s.adversarial_source = get<Index>(doc, "adversarial_source", 0, where);
  s.allow_large_grid = get<bool>(doc, "allow_large_grid", false, where);
  s.protocol = parse_protocol(doc, where);
  s.validate();
  return s;
}

experiments::AblationSpec parse_ablation(const json& doc) {
  const std::string where = "ablate";
  require_keys(doc, {"output", "seed", "seeds", "num_seeds", "jobs", "scenario", "count", "axes", "blobs", "model", "train"},
               where);
  experiments::AblationSpec s;
  s.scenario = experiments::robustness_kind_from_string(get<std::string>(doc, "scenario", "random-duplication", where));
  s.count = get<int>(doc, "count", 25, where);
  s.axes = get<std::vector<std::string>>(doc, "axes", {}, where);
  s.protocol = parse_protocol(doc, where);
  // surface unknown axes before any training starts
  experiments::expand_ablation(s.protocol.weasel, s.axes, 2);
  return s;
}

std::filesystem::path resolve_output(const json& doc, const std::string& subcommand) {
  if (doc.contains("output") && !doc.at("output").is_null()) {
    if (!doc.at("output").is_string()) throw InvalidInput("'output' must be a string");
    return doc.at("output").get<std::string>();
  }
  const char* root = std::getenv(kOutputRootEnv);
  return std::filesystem::path(root && *root ? root : "runs") / subcommand;
}

}  // namespace wslab::cli
