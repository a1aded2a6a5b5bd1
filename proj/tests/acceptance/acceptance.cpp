// Acceptance runner: one PASS/FAIL line per criterion, exit code 1 if any
// fails. Pass criterion numbers as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "../support/oracles.hpp"
#include "wslab/cli/commands.hpp"
#include "wslab/data/synthetic.hpp"
#include "wslab/eval/metrics.hpp"
#include "wslab/experiments/experiments.hpp"
#include "wslab/labelmodels/naive_bayes.hpp"
#include "wslab/labelmodels/triplet.hpp"
#include "wslab/nn/functional.hpp"
#include "wslab/weasel/trainer.hpp"

using namespace wslab;
namespace ex = wslab::experiments;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double med(const ex::ResultsTable& t, const std::string& model, const std::string& grid) {
  const auto v = t.auc_of(model, grid);
  return v.empty() ? std::nan("") : eval::median(v);
}

ex::Protocol full_protocol() {
  ex::Protocol p;
  p.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return p;
}

// 1 -----------------------------------------------------------------------

Verdict gradients() {
  Verdict v;
  double worst_layer = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    const Index in = 2 + static_cast<Index>(uniform_index(rng, 5));
    const Index out = 1 + static_cast<Index>(uniform_index(rng, 5));
    const Index rows = 3 + static_cast<Index>(uniform_index(rng, 5));
    nn::Dense dense(in, out, rng);
    dense.bias().value = oracle::random_matrix(1, out, rng);
    worst_layer = std::max(worst_layer, oracle::layer_gradient_error(dense, oracle::random_matrix(rows, in, rng), nn::Mode::Train, seed));
    nn::Relu relu(in);
    worst_layer = std::max(worst_layer, oracle::layer_gradient_error(relu, oracle::random_matrix(rows, in, rng), nn::Mode::Train, seed));
    nn::BatchNorm bn(in);
    bn.scale().value = oracle::random_matrix(1, in, rng);
    bn.shift().value = oracle::random_matrix(1, in, rng);
    worst_layer = std::max(worst_layer, oracle::layer_gradient_error(bn, oracle::random_matrix(rows, in, rng, 2.0), nn::Mode::Train, seed));
    worst_layer = std::max(worst_layer, oracle::layer_gradient_error(bn, oracle::random_matrix(rows, in, rng), nn::Mode::Eval, seed));
    nn::Dropout drop(in, 0.3);
    worst_layer = std::max(worst_layer, oracle::layer_gradient_error(drop, oracle::random_matrix(rows, in, rng), nn::Mode::Train, seed));
    nn::Mlp net({in, {4, 3}, out + 1, true, 0.2}, rng);
    worst_layer = std::max(worst_layer, oracle::mlp_gradient_error(net, oracle::random_matrix(rows, in, rng), nn::Mode::Train, seed));
  }
  v.check(worst_layer <= oracle::kGradTolerance, "layers " + fmt("%.2e", worst_layer));

  double worst_loss = 0.0;
  const weasel::LossKind kinds[] = {weasel::LossKind::SymmetricCeStopGrad, weasel::LossKind::CeNoStopGrad,
                                    weasel::LossKind::AsymmetricCe,        weasel::LossKind::L1,
                                    weasel::LossKind::SquaredHellinger,    weasel::LossKind::Mig};
  for (const auto kind : kinds) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      Rng rng(seed * 31);
      const Index c = 2 + static_cast<Index>(uniform_index(rng, 3));
      const Index n = 2 + static_cast<Index>(uniform_index(rng, 5));
      std::vector<double> prior(static_cast<std::size_t>(c));
      double total = 0.0;
      for (auto& p : prior) total += (p = 0.3 + uniform01(rng));
      for (auto& p : prior) p /= total;
      worst_loss = std::max(worst_loss, oracle::loss_gradient_error(kind, oracle::random_matrix(n, c, rng, 2.0),
                                                                    oracle::random_matrix(n, c, rng, 2.0), prior));
    }
  }
  v.check(worst_loss <= oracle::kGradTolerance, "losses " + fmt("%.2e", worst_loss));

  double worst_composite = 0.0;
  const weasel::AccuracyActivation acts[] = {weasel::AccuracyActivation::Softmax, weasel::AccuracyActivation::Sigmoid,
                                             weasel::AccuracyActivation::Relu, weasel::AccuracyActivation::Tanh};
  std::uint64_t seed = 0;
  for (const auto act : acts) {
    for (const auto kind : kinds) {
      for (const bool cc : {false, true}) {
        ++seed;
        Rng rng(seed);
        weasel::WeaselConfig cfg;
        cfg.encoder.hidden = {5};
        cfg.encoder.activation = act;
        cfg.encoder.class_conditional = cc;
        cfg.downstream.hidden = {4};
        cfg.loss = kind;
        const Index m = 2 + static_cast<Index>(uniform_index(rng, 3));
        const int c = 2 + static_cast<int>(uniform_index(rng, 2));
        const Index d = 2 + static_cast<Index>(uniform_index(rng, 3));
        const Index n = 4 + static_cast<Index>(uniform_index(rng, 4));
        auto model = weasel::make_weasel_model(cfg, m, c, d, seed);
        for (auto* net : {&model.encoder.body(), &model.downstream})
          for (nn::Parameter* p : net->parameters())
            p->value += oracle::random_matrix(p->value.rows(), p->value.cols(), rng, 0.1);
        std::vector<int> votes(static_cast<std::size_t>(n * m));
        for (auto& x : votes) x = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(c) + 1));
        const Matrix onehot = data::LabelMatrix(n, m, c, votes).one_hot();
        worst_composite = std::max(
            worst_composite, oracle::composite_gradient_error(model, onehot, oracle::random_matrix(n, d, rng), seed));
      }
    }
  }
  v.check(worst_composite <= oracle::kGradTolerance, "composite " + fmt("%.2e", worst_composite));
  return v;
}

// 2 -----------------------------------------------------------------------

Verdict posterior_algebra() {
  Verdict v;
  data::BlobSpec blobs;
  blobs.n = 600;
  blobs.split = std::array<Index, 3>{400, 100, 100};
  const auto ds = data::generate_blobs(blobs, 1);
  std::vector<data::SyntheticLfSpec> specs;
  for (int j = 0; j < 6; ++j) specs.push_back(data::SyntheticLfSpec::independent(0.7 + 0.03 * j, 0.3 + 0.1 * j));
  const auto lm = data::generate_lfs(ds, specs, 2);
  const std::vector<double> prior{0.6, 0.4};

  auto model = weasel::make_weasel_model({}, 6, 2, 10, 3);
  model.prior = prior;
  const Matrix y = model.encoder_posterior(lm.one_hot(), ds.features());
  double worst_sum = 0.0;
  double worst_prior = 0.0;
  for (Index i = 0; i < y.rows(); ++i) {
    worst_sum = std::max(worst_sum, std::abs(y.row(i).sum() - 1.0));
    if (!lm.covered(i)) worst_prior = std::max(worst_prior, std::abs(y(i, 0) - prior[0]) + std::abs(y(i, 1) - prior[1]));
  }
  v.check(worst_sum <= 1e-9, "row sums " + fmt("%.1e", worst_sum));
  v.check(worst_prior <= 1e-12, "abstain rows = prior " + fmt("%.1e", worst_prior));

  weasel::WeaselConfig cold;
  cold.encoder.inverse_temperature = 0.0;
  auto flat = weasel::make_weasel_model(cold, 6, 2, 10, 4);
  flat.prior = prior;
  const Matrix yf = flat.encoder_posterior(lm.one_hot(), ds.features());
  const double w = std::sqrt(6.0) / 6.0;
  double worst_flat = 0.0;
  for (Index i = 0; i < yf.rows(); ++i) {
    double s[2] = {0.0, 0.0};
    for (Index j = 0; j < 6; ++j)
      if (const int vote = lm.vote(i, j)) s[vote - 1] += w;
    const double a = prior[0] * std::exp(s[0]);
    const double b = prior[1] * std::exp(s[1]);
    worst_flat = std::max(worst_flat, std::abs(yf(i, 0) - a / (a + b)));
  }
  v.check(worst_flat <= 1e-12, "tau1=0 equal-weight " + fmt("%.1e", worst_flat));

  weasel::TrainConfig cfg;
  cfg.max_epochs = 3;
  cfg.lr = 1e-3;
  int batches = 0;
  int violations = 0;
  weasel::TrainHooks hooks;
  hooks.on_batch = [&](const weasel::BatchDiagnostics& d) {
    ++batches;
    if (d.term_encoder_grad_max.at(0) != 0.0 || d.term_downstream_grad_max.at(1) != 0.0) ++violations;
  };
  weasel::train(weasel::make_weasel_model({}, 6, 2, 10, 5), lm, data::covered_subset(lm, ds).dataset, cfg, hooks);
  v.check(batches > 0 && violations == 0,
          "stop-grad zero on " + std::to_string(batches - violations) + "/" + std::to_string(batches) + " batches");
  return v;
}

// 3 -----------------------------------------------------------------------

Verdict baseline_oracles() {
  Verdict v;
  const std::vector<double> acc{0.9, 0.8, 0.7};
  const std::vector<double> uniform{0.5, 0.5};
  std::vector<data::SyntheticLfSpec> specs;
  for (double a : acc) specs.push_back(data::SyntheticLfSpec::independent(a, 1.0));
  data::BlobSpec blobs;
  blobs.n = 50000;
  const auto ds = data::generate_blobs(blobs, 11);
  const auto lm = data::generate_lfs(ds, specs, 12);

  const auto nb = labelmodels::nb_em_fit(lm, uniform);
  std::vector<Matrix> emission;
  for (double a : acc) {
    Matrix e(3, 2);
    e << 0, 0, a, 1 - a, 1 - a, a;
    emission.push_back(e);
  }
  const Matrix truth = oracle::bayes_posterior(emission, uniform, lm.votes(), lm.rows(), 3);
  const double mad = (labelmodels::nb_posterior(nb, lm) - truth).cwiseAbs().mean();
  v.check(mad <= 0.02, "NB-EM vs Bayes MAD " + fmt("%.4f", mad));

  // monotonicity on a harder, partially covered problem
  std::vector<data::SyntheticLfSpec> mixed{
      data::SyntheticLfSpec::independent(0.75, 0.5), data::SyntheticLfSpec::independent(0.8, 0.4),
      data::SyntheticLfSpec::unipolar(2, 0.7, 0.3), data::SyntheticLfSpec::independent(0.6, 0.9)};
  const auto lm2 = data::generate_lfs(ds, mixed, 13);
  const auto nb2 = labelmodels::nb_em_fit(lm2, uniform, {200, 1e-10, 1.0});
  int drops = 0;
  for (std::size_t t = 1; t < nb2.objective.size(); ++t)
    if (nb2.objective[t] < nb2.objective[t - 1] - 1e-8 * std::abs(nb2.objective[t - 1])) ++drops;
  v.check(drops == 0 && nb2.objective.size() >= 2,
          "EM objective monotone over " + std::to_string(nb2.objective.size()) + " iterations");

  const auto est = labelmodels::triplet_fit(lm, labelmodels::TripletAggregation::Mean);
  double worst = 0.0;
  for (std::size_t j = 0; j < 3; ++j) worst = std::max(worst, std::abs(est.accuracy[j] - acc[j]));
  v.check(worst <= 0.05, "triplet sampled error " + fmt("%.4f", worst));

  const std::vector<double> a{0.8, 0.6, 0.4};
  Matrix m(3, 3);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j)
      m(i, j) = i == j ? 1.0 : a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(j)];
  double exact = 0.0;
  for (auto agg : {labelmodels::TripletAggregation::Single, labelmodels::TripletAggregation::Mean,
                   labelmodels::TripletAggregation::Median}) {
    const auto r = labelmodels::triplet_from_moments(m, agg);
    for (std::size_t i = 0; i < 3; ++i) exact = std::max(exact, std::abs(r[i] - a[i]));
  }
  v.check(exact <= 1e-12, "triplet exact moments " + fmt("%.1e", exact));
  return v;
}

// 4 -----------------------------------------------------------------------

Verdict majority_dominance() {
  Verdict v;
  const ex::Protocol protocol = full_protocol();
  std::vector<data::SyntheticLfSpec> specs;
  for (int j = 0; j < 8; ++j)
    specs.push_back(data::SyntheticLfSpec::independent(0.7 + 0.15 * j / 7.0, 0.4 + 0.5 * j / 7.0));
  std::vector<double> weasel_auc;
  std::vector<double> mv_auc;
  for (const auto seed : protocol.seeds) {
    const auto ds = data::generate_blobs(protocol.blobs, derive_seed(seed, 101));
    const auto lm = data::generate_lfs(ds, specs, derive_seed(seed, 102));
    weasel_auc.push_back(ex::run_model(ex::ModelKind::Weasel, lm, ds, protocol, derive_seed(seed, 103, 0)).auc);
    mv_auc.push_back(ex::run_model(ex::ModelKind::Majority, lm, ds, protocol, derive_seed(seed, 103, 1)).auc);
  }
  const double w = eval::median(weasel_auc);
  const double mv = eval::median(mv_auc);
  v.check(w >= mv, "median AUC weasel " + fmt("%.4f", w) + " vs majority " + fmt("%.4f", mv));
  return v;
}

// 5 -----------------------------------------------------------------------

Verdict recovery() {
  Verdict v;
  ex::RobustnessSpec spec;
  spec.kind = ex::RobustnessKind::RandomDuplication;
  spec.duplicate_counts = {2, 25, 100};
  spec.protocol = full_protocol();
  const auto t = ex::run_robustness(spec);
  for (const int k : spec.duplicate_counts) {
    const std::string g = std::to_string(k);
    const double w = med(t, "weasel", g);
    const double c = med(t, "supervised-ceiling", g);
    v.check(w >= 0.95 * c, "k=" + g + " weasel " + fmt("%.4f", w) + " ceiling " + fmt("%.4f", c));
  }
  for (const char* model : {"nb-em", "triplet-mean"}) {
    const double b = med(t, model, "25");
    v.check(b >= 0.35 && b <= 0.65, std::string(model) + "@25 " + fmt("%.4f", b));
  }
  return v;
}

// 6 -----------------------------------------------------------------------

Verdict adversarial() {
  Verdict v;
  ex::RobustnessSpec spec;
  spec.kind = ex::RobustnessKind::AdversarialDuplication;
  spec.duplicate_counts = {0, 10};
  spec.models = {ex::ModelKind::Weasel, ex::ModelKind::NbEm};
  spec.protocol = full_protocol();
  const auto t = ex::run_robustness(spec);
  const double w0 = med(t, "weasel", "0");
  const double w10 = med(t, "weasel", "10");
  const double n0 = med(t, "nb-em", "0");
  const double n10 = med(t, "nb-em", "10");
  v.check(w0 - w10 <= 0.03, "weasel " + fmt("%.4f", w0) + " -> " + fmt("%.4f", w10));
  v.check(n0 - n10 >= 0.10, "nb-em " + fmt("%.4f", n0) + " -> " + fmt("%.4f", n10));
  return v;
}

// 7 -----------------------------------------------------------------------

Verdict independent_random() {
  Verdict v;
  ex::RobustnessSpec spec;
  spec.kind = ex::RobustnessKind::IndependentRandom;
  spec.duplicate_counts = {1, 3, 5, 10};
  spec.protocol = full_protocol();
  const auto t = ex::run_robustness(spec);
  for (const int j : spec.duplicate_counts) {
    const std::string g = std::to_string(j);
    const double w = med(t, "weasel", g);
    const double c = med(t, "supervised-ceiling", g);
    v.check(w >= 0.95 * c, "j=" + g + " weasel " + fmt("%.4f", w) + " ceiling " + fmt("%.4f", c));
  }
  const double c3 = med(t, "supervised-ceiling", "3");
  for (const char* model : {"nb-em", "triplet-mean"}) {
    const double b = med(t, model, "3");
    v.check(b < 0.7 * c3, std::string(model) + "@3 " + fmt("%.4f", b) + " vs 0.7*ceiling " + fmt("%.4f", 0.7 * c3));
  }
  return v;
}

// 8 -----------------------------------------------------------------------

Verdict ablation() {
  Verdict v;
  ex::AblationSpec spec;
  spec.count = 25;
  spec.axes = {"no-stopgrad", "asymmetric-ce", "tanh-accuracies"};
  spec.protocol = full_protocol();
  const auto t = ex::run_ablation_grid(spec);
  const double base = med(t, "weasel", "base");
  v.detail = "base " + fmt("%.5f", base);
  for (const char* variant : {"loss=ce-no-stopgrad", "loss=asymmetric-ce", "tanh-accuracies"}) {
    const double a = med(t, "weasel", variant);
    v.check(a < base, std::string(variant) + " " + fmt("%.5f", a));
  }
  return v;
}

// 9 -----------------------------------------------------------------------

Verdict metrics() {
  Verdict v;
  Rng rng(2024);
  double worst_auc = 0.0;
  double worst_f1 = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 4 + uniform_index(rng, 100);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = uniform01(rng) < 0.5 ? 1 : 0;
      scores[i] = std::round(uniform01(rng) * 10.0) / 10.0;  // ties
    }
    labels[0] = 1;
    labels[1] = 0;
    worst_auc = std::max(worst_auc, std::abs(eval::roc_auc(scores, labels) - oracle::brute_force_auc(scores, labels)));
    const double t = eval::tune_threshold_f1(scores, labels);
    const double tuned = eval::f1_score(eval::threshold_predictions(scores, t), labels);
    worst_f1 = std::max(worst_f1, std::abs(tuned - oracle::best_f1_sweep(scores, labels)));
    const std::vector<int> pred = eval::threshold_predictions(scores, 0.5);
    worst_f1 = std::max(worst_f1, std::abs(eval::f1_score(pred, labels) - oracle::brute_force_f1(scores, labels, 0.5)));
  }
  v.check(worst_auc <= 1e-12, "AUC vs pairwise " + fmt("%.1e", worst_auc));
  v.check(worst_f1 <= 1e-12, "F1 vs sweep " + fmt("%.1e", worst_f1));
  return v;
}

// 10 ----------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  Verdict v;
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "wslab_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const nlohmann::json robustness = {
      {"experiment", "random-duplication"},
      {"counts", {2, 5}},
      {"seed", 77},
      {"num_seeds", 3},
      {"models", {"weasel", "majority", "nb-em", "triplet-mean", "supervised-ceiling"}},
      {"blobs", {{"n", 600}, {"split", {400, 100, 100}}}},
      {"train", {{"max_epochs", 5}, {"lr", 1e-3}}}};
  const nlohmann::json ablate = {{"count", 3},
                                 {"seed", 77},
                                 {"num_seeds", 3},
                                 {"axes", {"tanh-accuracies", "l1"}},
                                 {"blobs", {{"n", 600}, {"split", {400, 100, 100}}}},
                                 {"train", {{"max_epochs", 5}, {"lr", 1e-3}}}};
  std::ofstream(root / "robustness.json") << robustness.dump();
  std::ofstream(root / "ablate.json") << ablate.dump();

  auto run = [&](const std::string& cmd, const std::string& out, const std::string& jobs) {
    const std::string cfg = (root / (cmd + ".json")).string();
    const std::string dir = (root / out).string();
    const char* argv[] = {"wslab", cmd.c_str(), "-c", cfg.c_str(), "-o", dir.c_str(), "--jobs", jobs.c_str()};
    std::ostringstream sink;
    return cli::run(8, argv, sink, sink);
  };
  for (const std::string cmd : {"robustness", "ablate"}) {
    const int a = run(cmd, cmd + "_a", "1");
    const int b = run(cmd, cmd + "_b", "2");
    const std::string csv_a = slurp(root / (cmd + "_a") / "results.csv");
    const bool same = a == 0 && b == 0 && !csv_a.empty() && csv_a == slurp(root / (cmd + "_b") / "results.csv");
    v.check(same, cmd + " results.csv byte-identical");
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"gradient fidelity", gradients},
      {"posterior algebra", posterior_algebra},
      {"baseline oracles", baseline_oracles},
      {"majority-vote dominance", majority_dominance},
      {"true-label recovery", recovery},
      {"adversarial duplication", adversarial},
      {"independent random LFs", independent_random},
      {"ablation directionality", ablation},
      {"metric correctness", metrics},
      {"determinism", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));

  bool all = true;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const int id = static_cast<int>(c) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[c].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all = all && v.pass;
    std::printf("criterion %2d %s  %s (%.0fs): %s\n", id, v.pass ? "PASS" : "FAIL", criteria[c].first, secs,
                v.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
