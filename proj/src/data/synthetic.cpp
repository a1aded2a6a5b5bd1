#include "wslab/data/synthetic.hpp"

#include <array>
#include <cmath>
#include <numeric>

namespace wslab::data {

namespace {

std::vector<double> resolve_balance(const std::vector<double>& balance, int classes) {
  if (balance.empty()) return std::vector<double>(static_cast<std::size_t>(classes), 1.0 / classes);
  if (static_cast<int>(balance.size()) != classes) throw InvalidInput("blobs: balance must have one entry per class");
  double total = 0.0;
  for (const double p : balance) {
    if (!(p >= 0.0)) throw InvalidInput("blobs: balance entries must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("blobs: balance must sum to 1");
  return balance;
}

int draw_class(const std::vector<double>& probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    acc += probs[c];
    if (u < acc) return static_cast<int>(c) + 1;
  }
  // Rounding: fall back to the last class with positive mass.
  for (std::size_t c = probs.size(); c-- > 0;)
    if (probs[c] > 0.0) return static_cast<int>(c) + 1;
  return 1;
}

}  // namespace

Dataset generate_blobs(const BlobSpec& spec, std::uint64_t seed) {
  if (spec.num_classes < 2) throw InvalidInput("blobs: need at least 2 classes");
  if (spec.n < spec.num_classes) throw InvalidInput("blobs: need n >= C");
  if (spec.dims < 1) throw InvalidInput("blobs: need d >= 1");
  if (spec.separation < 0.0) throw InvalidInput("blobs: separation must be non-negative");
  const std::vector<double> balance = resolve_balance(spec.balance, spec.num_classes);

  // Center c sits on axis c (mod d) at distance separation/sqrt(2) from the
  // origin, so any two centers are `separation` apart when C <= d.
  if (spec.num_classes > spec.dims && spec.separation > 0.0) {
    throw InvalidInput("blobs: need d >= C for equidistant centers");
  }
  Matrix centers = Matrix::Zero(spec.num_classes, spec.dims);
  for (int c = 0; c < spec.num_classes; ++c) centers(c, c % spec.dims) = spec.separation / std::sqrt(2.0);
  const Matrix centroid = centers.colwise().mean();
  centers.rowwise() -= centroid.row(0);

  Rng rng(seed);
  Matrix features(spec.n, spec.dims);
  std::vector<int> labels(static_cast<std::size_t>(spec.n));
  for (Index i = 0; i < spec.n; ++i) {
    const int y = draw_class(balance, rng);
    labels[static_cast<std::size_t>(i)] = y;
    for (Index k = 0; k < spec.dims; ++k) features(i, k) = centers(y - 1, k) + standard_normal(rng);
  }

  Split split = all_train(spec.n);
  if (spec.split) {
    const auto& s = *spec.split;
    if (s[0] + s[1] + s[2] != spec.n) throw InvalidInput("blobs: split sizes must sum to n");
    split = contiguous_split(s[0], s[1], s[2]);
  }
  return Dataset(std::move(features), std::move(labels), balance, std::move(split));
}

LabelMatrix generate_lfs(const Dataset& ds, std::span<const SyntheticLfSpec> specs, std::uint64_t seed) {
  if (!ds.has_labels()) throw InvalidInput("generate_lfs: dataset has no labels");
  const auto& y = ds.labels();
  const Index n = ds.size();
  const auto m = static_cast<Index>(specs.size());
  const int classes = ds.num_classes();
  const auto& balance = ds.class_balance();

  std::vector<int> votes(static_cast<std::size_t>(n * m), 0);
  auto at = [&](Index i, Index j) -> int& { return votes[static_cast<std::size_t>(i * m + j)]; };

  for (Index j = 0; j < m; ++j) {
    const SyntheticLfSpec& s = specs[static_cast<std::size_t>(j)];
    if (s.mode == LfMode::Duplicate || s.mode == LfMode::AdversarialFlip) {
      if (s.source < 0 || s.source >= j) {
        throw InvalidInput("generate_lfs: LF " + std::to_string(j) + " references LF " + std::to_string(s.source) +
                           ", which does not precede it");
      }
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
    switch (s.mode) {
      case LfMode::Duplicate:
        for (Index i = 0; i < n; ++i) at(i, j) = at(i, s.source);
        break;
      case LfMode::AdversarialFlip: {
        if (classes != 2) throw InvalidInput("generate_lfs: adversarial flip needs C = 2");
        std::array<Index, 2> counts{0, 0};
        for (Index i = 0; i < n; ++i)
          if (at(i, s.source) != 0) ++counts[static_cast<std::size_t>(at(i, s.source) - 1)];
        if (counts[0] + counts[1] == 0) throw InvalidInput("generate_lfs: adversarial source never votes");
        const int dominant = counts[1] > counts[0] ? 2 : 1;
        const int opposite = 3 - dominant;
        for (Index i = 0; i < n; ++i) at(i, j) = at(i, s.source) != 0 ? at(i, s.source) : opposite;
        break;
      }
      case LfMode::ClassBalance: {
        if (!(s.coverage > 0.0 && s.coverage <= 1.0)) throw InvalidInput("generate_lfs: coverage outside (0, 1]");
        for (Index i = 0; i < n; ++i) {
          const double u_cover = uniform01(rng);
          const double u_class = uniform01(rng);
          if (u_cover >= s.coverage) continue;
          // inverse CDF keeps the draw portable across standard libraries
          double acc = 0.0;
          int cls = classes;
          for (int c = 0; c < classes; ++c) {
            acc += balance[static_cast<std::size_t>(c)];
            if (u_class < acc) {
              cls = c + 1;
              break;
            }
          }
          at(i, j) = cls;
        }
        break;
      }
      case LfMode::Independent: {
        if (!(s.accuracy >= 0.0 && s.accuracy <= 1.0)) throw InvalidInput("generate_lfs: accuracy outside [0, 1]");
        if (!(s.coverage > 0.0 && s.coverage <= 1.0)) throw InvalidInput("generate_lfs: coverage outside (0, 1]");
        if (s.polarity) {
          const int cls = *s.polarity;
          if (cls < 1 || cls > classes) throw InvalidInput("generate_lfs: polarity class out of range");
          const double prior = balance[static_cast<std::size_t>(cls - 1)];
          const double fire_in = prior > 0.0 ? s.accuracy * s.coverage / prior : 0.0;
          const double fire_out = prior < 1.0 ? (1.0 - s.accuracy) * s.coverage / (1.0 - prior) : 0.0;
          if (fire_in > 1.0 || fire_out > 1.0) {
            throw InvalidInput("generate_lfs: unipolar LF " + std::to_string(j) +
                               " cannot reach that accuracy and coverage under the class balance");
          }
          for (Index i = 0; i < n; ++i) {
            const double p = y[static_cast<std::size_t>(i)] == cls ? fire_in : fire_out;
            at(i, j) = uniform01(rng) < p ? cls : 0;
          }
          break;
        }
        for (Index i = 0; i < n; ++i) {
          const double u_cover = uniform01(rng);
          const double u_correct = uniform01(rng);
          const std::size_t wrong = uniform_index(rng, static_cast<std::size_t>(classes - 1));
          if (u_cover >= s.coverage) continue;
          const int truth = y[static_cast<std::size_t>(i)];
          if (u_correct < s.accuracy) {
            at(i, j) = truth;
          } else {
            const int w = static_cast<int>(wrong) + 1;  // 1..C-1
            at(i, j) = w >= truth ? w + 1 : w;
          }
        }
        break;
      }
    }
  }
  return LabelMatrix(n, m, classes, std::move(votes));
}

}  // namespace wslab::data
