#include <gtest/gtest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "wslab/data/synthetic.hpp"
#include "wslab/labelmodels/majority_vote.hpp"
#include "wslab/labelmodels/naive_bayes.hpp"
#include "wslab/labelmodels/triplet.hpp"

using namespace wslab;
using data::LabelMatrix;
using data::SyntheticLfSpec;
using namespace wslab::labelmodels;

namespace {

const std::vector<double> kUniform{0.5, 0.5};

struct Sampled {
  data::Dataset ds;
  LabelMatrix lm;
};

Sampled sample(Index n, std::vector<SyntheticLfSpec> specs, std::uint64_t seed) {
  data::BlobSpec blobs;
  blobs.n = n;
  auto ds = data::generate_blobs(blobs, seed);
  auto lm = data::generate_lfs(ds, specs, seed + 1);
  return {std::move(ds), std::move(lm)};
}

/// Emission tables for symmetric binary LFs with full coverage.
std::vector<Matrix> symmetric_emissions(const std::vector<double>& acc) {
  std::vector<Matrix> out;
  for (const double a : acc) {
    Matrix e(3, 2);
    e << 0, 0, a, 1 - a, 1 - a, a;
    out.push_back(e);
  }
  return out;
}

}  // namespace

TEST(MajorityVote, SoftAndHardExamples) {
  const LabelMatrix lm(3, 3, 2, {1, 1, 2, 1, 2, 0, 0, 0, 0});
  const std::vector<double> prior{0.7, 0.3};
  const Matrix soft = majority_vote_soft(lm, prior);
  EXPECT_NEAR(soft(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(soft(1, 0), 0.5);
  EXPECT_EQ(soft(2, 0), 0.7);
  EXPECT_EQ(soft(2, 1), 0.3);
  const auto hard = majority_vote_hard(lm, prior, 1);
  EXPECT_EQ(hard[0], 1);
  EXPECT_EQ(hard, majority_vote_hard(lm, prior, 1));
}

TEST(MajorityVote, TiesAndAbstainsAreRandomButSeeded) {
  std::vector<int> votes;
  for (int i = 0; i < 20000; ++i) votes.insert(votes.end(), {1, 2});
  const LabelMatrix tied(20000, 2, 2, votes);
  const auto hard = majority_vote_hard(tied, kUniform, 5);
  double ones = 0;
  for (int v : hard) ones += v == 1;
  EXPECT_NEAR(ones / 20000, 0.5, 0.02);

  const LabelMatrix empty(20000, 1, 2, std::vector<int>(20000, 0));
  const std::vector<double> prior{0.8, 0.2};
  const auto drawn = majority_vote_hard(empty, prior, 6);
  ones = 0;
  for (int v : drawn) ones += v == 1;
  EXPECT_NEAR(ones / 20000, 0.8, 0.02);
}

TEST(NaiveBayes, PerfectLfIsAFixedPoint) {
  const auto s = sample(2000, {SyntheticLfSpec::independent(1.0, 0.6)}, 3);
  const auto model = nb_em_fit(s.lm, kUniform);
  const Matrix post = nb_posterior(model, s.lm);
  for (Index i = 0; i < s.lm.rows(); ++i) {
    if (s.lm.vote(i, 0) == 0) continue;
    Index arg = 0;
    post.row(i).maxCoeff(&arg);
    EXPECT_EQ(arg + 1, s.lm.vote(i, 0));
  }
}

TEST(NaiveBayes, MatchesBayesPosteriorFromTrueParameters) {
  const std::vector<double> acc{0.9, 0.8, 0.7};
  const auto s = sample(50000,
                        {SyntheticLfSpec::independent(acc[0], 1.0), SyntheticLfSpec::independent(acc[1], 1.0),
                         SyntheticLfSpec::independent(acc[2], 1.0)},
                        11);
  const auto model = nb_em_fit(s.lm, kUniform);
  const Matrix post = nb_posterior(model, s.lm);
  const Matrix truth = oracle::bayes_posterior(symmetric_emissions(acc), kUniform, s.lm.votes(), s.lm.rows(), 3);
  EXPECT_LE((post - truth).cwiseAbs().mean(), 0.02);
  for (Index i = 0; i < post.rows(); ++i) EXPECT_NEAR(post.row(i).sum(), 1.0, 1e-9);
}

TEST(NaiveBayes, PenalizedObjectiveNeverDecreases) {
  const auto s = sample(5000,
                        {SyntheticLfSpec::independent(0.75, 0.5), SyntheticLfSpec::independent(0.8, 0.4),
                         SyntheticLfSpec::unipolar(2, 0.7, 0.3), SyntheticLfSpec::independent(0.6, 0.9)},
                        4);
  const auto model = nb_em_fit(s.lm, kUniform, {200, 1e-10, 1.0});
  ASSERT_GE(model.objective.size(), 2u);
  for (std::size_t t = 1; t < model.objective.size(); ++t)
    EXPECT_GE(model.objective[t], model.objective[t - 1] - 1e-8 * std::abs(model.objective[t - 1]));
}

TEST(NaiveBayes, ConfusionColumnsAreDistributions) {
  const auto s = sample(3000, {SyntheticLfSpec::independent(0.8, 0.5), SyntheticLfSpec::independent(0.7, 0.5)}, 2);
  const auto model = nb_em_fit(s.lm, kUniform);
  for (const Matrix& c : model.confusion) {
    EXPECT_GE(c.minCoeff(), 0.0);
    for (Index k = 0; k < 2; ++k) EXPECT_NEAR(c.col(k).sum(), 1.0, 1e-9);
  }
}

TEST(NaiveBayes, PosteriorExamples) {
  NaiveBayesModel uniform;
  uniform.prior = {0.6, 0.4};
  uniform.confusion.assign(2, Matrix::Constant(3, 2, 1.0 / 3.0));
  const LabelMatrix lm(2, 2, 2, {1, 2, 0, 1});
  const Matrix flat = nb_posterior(uniform, lm);
  EXPECT_NEAR(flat(0, 0), 0.6, 1e-12);
  EXPECT_NEAR(flat(1, 1), 0.4, 1e-12);

  // hand enumeration: LF1 (0.8 acc, 0.5 cov), LF2 (0.6 acc, full cov), votes (1, 2)
  NaiveBayesModel hand;
  hand.prior = {0.5, 0.5};
  Matrix c1(3, 2);
  c1 << 0.5, 0.5, 0.4, 0.1, 0.1, 0.4;
  Matrix c2(3, 2);
  c2 << 0.0, 0.0, 0.6, 0.4, 0.4, 0.6;
  hand.confusion = {c1, c2};
  const Matrix p = nb_posterior(hand, LabelMatrix(1, 2, 2, {1, 2}));
  const double a = 0.4 * 0.4;
  const double b = 0.1 * 0.6;
  EXPECT_NEAR(p(0, 0), a / (a + b), 1e-12);
}

TEST(NaiveBayes, DuplicatesPullThePosteriorTowardTheirVote) {
  std::vector<SyntheticLfSpec> specs{SyntheticLfSpec::independent(0.75, 1.0), SyntheticLfSpec::independent(0.75, 1.0),
                                     SyntheticLfSpec::independent(0.75, 1.0)};
  double last = -1.0;
  for (int k = 0; k <= 3; ++k) {
    const auto s = sample(20000, specs, 8);
    const auto model = nb_em_fit(s.lm, kUniform);
    // LF 0 (and its copies) says 1, the other two say 2
    std::vector<int> row(specs.size(), 1);
    row[1] = 2;
    row[2] = 2;
    const double p1 = nb_posterior(model, LabelMatrix(1, static_cast<Index>(specs.size()), 2, row))(0, 0);
    EXPECT_GT(p1, last) << "k=" << k;
    last = p1;
    specs.push_back(SyntheticLfSpec::duplicate_of(0));
  }
}

TEST(NaiveBayes, ZeroCoverageThrows) {
  EXPECT_THROW(nb_em_fit(LabelMatrix(3, 1, 2, {0, 0, 0}), kUniform), InvalidInput);
}

TEST(Triplet, ExactMomentsRecoverAccuraciesExactly) {
  const std::vector<double> a{0.8, 0.6, 0.4};
  Matrix m(3, 3);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) m(i, j) = i == j ? 1.0 : a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(j)];
  for (auto agg : {TripletAggregation::Single, TripletAggregation::Mean, TripletAggregation::Median}) {
    const auto est = triplet_from_moments(m, agg);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_LE(std::abs(est[i] - a[i]), 1e-12);
  }
  EXPECT_LE(std::abs(std::sqrt(0.48 * 0.32 / 0.24) - 0.8), 1e-12);
}

TEST(Triplet, SampledAccuraciesRecoveredAndErrorShrinks) {
  const std::vector<double> acc{0.9, 0.8, 0.7};
  std::vector<SyntheticLfSpec> specs;
  for (double a : acc) specs.push_back(SyntheticLfSpec::independent(a, 1.0));
  auto worst_error = [&](Index n) {
    const auto s = sample(n, specs, 21);
    const auto est = triplet_fit(s.lm, TripletAggregation::Mean);
    double worst = 0.0;
    for (std::size_t j = 0; j < 3; ++j) worst = std::max(worst, std::abs(est.accuracy[j] - acc[j]));
    return worst;
  };
  const double big = worst_error(50000);
  EXPECT_LE(big, 0.05);
  EXPECT_LE(big, worst_error(5000) + 0.01);
}

TEST(Triplet, Preconditions) {
  EXPECT_THROW(triplet_fit(LabelMatrix(2, 2, 2, {1, 2, 2, 1}), TripletAggregation::Mean), InvalidInput);
  EXPECT_THROW(triplet_fit(LabelMatrix(1, 3, 3, {1, 2, 3}), TripletAggregation::Mean), InvalidInput);
}

TEST(Triplet, PosteriorExamples) {
  const LabelMatrix lm(2, 3, 2, {1, 2, 1, 1, 0, 0});
  TripletEstimate half;
  half.accuracy = {0.5, 0.5, 0.5};
  const std::vector<double> prior{0.3, 0.7};
  const Matrix p = triplet_posterior(half, lm, prior);
  EXPECT_NEAR(p(0, 0), 0.3, 1e-12);
  TripletEstimate sure;
  sure.accuracy = {1 - TripletEstimate::kDelta, 0.6, 0.6};
  EXPECT_GT(triplet_posterior(sure, lm, kUniform)(1, 0), 0.99);

  // same symmetric confusions through the Naive-Bayes path
  NaiveBayesModel nb;
  nb.prior = prior;
  for (double a : {0.9, 0.7, 0.65}) {
    Matrix c(3, 2);
    c << 0.5, 0.5, 0.5 * a, 0.5 * (1 - a), 0.5 * (1 - a), 0.5 * a;
    nb.confusion.push_back(c);
  }
  TripletEstimate est;
  est.accuracy = {0.9, 0.7, 0.65};
  EXPECT_LE((triplet_posterior(est, lm, prior) - nb_posterior(nb, lm)).cwiseAbs().maxCoeff(), 1e-12);
}
