#include <gtest/gtest.h>

#include <set>

#include "gprnet/episodic.hpp"
#include "oracles.hpp"

using namespace gprnet;

namespace {

/// Well separated Gaussian blobs in feature space, one per class.
FeatureDataset blobs(std::size_t classes, std::size_t per_class, std::size_t width, double spread, Rng& rng) {
  FeatureDataset d;
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t c = 0; c < classes; ++c) {
    std::vector<double> center(width);
    for (double& v : center) v = 3.0 * g(rng);
    for (std::size_t i = 0; i < per_class; ++i) {
      std::vector<double> f(center);
      for (double& v : f) v += spread * g(rng);
      d.features.push_back(std::move(f));
      d.labels.push_back(static_cast<int>(c));
    }
  }
  return d;
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.ways = 2;
  cfg.shots = 5;
  cfg.queries_per_way = 5;
  cfg.epochs = 10;
  cfg.test_episodes = 50;
  cfg.points_per_cloud = 64;
  cfg.space = "euclidean";
  return cfg;
}

}  // namespace

TEST(MakeSplit, FortyCategories) {
  std::vector<int> cats(40);
  std::iota(cats.begin(), cats.end(), 0);
  Rng a(1), b(1);
  const auto s = make_split(cats, 24, a);
  EXPECT_EQ(s.train_categories.size(), 24u);
  EXPECT_EQ(s.test_categories.size(), 16u);
  std::set<int> all(s.train_categories.begin(), s.train_categories.end());
  for (int c : s.test_categories) EXPECT_TRUE(all.insert(c).second);
  EXPECT_EQ(all.size(), 40u);
  const auto again = make_split(cats, 24, b);
  EXPECT_EQ(again.train_categories, s.train_categories);
  EXPECT_THROW(make_split(cats, 40, a), InvalidArgument);
  EXPECT_THROW(make_split(cats, 0, a), InvalidArgument);
}

TEST(MakeSplit, AlwaysDisjoint) {
  std::vector<int> cats(40);
  std::iota(cats.begin(), cats.end(), 100);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const auto s = make_split(cats, 1 + seed % 39, rng);
    std::vector<int> both;
    std::set_intersection(s.train_categories.begin(), s.train_categories.end(), s.test_categories.begin(),
                          s.test_categories.end(), std::back_inserter(both));
    EXPECT_TRUE(both.empty());
  }
}

TEST(SampleEpisode, FiveWayTenShotTwentyQuery) {
  std::vector<int> labels;
  for (int c = 0; c < 8; ++c)
    for (int i = 0; i < 40; ++i) labels.push_back(c);
  const std::vector<int> cats{0, 1, 2, 3, 4, 5, 6, 7};
  const auto idx = index_by_class(labels, cats);
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const auto ep = sample_episode(idx, 5, 10, 20, rng);
    std::size_t total = 0;
    std::set<int> classes(ep.classes.begin(), ep.classes.end());
    EXPECT_EQ(classes.size(), 5u);
    for (std::size_t w = 0; w < 5; ++w) {
      EXPECT_EQ(ep.support[w].size(), 10u);
      EXPECT_EQ(ep.query[w].size(), 20u);
      std::set<std::size_t> s(ep.support[w].begin(), ep.support[w].end());
      for (auto q : ep.query[w]) EXPECT_FALSE(s.count(q));
      for (auto i : ep.support[w]) EXPECT_EQ(labels[i], ep.classes[w]);
      for (auto i : ep.query[w]) EXPECT_EQ(labels[i], ep.classes[w]);
      total += ep.support[w].size() + ep.query[w].size();
    }
    EXPECT_EQ(total, 150u);
  }
}

TEST(SampleEpisode, Boundaries) {
  std::vector<int> labels(30, 0);
  labels.resize(59, 1);  // class 1 has 29
  const std::vector<int> only0{0}, only1{1};
  Rng rng(1);
  const auto ep = sample_episode(index_by_class(labels, only0), 1, 10, 20, rng);
  std::set<std::size_t> used(ep.support[0].begin(), ep.support[0].end());
  used.insert(ep.query[0].begin(), ep.query[0].end());
  EXPECT_EQ(used.size(), 30u);
  EXPECT_THROW(sample_episode(index_by_class(labels, only1), 1, 10, 20, rng), InvalidArgument);
  EXPECT_THROW(sample_episode(index_by_class(labels, only1), 2, 1, 1, rng), InvalidArgument);
}

TEST(CosineLr, Endpoints) {
  EXPECT_DOUBLE_EQ(cosine_lr(0, 200, 0.1, 0.001), 0.1);
  EXPECT_DOUBLE_EQ(cosine_lr(200, 200, 0.1, 0.001), 0.001);
  EXPECT_NEAR(cosine_lr(100, 200, 0.1, 0.001), 0.0505, 1e-15);
  EXPECT_THROW(cosine_lr(201, 200, 0.1, 0.001), InvalidArgument);
  EXPECT_THROW(cosine_lr(0, 0, 0.1, 0.001), InvalidArgument);
}

TEST(SgdStep, PlainGradientDescent) {
  LinearLayer l = LinearLayer::zeros(1, 1);
  l.weight = {2.0};
  l.bias = {1.0};
  auto v = Velocity::zeros_like(l);
  sgd_step(l, {{0.5}, {-1.0}}, v, 0.1, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(l.weight[0], 2.0 - 0.05);
  EXPECT_DOUBLE_EQ(l.bias[0], 1.0 + 0.1);
}

TEST(SgdStep, MomentumCoast) {
  LinearLayer l = LinearLayer::zeros(1, 1);
  l.weight = {1.0};
  Velocity v{{2.0}, {0.0}};
  sgd_step(l, {{0.0}, {0.0}}, v, 0.1, 0.5, 0.0);
  EXPECT_DOUBLE_EQ(v.weight[0], 1.0);
  EXPECT_DOUBLE_EQ(l.weight[0], 0.9);
}

// f(w) = w^2 / 2, so grad = w. Two steps of the recurrence by hand:
//   g1 = w0 + wd w0 = 1.0001, v1 = 1.0001, w1 = 1 - 0.1 * 1.0001 = 0.89999
//   g2 = 0.89999 * 1.0001 = 0.900079999, v2 = 0.9 * 1.0001 + g2 = 1.800169999
//   w2 = 0.89999 - 0.1 * 1.800169999 = 0.7199730001
TEST(SgdStep, TwoStepQuadraticRecurrence) {
  LinearLayer l = LinearLayer::zeros(1, 1);
  l.weight = {1.0};
  auto v = Velocity::zeros_like(l);
  for (int s = 0; s < 2; ++s) sgd_step(l, {{l.weight[0]}, {0.0}}, v, 0.1, 0.9, 1e-4);
  EXPECT_NEAR(l.weight[0], 0.7199730001, 1e-12);
  EXPECT_NEAR(v.weight[0], 1.800169999, 1e-12);
}

// Weight decay changes the step but not the reported loss.
TEST(SgdStep, WeightDecayOnlyInStep) {
  Rng rng(2);
  const auto data = blobs(2, 10, 4, 0.3, rng);
  EpisodeBatch b;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (i % 2 ? b.query : b.support).push_back(data.features[i]);
    (i % 2 ? b.query_labels : b.support_labels).push_back(data.labels[i]);
  }
  const auto start = LinearLayer::initialize(4, 32, rng);
  const auto space = EmbeddingSpace::euclidean();
  LinearLayer plain = start, decayed = start;
  auto vp = Velocity::zeros_like(start), vd = Velocity::zeros_like(start);
  const auto r = backward(b, start, space);
  EXPECT_DOUBLE_EQ(r.loss, batch_loss(b, start, space));
  sgd_step(plain, r.grad, vp, 0.1, 0.9, 0.0);
  sgd_step(decayed, r.grad, vd, 0.1, 0.9, 0.5);
  for (std::size_t i = 0; i < start.weight.size(); ++i) {
    EXPECT_NEAR(decayed.weight[i], plain.weight[i] - 0.1 * 0.5 * start.weight[i], 1e-15);
  }
}

TEST(SgdStep, NonFiniteGradientAborts) {
  LinearLayer l = LinearLayer::zeros(1, 1);
  auto v = Velocity::zeros_like(l);
  EXPECT_THROW(sgd_step(l, {{std::nan("")}, {0.0}}, v, 0.1, 0.9, 0.0), NumericError);
  EXPECT_THROW(sgd_step(l, {{1.0, 2.0}, {0.0}}, v, 0.1, 0.9, 0.0), InvalidArgument);
}

TEST(Train, SeparableClassesReachFullAccuracy) {
  Rng rng(5);
  const auto data = blobs(2, 30, 30, 0.3, rng);
  const std::vector<int> cats{0, 1};
  const auto cfg = small_config();
  const auto res = train(data, cats, cfg, 11);
  EXPECT_EQ(res.epochs.size(), 10u);
  EXPECT_DOUBLE_EQ(res.epochs.back().train_accuracy, 1.0);
  EXPECT_DOUBLE_EQ(evaluate(res.layer, data, cats, cfg, 3).mean, 1.0);
}

TEST(Train, DeterministicPerSeed) {
  Rng rng(6);
  const auto data = blobs(4, 20, 30, 1.0, rng);
  const std::vector<int> cats{0, 1, 2, 3};
  auto cfg = small_config();
  cfg.space = "hyperbolic";
  const auto a = train(data, cats, cfg, 99);
  const auto b = train(data, cats, cfg, 99);
  EXPECT_EQ(a.layer, b.layer);
  EXPECT_EQ(a.lr_trace, b.lr_trace);
  EXPECT_NE(a.layer, train(data, cats, cfg, 100).layer);
}

TEST(Train, ScheduleEndpointsAtDefaults) {
  Rng rng(7);
  const auto data = blobs(6, 30, 30, 1.0, rng);
  const std::vector<int> cats{0, 1, 2, 3, 4};
  TrainConfig cfg;
  cfg.shots = 10;
  cfg.queries_per_way = 20;
  cfg.points_per_cloud = 64;
  const auto res = train(data, cats, cfg, 1);
  ASSERT_EQ(res.lr_trace.size(), 200u);
  EXPECT_DOUBLE_EQ(res.lr_trace.front(), 0.1);
  EXPECT_LE(res.lr_trace.back(), 0.001 + 1e-9);
  EXPECT_DOUBLE_EQ(res.epochs.front().lr_first, 0.1);
  EXPECT_LE(res.epochs.back().lr_last, 0.001 + 1e-9);
  EXPECT_TRUE(std::is_sorted(res.lr_trace.rbegin(), res.lr_trace.rend()));
}

TEST(Evaluate, UntrainedIsChance) {
  Rng rng(8);
  const auto data = blobs(5, 40, 30, 1.0, rng);
  const std::vector<int> cats{0, 1, 2, 3, 4};
  TrainConfig cfg;
  cfg.space = "euclidean";
  // All-zero layer: every embedding is 0, all logits tie, predictions pick the
  // lowest class id, so exactly one way in five is right.
  const auto res = evaluate(LinearLayer::zeros(30, 32), data, cats, cfg, 1);
  EXPECT_EQ(res.accuracies.size(), 300u);
  EXPECT_NEAR(res.mean, 0.2, 1e-12);
}

TEST(Evaluate, RandomLayerNearChanceOnNoise) {
  // Features carry no class signal, so any layer sits at chance.
  Rng rng(9);
  FeatureDataset data;
  std::normal_distribution<double> g(0.0, 1.0);
  for (int c = 0; c < 5; ++c)
    for (int i = 0; i < 40; ++i) {
      data.features.push_back(oracle::random_vector(30, 1.0, rng));
      data.labels.push_back(c);
    }
  const std::vector<int> cats{0, 1, 2, 3, 4};
  TrainConfig cfg;
  const auto layer = LinearLayer::initialize(30, 32, rng);
  const auto res = evaluate(layer, data, cats, cfg, 2);
  // 300 episodes x 100 queries; binomial sd of the mean ~0.004, but queries
  // within an episode share prototypes, so allow a wide band.
  EXPECT_NEAR(res.mean, 0.2, 0.03);
}

TEST(Evaluate, LabelPermutationLeavesAccuracyUnchanged) {
  Rng rng(10);
  auto data = blobs(5, 40, 30, 2.0, rng);
  const std::vector<int> cats{0, 1, 2, 3, 4};
  TrainConfig cfg;
  cfg.test_episodes = 40;
  const auto layer = LinearLayer::initialize(30, 32, rng);
  const auto base = evaluate(layer, data, cats, cfg, 4);
  // Relabel with an order-preserving map so episode sampling is unchanged.
  for (int& l : data.labels) l = 10 * l + 7;
  const std::vector<int> renamed{7, 17, 27, 37, 47};
  EXPECT_EQ(evaluate(layer, data, renamed, cfg, 4).accuracies, base.accuracies);
}

TEST(SeedSummary, ShapeAndStatistics) {
  std::vector<EvalResult> runs;
  for (int s = 0; s < 6; ++s) runs.push_back({{}, 0.5 + 0.1 * s, 0.0, static_cast<std::uint64_t>(s)});
  const auto sum = summarize_seeds(runs);
  EXPECT_EQ(sum.means.size(), 6u);
  EXPECT_NEAR(sum.grand_mean, 0.75, 1e-12);
  // squared deviations sum to 2 * (0.25^2 + 0.15^2 + 0.05^2) = 0.175
  EXPECT_NEAR(sum.grand_std, std::sqrt(0.175 / 6.0), 1e-12);
}
