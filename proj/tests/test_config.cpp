#include <gtest/gtest.h>

#include <filesystem>

#include "gprnet/config.hpp"
#include "gprnet/dataset.hpp"
#include "gprnet/synth.hpp"

using namespace gprnet;

TEST(TrainConfig, DefaultsMatchRecipe) {
  const TrainConfig cfg;
  EXPECT_EQ(cfg.epochs, 50u);
  EXPECT_EQ(cfg.train_episodes_per_epoch, 4u);
  EXPECT_EQ(cfg.test_episodes, 300u);
  EXPECT_EQ(cfg.episode_size(), 150u);
  EXPECT_EQ(cfg.lr_max, 0.1);
  EXPECT_EQ(cfg.lr_min, 0.001);
  EXPECT_EQ(cfg.momentum, 0.9);
  EXPECT_EQ(cfg.weight_decay, 1e-4);
  EXPECT_EQ(cfg.points_per_cloud, 512u);
  EXPECT_EQ(cfg.k_neighbors, 40u);
  EXPECT_EQ(cfg.seeds, 6u);
  EXPECT_EQ(cfg.feature_options().width(), 30u);
  EXPECT_NO_THROW(validate(cfg));
}

TEST(TrainConfig, TextRoundTrip) {
  TrainConfig cfg;
  cfg.aggregator = Aggregator::kSum;
  cfg.laplace = false;
  cfg.space = "euclidean";
  cfg.lr_max = 0.3;
  cfg.seed = 12345;
  TrainConfig back;
  apply_config_text(back, to_config_text(cfg));
  EXPECT_EQ(to_config_text(back), to_config_text(cfg));
}

TEST(TrainConfig, ParsesFileWithComments) {
  TrainConfig cfg;
  apply_config_text(cfg, "# run\nways = 3\nspace=euc\n\naggregator=mean  # pooled\nlaplace=off\n");
  EXPECT_EQ(cfg.ways, 3u);
  EXPECT_EQ(cfg.space, "euclidean");
  EXPECT_EQ(cfg.aggregator, Aggregator::kMean);
  EXPECT_FALSE(cfg.laplace);
}

TEST(TrainConfig, Errors) {
  TrainConfig cfg;
  EXPECT_THROW(apply_config_text(cfg, "bogus=1\n"), ConfigError);
  EXPECT_THROW(apply_config_text(cfg, "ways\n"), ConfigError);
  EXPECT_THROW(apply_config_text(cfg, "ways=x\n"), ConfigError);
  EXPECT_THROW(apply_config_text(cfg, "space=sphere\n"), ConfigError);
  TrainConfig bad;
  bad.k_neighbors = 600;
  EXPECT_THROW(validate(bad), ConfigError);
  bad = TrainConfig{};
  bad.momentum = 1.0;
  EXPECT_THROW(validate(bad), ConfigError);
}

TEST(Dataset, WriteReadFeaturize) {
  const auto dir = std::filesystem::temp_directory_path() / "gprnet_test_dataset";
  std::filesystem::remove_all(dir);
  const ShapeSpec tmpl{ShapeFamily::kSphere, 128, 0.0, false, 0};
  const std::array<ShapeFamily, 2> fams{ShapeFamily::kCube, ShapeFamily::kTorus};
  CloudDataset ds{generate_dataset(fams, 3, tmpl, 1), {{1, "cube"}, {4, "torus"}}};
  write_dataset(dir, ds);
  const auto back = read_dataset(dir);
  ASSERT_EQ(back.clouds.size(), 6u);
  EXPECT_EQ(back.clouds[4].points, ds.clouds[4].points);
  EXPECT_EQ(back.clouds[4].label, ds.clouds[4].label);
  EXPECT_EQ(back.category_names.at(4), "torus");

  TrainConfig cfg;
  cfg.points_per_cloud = 100;
  cfg.k_neighbors = 10;
  const auto feats = featurize(back.clouds, cfg, 3);
  EXPECT_EQ(feats.size(), 6u);
  EXPECT_EQ(feats.width(), 30u);
  EXPECT_EQ(featurize(back.clouds, cfg, 3).features, feats.features);
  cfg.points_per_cloud = 200;
  EXPECT_THROW(featurize(back.clouds, cfg, 3), InvalidArgument);
  std::filesystem::remove_all(dir);
}
