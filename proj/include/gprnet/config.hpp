#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "error.hpp"
#include "model.hpp"
#include "pipeline.hpp"
#include "pool.hpp"

namespace gprnet {

/// Every knob of a training/evaluation run. Names double as config-file keys
/// and CLI flag names.
struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t train_episodes_per_epoch = 4;
  std::size_t test_episodes = 300;
  std::size_t ways = 5;
  std::size_t shots = 10;
  std::size_t queries_per_way = 20;
  /// Ways used at evaluation time; 0 means "same as ways".
  std::size_t test_ways = 0;
  double lr_max = 0.1;
  double lr_min = 0.001;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::size_t points_per_cloud = 512;
  std::size_t k_neighbors = 40;
  Aggregator aggregator = Aggregator::kMax;
  bool laplace = true;
  std::string space = "hyperbolic";
  double curvature = 1.0;
  std::size_t train_classes = 24;
  std::size_t seeds = 6;
  std::uint64_t seed = 0;
  /// Validation episodes on the test split after every epoch; 0 disables.
  std::size_t val_episodes = 0;

  std::size_t eval_ways() const { return test_ways == 0 ? ways : test_ways; }
  std::size_t episode_size() const { return ways * (shots + queries_per_way); }
  EmbeddingSpace embedding_space() const { return parse_space(space, curvature); }
  FeatureOptions feature_options() const { return {k_neighbors, laplace, aggregator}; }
};

namespace detail {

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  if constexpr (std::is_floating_point_v<T>) {
    try {
      std::size_t pos = 0;
      out = std::stod(std::string(v), &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("config key '" + std::string(key) + "': bad number '" + std::string(v) + "'");
    }
  } else {
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw ConfigError("config key '" + std::string(key) + "': bad integer '" + std::string(v) + "'");
    }
  }
  return out;
}

inline bool parse_flag(std::string_view key, std::string_view v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + std::string(key) + "': expected on/off, got '" + std::string(v) + "'");
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "epochs",       "train_episodes_per_epoch", "test_episodes", "ways",          "shots",
      "queries_per_way", "test_ways",             "lr_max",        "lr_min",        "momentum",
      "weight_decay", "points_per_cloud",         "k_neighbors",   "aggregator",    "laplace",
      "space",        "curvature",                "train_classes", "seeds",         "seed",
      "val_episodes"};
  return keys;
}

/// Sets one field by name; throws ConfigError for unknown keys or bad values.
inline void set_config_value(TrainConfig& cfg, std::string_view key, std::string_view value) {
  using detail::parse_number;
  const std::string v = detail::trim(value);
  if (key == "epochs") cfg.epochs = parse_number<std::size_t>(key, v);
  else if (key == "train_episodes_per_epoch") cfg.train_episodes_per_epoch = parse_number<std::size_t>(key, v);
  else if (key == "test_episodes") cfg.test_episodes = parse_number<std::size_t>(key, v);
  else if (key == "ways") cfg.ways = parse_number<std::size_t>(key, v);
  else if (key == "shots") cfg.shots = parse_number<std::size_t>(key, v);
  else if (key == "queries_per_way") cfg.queries_per_way = parse_number<std::size_t>(key, v);
  else if (key == "test_ways") cfg.test_ways = parse_number<std::size_t>(key, v);
  else if (key == "lr_max") cfg.lr_max = parse_number<double>(key, v);
  else if (key == "lr_min") cfg.lr_min = parse_number<double>(key, v);
  else if (key == "momentum") cfg.momentum = parse_number<double>(key, v);
  else if (key == "weight_decay") cfg.weight_decay = parse_number<double>(key, v);
  else if (key == "points_per_cloud") cfg.points_per_cloud = parse_number<std::size_t>(key, v);
  else if (key == "k_neighbors") cfg.k_neighbors = parse_number<std::size_t>(key, v);
  else if (key == "aggregator") {
    try {
      cfg.aggregator = parse_aggregator(v);
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "laplace") cfg.laplace = detail::parse_flag(key, v);
  else if (key == "space") {
    if (v == "euc" || v == "euclidean") cfg.space = "euclidean";
    else if (v == "hyp" || v == "hyperbolic") cfg.space = "hyperbolic";
    else throw ConfigError("config key 'space': expected euc or hyp, got '" + v + "'");
  } else if (key == "curvature") cfg.curvature = parse_number<double>(key, v);
  else if (key == "train_classes") cfg.train_classes = parse_number<std::size_t>(key, v);
  else if (key == "seeds") cfg.seeds = parse_number<std::size_t>(key, v);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "val_episodes") cfg.val_episodes = parse_number<std::size_t>(key, v);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

/// Flat key=value text; '#' starts a comment.
inline void apply_config_text(TrainConfig& cfg, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    set_config_value(cfg, detail::trim(std::string_view(line).substr(0, eq)), std::string_view(line).substr(eq + 1));
  }
}

inline std::string config_value(const TrainConfig& cfg, std::string_view key) {
  char buf[40];
  auto num = [&](double v) {  // shortest text that round-trips
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  if (key == "epochs") return std::to_string(cfg.epochs);
  if (key == "train_episodes_per_epoch") return std::to_string(cfg.train_episodes_per_epoch);
  if (key == "test_episodes") return std::to_string(cfg.test_episodes);
  if (key == "ways") return std::to_string(cfg.ways);
  if (key == "shots") return std::to_string(cfg.shots);
  if (key == "queries_per_way") return std::to_string(cfg.queries_per_way);
  if (key == "test_ways") return std::to_string(cfg.test_ways);
  if (key == "lr_max") return num(cfg.lr_max);
  if (key == "lr_min") return num(cfg.lr_min);
  if (key == "momentum") return num(cfg.momentum);
  if (key == "weight_decay") return num(cfg.weight_decay);
  if (key == "points_per_cloud") return std::to_string(cfg.points_per_cloud);
  if (key == "k_neighbors") return std::to_string(cfg.k_neighbors);
  if (key == "aggregator") return to_string(cfg.aggregator);
  if (key == "laplace") return cfg.laplace ? "on" : "off";
  if (key == "space") return cfg.space;
  if (key == "curvature") return num(cfg.curvature);
  if (key == "train_classes") return std::to_string(cfg.train_classes);
  if (key == "seeds") return std::to_string(cfg.seeds);
  if (key == "seed") return std::to_string(cfg.seed);
  if (key == "val_episodes") return std::to_string(cfg.val_episodes);
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

/// Canonical key=value rendering; apply_config_text(to_config_text(c)) == c.
inline std::string to_config_text(const TrainConfig& cfg) {
  std::string out;
  for (const auto& key : config_keys()) out += key + "=" + config_value(cfg, key) + "\n";
  return out;
}

inline void validate(const TrainConfig& cfg) {
  auto positive = [](std::string_view key, auto v) {
    if (!(v > 0)) throw ConfigError("config key '" + std::string(key) + "' must be positive");
  };
  positive("epochs", cfg.epochs);
  positive("train_episodes_per_epoch", cfg.train_episodes_per_epoch);
  positive("test_episodes", cfg.test_episodes);
  positive("ways", cfg.ways);
  positive("shots", cfg.shots);
  positive("queries_per_way", cfg.queries_per_way);
  positive("lr_max", cfg.lr_max);
  positive("lr_min", cfg.lr_min);
  positive("points_per_cloud", cfg.points_per_cloud);
  positive("k_neighbors", cfg.k_neighbors);
  positive("train_classes", cfg.train_classes);
  positive("seeds", cfg.seeds);
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0) throw ConfigError("momentum must lie in [0, 1)");
  if (cfg.weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (cfg.lr_min > cfg.lr_max) throw ConfigError("lr_min exceeds lr_max");
  if (cfg.k_neighbors < 2) throw ConfigError("k_neighbors must be >= 2");
  if (cfg.k_neighbors + 1 > cfg.points_per_cloud) throw ConfigError("k_neighbors must be < points_per_cloud");
  if (cfg.space == "hyperbolic" && !(cfg.curvature > 0.0)) throw ConfigError("curvature must be > 0");
}

}  // namespace gprnet
