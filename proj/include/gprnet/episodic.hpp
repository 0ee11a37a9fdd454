#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"
#include "error.hpp"
#include "model.hpp"
#include "random.hpp"

namespace gprnet {

/// Pooled global features (one row per cloud) with their category labels.
struct FeatureDataset {
  std::vector<std::vector<double>> features;
  std::vector<int> labels;

  std::size_t size() const { return features.size(); }
  std::size_t width() const { return features.empty() ? 0 : features.front().size(); }

  std::vector<int> categories() const {
    std::set<int> s(labels.begin(), labels.end());
    return {s.begin(), s.end()};
  }
};

/// Disjoint partition of category ids into training and test categories.
struct SplitSpec {
  std::vector<int> train_categories;
  std::vector<int> test_categories;
  std::uint64_t seed = 0;
};

inline SplitSpec make_split(std::span<const int> category_ids, std::size_t n_train, Rng& rng,
                            std::uint64_t seed = 0) {
  std::vector<int> ids(category_ids.begin(), category_ids.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (n_train < 1 || n_train >= ids.size()) {
    throw InvalidArgument("make_split: n_train=" + std::to_string(n_train) + " must lie in [1, " +
                          std::to_string(ids.size()) + ")");
  }
  std::shuffle(ids.begin(), ids.end(), rng);
  SplitSpec split{{ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train)},
                  {ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end()},
                  seed};
  std::sort(split.train_categories.begin(), split.train_categories.end());
  std::sort(split.test_categories.begin(), split.test_categories.end());
  return split;
}

/// Sample indices grouped by category, restricted to `categories`.
using ClassIndex = std::map<int, std::vector<std::size_t>>;

inline ClassIndex index_by_class(std::span<const int> labels, std::span<const int> categories) {
  ClassIndex idx;
  for (int c : categories) idx[c];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (auto it = idx.find(labels[i]); it != idx.end()) it->second.push_back(i);
  }
  return idx;
}

/// K-way episode: per way, shots support and queries_per_way query samples.
struct Episode {
  std::vector<int> classes;
  std::vector<std::vector<std::size_t>> support;  // per way
  std::vector<std::vector<std::size_t>> query;    // per way

  std::size_t ways() const { return classes.size(); }
};

inline Episode sample_episode(const ClassIndex& data, std::size_t ways, std::size_t shots, std::size_t queries,
                              Rng& rng) {
  if (ways > data.size()) {
    throw InvalidArgument("sample_episode: " + std::to_string(ways) + "-way episode from " +
                          std::to_string(data.size()) + " categories");
  }
  std::vector<int> cats;
  for (const auto& [c, _] : data) cats.push_back(c);
  std::shuffle(cats.begin(), cats.end(), rng);
  cats.resize(ways);

  Episode ep;
  for (int c : cats) {
    std::vector<std::size_t> pool = data.at(c);
    if (pool.size() < shots + queries) {
      throw InvalidArgument("sample_episode: category " + std::to_string(c) + " has " + std::to_string(pool.size()) +
                            " samples, needs " + std::to_string(shots + queries));
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    ep.classes.push_back(c);
    ep.support.emplace_back(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(shots));
    ep.query.emplace_back(pool.begin() + static_cast<std::ptrdiff_t>(shots),
                          pool.begin() + static_cast<std::ptrdiff_t>(shots + queries));
  }
  return ep;
}

inline EpisodeBatch to_batch(const Episode& ep, const FeatureDataset& data) {
  EpisodeBatch b;
  for (std::size_t w = 0; w < ep.ways(); ++w) {
    for (auto i : ep.support[w]) {
      b.support.push_back(data.features[i]);
      b.support_labels.push_back(ep.classes[w]);
    }
    for (auto i : ep.query[w]) {
      b.query.push_back(data.features[i]);
      b.query_labels.push_back(ep.classes[w]);
    }
  }
  return b;
}

/// lr_min + (lr_max - lr_min)(1 + cos(pi step / total)) / 2
inline double cosine_lr(std::size_t step, std::size_t total_steps, double lr_max, double lr_min) {
  if (total_steps < 1 || step > total_steps) {
    throw InvalidArgument("cosine_lr: step " + std::to_string(step) + " outside [0, " + std::to_string(total_steps) +
                          "]");
  }
  constexpr double kPi = 3.14159265358979323846;
  const double t = static_cast<double>(step) / static_cast<double>(total_steps);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(kPi * t));
}

struct Velocity {
  std::vector<double> weight;
  std::vector<double> bias;

  static Velocity zeros_like(const LinearLayer& layer) {
    return {std::vector<double>(layer.weight.size(), 0.0), std::vector<double>(layer.bias.size(), 0.0)};
  }
};

/// Classical SGD with momentum and L2 weight decay folded into the gradient:
///   g' = g + wd * p;  v = momentum * v + g';  p -= lr * v
inline void sgd_step(LinearLayer& layer, const LayerGradients& grad, Velocity& velocity, double lr, double momentum,
                     double weight_decay) {
  if (grad.weight.size() != layer.weight.size() || grad.bias.size() != layer.bias.size() ||
      velocity.weight.size() != layer.weight.size() || velocity.bias.size() != layer.bias.size()) {
    throw InvalidArgument("sgd_step: shape mismatch");
  }
  auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& v, const char* name) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!std::isfinite(g[i])) {
        throw NumericError(std::string("sgd_step: non-finite gradient in ") + name + "[" + std::to_string(i) +
                           "] = " + std::to_string(g[i]));
      }
      v[i] = momentum * v[i] + (g[i] + weight_decay * p[i]);
      p[i] -= lr * v[i];
    }
  };
  update(layer.weight, grad.weight, velocity.weight, "weight");
  update(layer.bias, grad.bias, velocity.bias, "bias");
}

struct EvalResult {
  std::vector<double> accuracies;  // per episode
  double mean = 0.0;
  double std = 0.0;
  std::uint64_t seed = 0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;            // mean over the epoch's episodes
  double train_accuracy = 0.0;  // pre-update query accuracy over the epoch
  double lr_first = 0.0;
  double lr_last = 0.0;
  std::optional<double> val_accuracy;
};

struct TrainResult {
  LinearLayer layer;
  std::vector<EpochLog> epochs;
  std::vector<double> lr_trace;  // learning rate of every optimizer step
};

/// Population mean and standard deviation.
inline std::pair<double, double> mean_std(std::span<const double> v) {
  if (v.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

/// Few-shot accuracy of a frozen layer: prototypes from each episode's support,
/// fraction of queries classified correctly. Episode e draws from its own RNG
/// stream derive_seed(seed, kEval, e).
inline EvalResult evaluate(const LinearLayer& layer, const FeatureDataset& data, std::span<const int> test_categories,
                           const TrainConfig& cfg, std::uint64_t seed, std::size_t episodes) {
  const auto index = index_by_class(data.labels, test_categories);
  const auto space = cfg.embedding_space();
  EvalResult res;
  res.seed = seed;
  res.accuracies.reserve(episodes);
  for (std::size_t e = 0; e < episodes; ++e) {
    Rng rng(derive_seed(seed, stream::kEval, e));
    const Episode ep = sample_episode(index, cfg.eval_ways(), cfg.shots, cfg.queries_per_way, rng);
    std::vector<LabeledEmbedding> support;
    for (std::size_t w = 0; w < ep.ways(); ++w) {
      for (auto i : ep.support[w]) support.push_back({forward(data.features[i], layer), ep.classes[w]});
    }
    const auto protos = compute_prototypes(support, ep.classes);
    std::size_t correct = 0, total = 0;
    for (std::size_t w = 0; w < ep.ways(); ++w) {
      for (auto i : ep.query[w]) {
        correct += predict(protos, forward(data.features[i], layer), space) == ep.classes[w] ? 1 : 0;
        ++total;
      }
    }
    res.accuracies.push_back(static_cast<double>(correct) / static_cast<double>(total));
  }
  std::tie(res.mean, res.std) = mean_std(res.accuracies);
  return res;
}

inline EvalResult evaluate(const LinearLayer& layer, const FeatureDataset& data, std::span<const int> test_categories,
                           const TrainConfig& cfg, std::uint64_t seed) {
  return evaluate(layer, data, test_categories, cfg, seed, cfg.test_episodes);
}

/// Episodic training: one SGD step per episode, cosine schedule over all
/// epochs * train_episodes_per_epoch steps, the last step at lr_min.
inline TrainResult train(const FeatureDataset& data, std::span<const int> train_categories, const TrainConfig& cfg,
                         std::uint64_t seed, std::span<const int> val_categories = {}) {
  validate(cfg);
  const auto space = cfg.embedding_space();
  const auto index = index_by_class(data.labels, train_categories);

  Rng init_rng(derive_seed(seed, stream::kInit));
  Rng episode_rng(derive_seed(seed, stream::kTrain));
  TrainResult res{LinearLayer::initialize(data.width(), LinearLayer::kDefaultOut, init_rng), {}, {}};
  Velocity velocity = Velocity::zeros_like(res.layer);

  const std::size_t total = cfg.epochs * cfg.train_episodes_per_epoch;
  const std::size_t horizon = std::max<std::size_t>(total - 1, 1);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochLog log;
    log.epoch = epoch;
    std::size_t correct = 0, seen = 0;
    for (std::size_t e = 0; e < cfg.train_episodes_per_epoch; ++e, ++step) {
      const Episode ep = sample_episode(index, cfg.ways, cfg.shots, cfg.queries_per_way, episode_rng);
      const EpisodeResult r = backward(to_batch(ep, data), res.layer, space);
      const double lr = cosine_lr(std::min(step, horizon), horizon, cfg.lr_max, cfg.lr_min);
      sgd_step(res.layer, r.grad, velocity, lr, cfg.momentum, cfg.weight_decay);
      res.lr_trace.push_back(lr);
      if (e == 0) log.lr_first = lr;
      log.lr_last = lr;
      log.loss += r.loss;
      correct += r.correct;
      seen += r.logits.rows();
    }
    log.loss /= static_cast<double>(cfg.train_episodes_per_epoch);
    log.train_accuracy = static_cast<double>(correct) / static_cast<double>(seen);
    if (cfg.val_episodes > 0 && !val_categories.empty()) {
      log.val_accuracy =
          evaluate(res.layer, data, val_categories, cfg, derive_seed(seed, stream::kEval, epoch), cfg.val_episodes)
              .mean;
    }
    res.epochs.push_back(log);
  }
  return res;
}

/// One seed of the full protocol: split categories, train, evaluate.
struct SeedRun {
  SplitSpec split;
  TrainResult training;
  EvalResult evaluation;
};

inline SeedRun run_seed(const FeatureDataset& data, const TrainConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  Rng split_rng(derive_seed(seed, stream::kSplit));
  const auto cats = data.categories();
  SplitSpec split = make_split(cats, cfg.train_classes, split_rng, seed);
  TrainResult tr = train(data, split.train_categories, cfg, seed, split.test_categories);
  EvalResult ev = evaluate(tr.layer, data, split.test_categories, cfg, seed);
  return {std::move(split), std::move(tr), std::move(ev)};
}

/// Mean accuracy of each seed plus grand mean and std across seeds.
struct SeedSummary {
  std::vector<std::uint64_t> seeds;
  std::vector<double> means;
  double grand_mean = 0.0;
  double grand_std = 0.0;
};

inline SeedSummary summarize_seeds(std::span<const EvalResult> runs) {
  SeedSummary s;
  for (const auto& r : runs) {
    s.seeds.push_back(r.seed);
    s.means.push_back(r.mean);
  }
  std::tie(s.grand_mean, s.grand_std) = mean_std(s.means);
  return s;
}

}  // namespace gprnet
