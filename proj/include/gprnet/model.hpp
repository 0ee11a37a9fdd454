#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ball.hpp"
#include "cloudio.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "random.hpp"

namespace gprnet {

/// The only learnable component: e = W g + b, no nonlinearity.
struct LinearLayer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<double> weight;  // out_dim x in_dim, row-major
  std::vector<double> bias;    // out_dim

  static constexpr std::size_t kDefaultIn = 30;
  static constexpr std::size_t kDefaultOut = 32;

  static LinearLayer zeros(std::size_t in, std::size_t out) {
    return {in, out, std::vector<double>(in * out, 0.0), std::vector<double>(out, 0.0)};
  }

  /// W ~ U(-sqrt(1/in), sqrt(1/in)), b = 0.
  static LinearLayer initialize(std::size_t in, std::size_t out, Rng& rng) {
    LinearLayer layer = zeros(in, out);
    const double bound = std::sqrt(1.0 / static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : layer.weight) w = dist(rng);
    return layer;
  }

  std::size_t parameter_count() const { return weight.size() + bias.size(); }

  double& w(std::size_t r, std::size_t c) { return weight[r * in_dim + c]; }
  double w(std::size_t r, std::size_t c) const { return weight[r * in_dim + c]; }

  friend bool operator==(const LinearLayer&, const LinearLayer&) = default;
};

inline std::vector<double> forward(std::span<const double> g, const LinearLayer& layer) {
  if (g.size() != layer.in_dim) {
    throw InvalidArgument("forward: feature width " + std::to_string(g.size()) + " but layer expects " +
                          std::to_string(layer.in_dim));
  }
  std::vector<double> e(layer.bias);
  for (std::size_t r = 0; r < layer.out_dim; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < layer.in_dim; ++c) acc += layer.w(r, c) * g[c];
    e[r] += acc;
  }
  return e;
}

/// Metric used to compare embeddings: plain Euclidean distance, or the
/// Poincare distance between the origin exponential maps of the embeddings.
class EmbeddingSpace {
 public:
  static EmbeddingSpace euclidean() { return EmbeddingSpace(std::nullopt); }
  static EmbeddingSpace hyperbolic(Curvature c) { return EmbeddingSpace(c); }

  bool is_hyperbolic() const { return c_.has_value(); }
  Curvature curvature() const {
    if (!c_) throw InvalidArgument("euclidean space has no curvature");
    return *c_;
  }
  std::string name() const { return c_ ? "hyperbolic" : "euclidean"; }

  /// Point used for distance evaluation.
  std::vector<double> embed(std::span<const double> e) const {
    if (!c_) return {e.begin(), e.end()};
    return ball::exp_map_origin(e, *c_);
  }

  /// Distance between two already-embedded points.
  double distance(std::span<const double> x, std::span<const double> y) const {
    return c_ ? ball::distance(x, y, *c_) : ball::euclidean_distance(x, y);
  }

  DistanceGradient distance_grad(std::span<const double> x, std::span<const double> y) const {
    return c_ ? ball::distance_grad(x, y, *c_) : ball::euclidean_distance_grad(x, y);
  }

  /// Pulls a gradient w.r.t. the embedded point back to the flat coordinates.
  std::vector<double> pullback(std::span<const double> e, std::span<const double> upstream) const {
    if (!c_) return {upstream.begin(), upstream.end()};
    return ball::exp_map_origin_vjp(e, upstream, *c_);
  }

  friend bool operator==(const EmbeddingSpace&, const EmbeddingSpace&) = default;

 private:
  explicit EmbeddingSpace(std::optional<Curvature> c) : c_(c) {}
  std::optional<Curvature> c_;
};

inline EmbeddingSpace parse_space(std::string_view name, double curvature) {
  if (name == "euc" || name == "euclidean") return EmbeddingSpace::euclidean();
  if (name == "hyp" || name == "hyperbolic") return EmbeddingSpace::hyperbolic(Curvature(curvature));
  throw InvalidArgument("unknown space '" + std::string(name) + "' (expected euc or hyp)");
}

struct LabeledEmbedding {
  std::vector<double> coords;
  int label = 0;
};

/// Class mean of support embeddings, in flat (pre-projection) coordinates.
struct Prototype {
  int class_id = 0;
  std::vector<double> coords;
};

/// One prototype per class in `classes` (kept in ascending class order).
inline std::vector<Prototype> compute_prototypes(std::span<const LabeledEmbedding> support,
                                                 std::span<const int> classes) {
  std::vector<int> sorted(classes.begin(), classes.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<Prototype> out;
  out.reserve(sorted.size());
  for (int cls : sorted) {
    Prototype p{cls, {}};
    std::size_t count = 0;
    for (const auto& s : support) {
      if (s.label != cls) continue;
      if (p.coords.empty()) p.coords.assign(s.coords.size(), 0.0);
      for (std::size_t i = 0; i < s.coords.size(); ++i) p.coords[i] += s.coords[i];
      ++count;
    }
    if (count == 0) throw InvalidArgument("compute_prototypes: class " + std::to_string(cls) + " has no support");
    const double inv = 1.0 / static_cast<double>(count);
    for (double& v : p.coords) v *= inv;
    out.push_back(std::move(p));
  }
  return out;
}

/// Prototypes for every class present in the support set.
inline std::vector<Prototype> compute_prototypes(std::span<const LabeledEmbedding> support) {
  std::vector<int> classes;
  for (const auto& s : support) classes.push_back(s.label);
  return compute_prototypes(support, classes);
}

struct EpisodeLoss {
  double loss = 0.0;
  Matrix logits;  // queries x prototypes, logits(q, k) = -d(query q, prototype k)
};

namespace detail {

inline std::size_t prototype_column(std::span<const Prototype> protos, int label) {
  for (std::size_t k = 0; k < protos.size(); ++k) {
    if (protos[k].class_id == label) return k;
  }
  throw InvalidArgument("episode_loss: query class " + std::to_string(label) + " has no prototype");
}

inline double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace detail

/// Mean over queries of d(query, own prototype) + log sum_k exp(-d(query, k)),
/// i.e. softmax cross-entropy over the logits -d.
inline EpisodeLoss episode_loss(std::span<const Prototype> protos, std::span<const LabeledEmbedding> queries,
                                const EmbeddingSpace& space) {
  if (queries.empty()) throw InvalidArgument("episode_loss: no queries");
  if (protos.empty()) throw InvalidArgument("episode_loss: no prototypes");
  std::vector<std::vector<double>> proto_pts;
  for (const auto& p : protos) proto_pts.push_back(space.embed(p.coords));

  EpisodeLoss out{0.0, Matrix(queries.size(), protos.size())};
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const std::size_t own = detail::prototype_column(protos, queries[q].label);
    const auto z = space.embed(queries[q].coords);
    for (std::size_t k = 0; k < protos.size(); ++k) out.logits(q, k) = -space.distance(z, proto_pts[k]);
    out.loss += -out.logits(q, own) + detail::log_sum_exp(out.logits.row(q));
  }
  out.loss /= static_cast<double>(queries.size());
  return out;
}

/// Nearest prototype; ties resolve to the lowest class id.
inline int predict(std::span<const Prototype> protos, std::span<const double> query, const EmbeddingSpace& space) {
  if (protos.empty()) throw InvalidArgument("predict: no prototypes");
  const auto z = space.embed(query);
  int best_class = 0;
  double best = 0.0;
  bool first = true;
  for (const auto& p : protos) {
    const double d = space.distance(z, space.embed(p.coords));
    if (first || d < best || (d == best && p.class_id < best_class)) {
      best = d;
      best_class = p.class_id;
      first = false;
    }
  }
  return best_class;
}

/// Pooled features and labels of one episode, before the embedding layer.
struct EpisodeBatch {
  std::vector<std::vector<double>> support;
  std::vector<int> support_labels;
  std::vector<std::vector<double>> query;
  std::vector<int> query_labels;
};

struct LayerGradients {
  std::vector<double> weight;
  std::vector<double> bias;
};

struct EpisodeResult {
  double loss = 0.0;
  Matrix logits;
  std::vector<int> classes;  // logit column -> class id
  LayerGradients grad;
  std::size_t correct = 0;       // queries whose argmax logit is their own class
  std::size_t coincidences = 0;  // distance pairs whose gradient was zeroed
};

namespace detail {

inline std::vector<LabeledEmbedding> embed_all(const std::vector<std::vector<double>>& feats,
                                               const std::vector<int>& labels, const LinearLayer& layer) {
  if (feats.size() != labels.size()) throw InvalidArgument("episode: feature/label count mismatch");
  std::vector<LabeledEmbedding> out;
  out.reserve(feats.size());
  for (std::size_t i = 0; i < feats.size(); ++i) out.push_back({forward(feats[i], layer), labels[i]});
  return out;
}

}  // namespace detail

/// Loss only, for finite-difference checks.
inline double batch_loss(const EpisodeBatch& batch, const LinearLayer& layer, const EmbeddingSpace& space) {
  const auto support = detail::embed_all(batch.support, batch.support_labels, layer);
  const auto query = detail::embed_all(batch.query, batch.query_labels, layer);
  std::vector<int> classes = batch.support_labels;
  return episode_loss(compute_prototypes(support, classes), query, space).loss;
}

/// Loss, logits and exact gradients w.r.t. W and b. The support path through
/// the prototypes is included.
inline EpisodeResult backward(const EpisodeBatch& batch, const LinearLayer& layer, const EmbeddingSpace& space) {
  const auto support = detail::embed_all(batch.support, batch.support_labels, layer);
  const auto query = detail::embed_all(batch.query, batch.query_labels, layer);
  const auto protos = compute_prototypes(support, batch.support_labels);
  const std::size_t nq = query.size();
  const std::size_t nk = protos.size();
  if (nq == 0) throw InvalidArgument("backward: no queries");

  EpisodeResult res;
  for (const auto& p : protos) res.classes.push_back(p.class_id);
  res.logits = Matrix(nq, nk);

  std::vector<std::vector<double>> proto_pts, query_pts;
  for (const auto& p : protos) proto_pts.push_back(space.embed(p.coords));
  for (const auto& q : query) query_pts.push_back(space.embed(q.coords));

  const std::size_t dim = layer.out_dim;
  std::vector<std::vector<double>> d_query(nq, std::vector<double>(dim, 0.0));
  std::vector<std::vector<double>> d_proto(nk, std::vector<double>(dim, 0.0));
  std::vector<double> prob(nk);
  const double inv_q = 1.0 / static_cast<double>(nq);

  for (std::size_t q = 0; q < nq; ++q) {
    const std::size_t own = detail::prototype_column(protos, query[q].label);
    for (std::size_t k = 0; k < nk; ++k) res.logits(q, k) = -space.distance(query_pts[q], proto_pts[k]);
    const auto row = res.logits.row(q);
    const double lse = detail::log_sum_exp(row);
    res.loss += -row[own] + lse;
    const auto argmax = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    if (argmax == own) ++res.correct;
    for (std::size_t k = 0; k < nk; ++k) prob[k] = std::exp(row[k] - lse);

    // dJ/dd_qk = ([k == own] - p_qk) / Q
    for (std::size_t k = 0; k < nk; ++k) {
      const double w = ((k == own ? 1.0 : 0.0) - prob[k]) * inv_q;
      if (w == 0.0) continue;
      const DistanceGradient g = space.distance_grad(query_pts[q], proto_pts[k]);
      if (g.coincident || g.clamped) {
        ++res.coincidences;
        continue;
      }
      for (std::size_t i = 0; i < dim; ++i) {
        d_query[q][i] += w * g.dx[i];
        d_proto[k][i] += w * g.dy[i];
      }
    }
  }
  res.loss *= inv_q;

  res.grad.weight.assign(layer.weight.size(), 0.0);
  res.grad.bias.assign(layer.bias.size(), 0.0);
  auto accumulate = [&](std::span<const double> de, std::span<const double> g) {
    for (std::size_t r = 0; r < dim; ++r) {
      res.grad.bias[r] += de[r];
      double* wrow = res.grad.weight.data() + r * layer.in_dim;
      for (std::size_t c = 0; c < layer.in_dim; ++c) wrow[c] += de[r] * g[c];
    }
  };
  for (std::size_t q = 0; q < nq; ++q) accumulate(space.pullback(query[q].coords, d_query[q]), batch.query[q]);

  // Each prototype is the mean of its support embeddings.
  std::vector<std::vector<double>> d_mean(nk);
  std::vector<std::size_t> counts(nk, 0);
  for (std::size_t k = 0; k < nk; ++k) d_mean[k] = space.pullback(protos[k].coords, d_proto[k]);
  for (const auto& s : support) ++counts[detail::prototype_column(protos, s.label)];
  for (std::size_t s = 0; s < support.size(); ++s) {
    const std::size_t k = detail::prototype_column(protos, support[s].label);
    std::vector<double> de(d_mean[k]);
    for (double& v : de) v /= static_cast<double>(counts[k]);
    accumulate(de, batch.support[s]);
  }
  return res;
}

struct CheckpointMeta {
  EmbeddingSpace space = EmbeddingSpace::euclidean();
  std::uint64_t seed = 0;
  /// Additional feature-pipeline settings (aggregator, k, ...).
  std::map<std::string, std::string> extra;
};

struct Checkpoint {
  LinearLayer layer;
  CheckpointMeta meta;
};

inline void write_checkpoint(std::ostream& out, const LinearLayer& layer, const CheckpointMeta& meta) {
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "gprnet-checkpoint 1\n";
  out << "in_dim " << layer.in_dim << "\n";
  out << "out_dim " << layer.out_dim << "\n";
  out << "space " << meta.space.name() << "\n";
  out << "curvature " << (meta.space.is_hyperbolic() ? num(meta.space.curvature().value()) : "0") << "\n";
  out << "seed " << meta.seed << "\n";
  for (const auto& [k, v] : meta.extra) out << k << ' ' << v << "\n";
  out << "weight\n";
  for (std::size_t r = 0; r < layer.out_dim; ++r) {
    for (std::size_t c = 0; c < layer.in_dim; ++c) out << (c ? " " : "") << num(layer.w(r, c));
    out << "\n";
  }
  out << "bias\n";
  for (std::size_t r = 0; r < layer.out_dim; ++r) out << (r ? " " : "") << num(layer.bias[r]);
  out << "\n";
}

inline Checkpoint read_checkpoint(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "gprnet-checkpoint 1") throw ParseError("not a gprnet checkpoint");

  std::map<std::string, std::string> header;
  while (std::getline(in, line) && line != "weight") {
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw ParseError("checkpoint: malformed header line '" + line + "'");
    header[line.substr(0, sp)] = line.substr(sp + 1);
  }
  if (line != "weight") throw ParseError("checkpoint: missing weight block");
  auto take = [&](const std::string& key) {
    auto it = header.find(key);
    if (it == header.end()) throw ParseError("checkpoint: missing header key '" + key + "'");
    std::string v = it->second;
    header.erase(it);
    return v;
  };
  Checkpoint ck;
  try {
    const auto in_dim = static_cast<std::size_t>(std::stoull(take("in_dim")));
    const auto out_dim = static_cast<std::size_t>(std::stoull(take("out_dim")));
    const std::string space = take("space");
    const double curvature = std::stod(take("curvature"));
    ck.meta.space = parse_space(space, space == "hyperbolic" ? curvature : 1.0);
    ck.meta.seed = std::stoull(take("seed"));
    ck.meta.extra = std::move(header);
    ck.layer = LinearLayer::zeros(in_dim, out_dim);
  } catch (const std::logic_error& e) {
    throw ParseError(std::string("checkpoint: bad header value: ") + e.what());
  }
  auto read_values = [&](std::span<double> dst) {
    for (double& v : dst) {
      std::string tok;
      if (!(in >> tok)) throw ParseError("checkpoint: truncated parameter block");
      v = detail::parse_double(tok, 0);
    }
  };
  read_values(ck.layer.weight);
  std::string marker;
  if (!(in >> marker) || marker != "bias") throw ParseError("checkpoint: missing bias block");
  read_values(ck.layer.bias);
  return ck;
}

}  // namespace gprnet
