// gprnet: command-line harness for the few-shot point-cloud pipeline.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gprnet/gprnet.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace gprnet;

namespace {

constexpr const char* kVersion = "gprnet 0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 2, kIo = 3, kNumeric = 4, kConfig = 5 };

class UsageError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// config flags

struct ConfigFlags {
  std::string file;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  bool given(const std::string& key) const {
    auto it = options.find(key);
    return it != options.end() && it->second->count() > 0;
  }
};

const std::map<std::string, std::string>& flag_aliases() {
  static const std::map<std::string, std::string> aliases{
      {"k_neighbors", "--k"}, {"points_per_cloud", "--points"}, {"test_episodes", "--episodes"}};
  return aliases;
}

void add_config_flags(CLI::App* app, ConfigFlags& flags) {
  app->add_option("--config", flags.file, "key=value run config; flags override it")->check(CLI::ExistingFile);
  for (const auto& key : config_keys()) {
    std::string names = "--" + key;
    if (auto a = flag_aliases().find(key); a != flag_aliases().end()) names += "," + a->second;
    flags.options[key] = app->add_option(names, flags.values[key], "config: " + key);
  }
}

TrainConfig resolve_config(const ConfigFlags& flags) {
  TrainConfig cfg;
  if (!flags.file.empty()) apply_config_text(cfg, read_file(flags.file));
  for (const auto& key : config_keys()) {
    if (flags.given(key)) set_config_value(cfg, key, flags.values.at(key));
  }
  validate(cfg);
  return cfg;
}

json config_json(const TrainConfig& cfg) {
  json j = json::object();
  for (const auto& key : config_keys()) j[key] = config_value(cfg, key);
  return j;
}

std::vector<std::uint64_t> seed_list(const TrainConfig& cfg) {
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < cfg.seeds; ++i) seeds.push_back(cfg.seed + i);
  return seeds;
}

// ---------------------------------------------------------------------------
// small helpers

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) {
    tok = detail::trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

std::vector<double> parse_vector(const std::string& s) {
  std::vector<double> v;
  for (const auto& tok : split_list(s)) v.push_back(detail::parse_double(tok, 0));
  if (v.empty()) throw UsageError("empty vector '" + s + "'");
  return v;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> v;
  for (const auto& tok : split_list(s)) v.push_back(static_cast<int>(detail::parse_integer(tok, 0)));
  return v;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

// Hash of the resolved config plus the dataset manifest, if any.
std::string manifest_hash(const TrainConfig& cfg, const std::string& data_dir) {
  std::string blob = to_config_text(cfg);
  if (!data_dir.empty()) blob += read_file(fs::path(data_dir) / "manifest.csv");
  return hex64(fnv1a(blob));
}

json epoch_json(const EpochLog& e) {
  json j{{"epoch", e.epoch},
         {"loss", e.loss},
         {"train_accuracy", e.train_accuracy},
         {"lr_first", e.lr_first},
         {"lr_last", e.lr_last}};
  if (e.val_accuracy) j["val_accuracy"] = *e.val_accuracy;
  return j;
}

json eval_json(const EvalResult& r) {
  return {{"seed", r.seed}, {"episodes", r.accuracies.size()}, {"mean", r.mean}, {"std", r.std},
          {"accuracies", r.accuracies}};
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file_atomic(out, text);
  }
}

struct LoadedData {
  CloudDataset clouds;
  FeatureDataset features;
};

LoadedData load_features(const std::string& dir, const TrainConfig& cfg) {
  LoadedData d;
  d.clouds = read_dataset(dir);
  if (d.clouds.clouds.empty()) throw IoError("dataset '" + dir + "' is empty");
  d.features = featurize(d.clouds.clouds, cfg, cfg.seed);
  return d;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string out;
  std::string families = "7";
  std::size_t per_family = 40;
  std::size_t points = 512;
  double jitter = 0.02;
  bool rotate = false;
  std::uint64_t seed = 0;
};

std::vector<ShapeFamily> resolve_families(const std::string& s) {
  std::vector<ShapeFamily> fams;
  if (!s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    const auto n = static_cast<std::size_t>(detail::parse_integer(s, 0));
    if (n < 1 || n > kAllFamilies.size()) throw UsageError("--families must be in 1..7 or a name list");
    fams.assign(kAllFamilies.begin(), kAllFamilies.begin() + static_cast<std::ptrdiff_t>(n));
  } else {
    for (const auto& name : split_list(s)) fams.push_back(parse_family(name));
  }
  return fams;
}

int cmd_synth(const SynthArgs& a) {
  const auto fams = resolve_families(a.families);
  const ShapeSpec tmpl{ShapeFamily::kSphere, a.points, a.jitter, a.rotate, 0};
  CloudDataset ds{generate_dataset(fams, a.per_family, tmpl, a.seed), {}};
  for (auto f : fams) ds.category_names[static_cast<int>(f)] = to_string(f);
  fs::create_directories(a.out);
  write_dataset(a.out, ds);
  std::cout << "wrote " << ds.clouds.size() << " clouds to " << a.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// prep: <in>/<category>/**/*.off -> normalized XYZ caches

struct PrepArgs {
  std::string in;
  std::string out;
  std::size_t points = 1024;
  std::uint64_t seed = 0;
};

int cmd_prep(const PrepArgs& a) {
  if (!fs::is_directory(a.in)) throw IoError("not a directory: '" + a.in + "'");
  std::vector<fs::path> categories;
  for (const auto& e : fs::directory_iterator(a.in)) {
    if (e.is_directory()) categories.push_back(e.path());
  }
  std::sort(categories.begin(), categories.end());
  if (categories.empty()) throw IoError("no category subdirectories under '" + a.in + "'");

  CloudDataset ds;
  std::size_t skipped = 0;
  for (std::size_t label = 0; label < categories.size(); ++label) {
    const std::string name = categories[label].filename().string();
    ds.category_names[static_cast<int>(label)] = name;
    std::vector<fs::path> meshes;
    for (const auto& e : fs::recursive_directory_iterator(categories[label])) {
      if (e.is_regular_file() && e.path().extension() == ".off") meshes.push_back(e.path());
    }
    std::sort(meshes.begin(), meshes.end());
    for (std::size_t i = 0; i < meshes.size(); ++i) {
      try {
        Rng rng(derive_seed(a.seed, label, i));
        PointCloud c = normalize_unit_sphere(sample_mesh(parse_off(read_file(meshes[i])), a.points, rng));
        c.label = static_cast<int>(label);
        c.source_id = name + "_" + meshes[i].stem().string();
        ds.clouds.push_back(std::move(c));
      } catch (const Error& e) {
        std::cerr << "prep: skipping " << meshes[i] << ": " << e.what() << "\n";
        ++skipped;
      }
    }
  }
  fs::create_directories(a.out);
  write_dataset(a.out, ds);
  std::cout << "wrote " << ds.clouds.size() << " clouds in " << categories.size() << " categories to " << a.out;
  if (skipped) std::cout << " (" << skipped << " unreadable meshes skipped)";
  std::cout << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// features

struct FeaturesArgs {
  std::string input;
  std::string stage = "lpsi";
  std::size_t k = 40;
  std::string out;
};

std::vector<std::string> stage_columns(FeatureStage stage) {
  const std::vector<std::string> psi{"px", "py", "pz", "e1x", "e1y", "e1z", "e2x", "e2y",
                                     "e2z", "nx", "ny", "nz", "sx",  "sy",  "sz"};
  std::vector<std::string> base = stage == FeatureStage::kLaplaceXyz ? std::vector<std::string>{"x", "y", "z"} : psi;
  if (stage == FeatureStage::kPsi) return base;
  std::vector<std::string> cols = base;
  for (const auto& b : base) cols.push_back("d" + b);
  return cols;
}

int cmd_features(const FeaturesArgs& a) {
  const FeatureStage stage = parse_stage(a.stage);
  const PointCloud cloud = parse_xyz(read_file(a.input));
  const Matrix m = point_features(cloud, a.k, stage);
  std::ostringstream out;
  const auto cols = stage_columns(stage);
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << "\n";
  char buf[40];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      out << (c ? "," : "") << buf;
    }
    out << "\n";
  }
  emit(a.out, out.str());
  return kOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string data;
  std::string out;
  ConfigFlags flags;
};

int cmd_train(const TrainArgs& a) {
  const TrainConfig cfg = resolve_config(a.flags);
  const std::string started = utc_now();
  const LoadedData d = load_features(a.data, cfg);

  Rng split_rng(derive_seed(cfg.seed, stream::kSplit));
  const auto cats = d.features.categories();
  if (cfg.train_classes >= cats.size()) {
    throw ConfigError("train_classes (" + std::to_string(cfg.train_classes) + ") must be below the " +
                      std::to_string(cats.size()) + " categories in the dataset");
  }
  const SplitSpec split = make_split(cats, cfg.train_classes, split_rng, cfg.seed);
  const TrainResult tr = train(d.features, split.train_categories, cfg, cfg.seed, split.test_categories);

  fs::create_directories(a.out);
  const fs::path out(a.out);
  CheckpointMeta meta{cfg.embedding_space(), cfg.seed, {}};
  meta.extra["aggregator"] = to_string(cfg.aggregator);
  meta.extra["k_neighbors"] = std::to_string(cfg.k_neighbors);
  meta.extra["laplace"] = cfg.laplace ? "on" : "off";
  meta.extra["points_per_cloud"] = std::to_string(cfg.points_per_cloud);
  meta.extra["train_categories"] = join(split.train_categories);
  meta.extra["test_categories"] = join(split.test_categories);
  std::ostringstream ck;
  write_checkpoint(ck, tr.layer, meta);
  write_file_atomic(out / "checkpoint.txt", ck.str());

  std::string log;
  for (const auto& e : tr.epochs) log += epoch_json(e).dump() + "\n";
  write_file_atomic(out / "log.jsonl", log);

  const json manifest{{"command", "train"},
                      {"version", kVersion},
                      {"config", config_json(cfg)},
                      {"seeds", {cfg.seed}},
                      {"data", a.data},
                      {"manifest_hash", manifest_hash(cfg, a.data)},
                      {"train_categories", split.train_categories},
                      {"test_categories", split.test_categories},
                      {"steps", tr.lr_trace.size()},
                      {"final_lr", tr.lr_trace.empty() ? 0.0 : tr.lr_trace.back()},
                      {"started", started},
                      {"finished", utc_now()},
                      {"outputs", {(out / "checkpoint.txt").string(), (out / "log.jsonl").string()}}};
  write_file_atomic(out / "manifest.json", manifest.dump(2) + "\n");

  const auto& last = tr.epochs.back();
  std::cout << "trained " << cfg.space << " model: " << tr.lr_trace.size() << " episodes, final loss "
            << fmt(last.loss) << ", final train accuracy " << fmt(last.train_accuracy) << ", final lr "
            << fmt(tr.lr_trace.back()) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string data;
  std::string checkpoint;
  std::string categories;
  std::string out;
  ConfigFlags flags;
};

// Adopts the checkpoint's pipeline settings, refusing explicit flags that
// contradict them.
TrainConfig reconcile(TrainConfig cfg, const ConfigFlags& flags, const Checkpoint& ck) {
  auto check = [&](const std::string& key, const std::string& ck_value) {
    TrainConfig probe = cfg;
    set_config_value(probe, key, ck_value);
    if (flags.given(key) && config_value(probe, key) != config_value(cfg, key)) {
      throw ConfigError("checkpoint/config mismatch on '" + key + "': checkpoint has " + config_value(probe, key) +
                        ", flags say " + config_value(cfg, key));
    }
    cfg = probe;
  };
  check("space", ck.meta.space.name());
  if (ck.meta.space.is_hyperbolic()) check("curvature", fmt(ck.meta.space.curvature().value()));
  for (const char* key : {"aggregator", "k_neighbors", "laplace", "points_per_cloud"}) {
    if (auto it = ck.meta.extra.find(key); it != ck.meta.extra.end()) check(key, it->second);
  }
  validate(cfg);
  return cfg;
}

int cmd_eval(const EvalArgs& a) {
  TrainConfig cfg = resolve_config(a.flags);
  const std::string started = utc_now();
  json report{{"command", "eval"}, {"version", kVersion}, {"data", a.data}, {"started", started}};

  if (!a.checkpoint.empty()) {
    const Checkpoint ck = read_checkpoint(read_file(a.checkpoint));
    cfg = reconcile(cfg, a.flags, ck);
    const LoadedData d = load_features(a.data, cfg);
    if (d.features.width() != ck.layer.in_dim) {
      throw ConfigError("checkpoint/config mismatch: checkpoint expects " + std::to_string(ck.layer.in_dim) +
                        "-dim features, pipeline produces " + std::to_string(d.features.width()));
    }
    std::vector<int> cats;
    if (!a.categories.empty()) {
      cats = parse_int_list(a.categories);
    } else if (auto it = ck.meta.extra.find("test_categories"); it != ck.meta.extra.end()) {
      cats = parse_int_list(it->second);
    } else {
      cats = d.features.categories();
    }
    const EvalResult r = evaluate(ck.layer, d.features, cats, cfg, cfg.seed);
    report["mode"] = "checkpoint";
    report["checkpoint"] = a.checkpoint;
    report["categories"] = cats;
    report["result"] = eval_json(r);
    report["mean"] = r.mean;
    report["std"] = r.std;
  } else {
    const LoadedData d = load_features(a.data, cfg);
    std::vector<EvalResult> runs;
    json per_seed = json::array();
    for (auto seed : seed_list(cfg)) {
      const SeedRun run = run_seed(d.features, cfg, seed);
      json j = eval_json(run.evaluation);
      j["train_categories"] = run.split.train_categories;
      j["test_categories"] = run.split.test_categories;
      per_seed.push_back(std::move(j));
      runs.push_back(run.evaluation);
    }
    const SeedSummary s = summarize_seeds(runs);
    report["mode"] = "retrain";
    report["seeds"] = s.seeds;
    report["per_seed"] = std::move(per_seed);
    report["mean"] = s.grand_mean;
    report["std"] = s.grand_std;
  }
  report["config"] = config_json(cfg);
  report["manifest_hash"] = manifest_hash(cfg, a.data);
  report["finished"] = utc_now();
  emit(a.out, report.dump(2) + "\n");
  return kOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string data;
  std::string axis;
  std::string values;
  std::string out;
  ConfigFlags flags;
};

const std::map<std::string, std::string>& sweep_axes() {
  static const std::map<std::string, std::string> axes{{"k", "k_neighbors"},     {"points", "points_per_cloud"},
                                                       {"curvature", "curvature"}, {"laplace", "laplace"},
                                                       {"aggregator", "aggregator"}, {"space", "space"}};
  return axes;
}

int cmd_sweep(const SweepArgs& a) {
  auto axis = sweep_axes().find(a.axis);
  if (axis == sweep_axes().end()) throw UsageError("unknown sweep axis '" + a.axis + "'");
  const auto values = split_list(a.values);
  if (values.empty()) throw UsageError("--values is empty");
  const TrainConfig base = resolve_config(a.flags);

  // Validate every grid point before doing any compute.
  std::vector<TrainConfig> grid;
  for (const auto& v : values) {
    TrainConfig cfg = base;
    set_config_value(cfg, axis->second, v);
    validate(cfg);
    grid.push_back(cfg);
  }
  const CloudDataset ds = read_dataset(a.data);
  std::string csv = "value,mean,std\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const TrainConfig& cfg = grid[i];
    const FeatureDataset feats = featurize(ds.clouds, cfg, cfg.seed);
    std::vector<EvalResult> runs;
    for (auto seed : seed_list(cfg)) runs.push_back(run_seed(feats, cfg, seed).evaluation);
    const SeedSummary s = summarize_seeds(runs);
    csv += values[i] + "," + fmt(s.grand_mean) + "," + fmt(s.grand_std) + "\n";
    std::cerr << "sweep " << a.axis << "=" << values[i] << ": " << fmt(s.grand_mean) << "\n";
  }
  emit(a.out, csv);
  return kOk;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::string data;
  std::size_t repeat = 20;
  std::string out;
  ConfigFlags flags;
};

int cmd_bench(const BenchArgs& a) {
  const TrainConfig cfg = resolve_config(a.flags);
  using clock = std::chrono::steady_clock;
  const std::size_t episode = cfg.episode_size();

  std::vector<PointCloud> clouds;
  if (!a.data.empty()) {
    auto ds = read_dataset(a.data);
    clouds = std::move(ds.clouds);
    if (clouds.size() > episode) clouds.resize(episode);
  } else {
    const ShapeSpec tmpl{ShapeFamily::kSphere, cfg.points_per_cloud, 0.02, false, 0};
    const std::size_t per = (episode + kAllFamilies.size() - 1) / kAllFamilies.size();
    clouds = generate_dataset(kAllFamilies, per, tmpl, cfg.seed);
    clouds.resize(episode);
  }

  const auto t0 = clock::now();
  const FeatureDataset feats = featurize(clouds, cfg, cfg.seed);
  const double feat_s = std::chrono::duration<double>(clock::now() - t0).count();

  Rng rng(derive_seed(cfg.seed, stream::kInit));
  const LinearLayer layer = LinearLayer::initialize(feats.width(), LinearLayer::kDefaultOut, rng);
  const auto space = cfg.embedding_space();
  // One batch holding every featurized cloud: the first shots per class as
  // support, the rest as query.
  EpisodeBatch batch;
  std::map<int, std::size_t> seen;
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const int label = feats.labels[i];
    if (seen[label]++ < cfg.shots) {
      batch.support.push_back(feats.features[i]);
      batch.support_labels.push_back(label);
    } else {
      batch.query.push_back(feats.features[i]);
      batch.query_labels.push_back(label);
    }
  }
  double fwd_s = 0.0, bwd_s = 0.0;
  double sink = 0.0;
  for (std::size_t r = 0; r < a.repeat; ++r) {
    auto t1 = clock::now();
    sink += batch_loss(batch, layer, space);
    auto t2 = clock::now();
    sink += backward(batch, layer, space).loss;
    auto t3 = clock::now();
    fwd_s += std::chrono::duration<double>(t2 - t1).count();
    bwd_s += std::chrono::duration<double>(t3 - t2).count();
  }

  const json report{{"command", "bench"},
                    {"version", kVersion},
                    {"parameters", layer.parameter_count()},
                    {"reported_parameters", "1.24K"},
                    {"layer", std::to_string(layer.in_dim) + "x" + std::to_string(layer.out_dim) + "+" +
                                  std::to_string(layer.out_dim)},
                    {"episode_clouds", feats.size()},
                    {"points_per_cloud", cfg.points_per_cloud},
                    {"feature_seconds", feat_s},
                    {"feature_clouds_per_second", static_cast<double>(feats.size()) / feat_s},
                    {"forward_ms", 1e3 * fwd_s / static_cast<double>(a.repeat)},
                    {"forward_backward_ms", 1e3 * bwd_s / static_cast<double>(a.repeat)},
                    {"repeat", a.repeat},
                    {"checksum", sink},
                    {"config", config_json(cfg)},
                    {"manifest_hash", manifest_hash(cfg, a.data)}};
  emit(a.out, report.dump(2) + "\n");
  return kOk;
}

// ---------------------------------------------------------------------------
// dist

struct DistArgs {
  std::string x, y;
  std::string space = "hyp";
  double curvature = 1.0;
};

int cmd_dist(const DistArgs& a) {
  const auto x = parse_vector(a.x);
  const auto y = parse_vector(a.y);
  if (x.size() != y.size()) throw UsageError("vectors differ in dimension");
  const EmbeddingSpace space = parse_space(a.space, a.curvature);
  double d = 0.0;
  if (space.is_hyperbolic()) {
    d = poincare_distance(BallPoint(x, space.curvature()), BallPoint(y, space.curvature()));
  } else {
    d = ball::euclidean_distance(x, y);
  }
  std::cout << fmt(d) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-shot point-cloud classification with geometric priors"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  // Repeated flags: the last occurrence wins.
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate a labeled synthetic shape dataset");
  s->add_option("--out", synth.out, "output directory")->required();
  s->add_option("--families", synth.families, "family count (1..7) or comma list of names");
  s->add_option("--per-family,--per_family", synth.per_family, "clouds per family");
  s->add_option("--points", synth.points, "points per cloud");
  s->add_option("--jitter", synth.jitter, "Gaussian jitter sigma");
  s->add_flag("--rotate", synth.rotate, "apply a uniform random rotation per cloud");
  s->add_option("--seed", synth.seed, "master seed");

  PrepArgs prep;
  auto* p = app.add_subcommand("prep", "convert per-category OFF meshes into normalized XYZ caches");
  p->add_option("--in", prep.in, "root with one subdirectory of .off files per category")->required();
  p->add_option("--out", prep.out, "output directory")->required();
  p->add_option("--points", prep.points, "points sampled per mesh");
  p->add_option("--seed", prep.seed, "sampling seed");

  FeaturesArgs feat;
  auto* f = app.add_subcommand("features", "per-point feature matrix of one XYZ cloud as CSV");
  f->add_option("input", feat.input, "XYZ file")->required()->check(CLI::ExistingFile);
  f->add_option("--stage", feat.stage, "psi (15 cols), lpsi (30 cols) or lp (6 cols)");
  f->add_option("--k", feat.k, "neighbor count");
  f->add_option("--out,-o", feat.out, "output CSV (default stdout)");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "episodic training; writes checkpoint, JSONL log and manifest");
  t->add_option("--data", tr.data, "dataset directory")->required();
  t->add_option("--out", tr.out, "run directory")->required();
  add_config_flags(t, tr.flags);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "few-shot evaluation of a checkpoint, or of --seeds retrains");
  e->add_option("--data", ev.data, "dataset directory")->required();
  e->add_option("--checkpoint", ev.checkpoint, "checkpoint file; omit to retrain per seed");
  e->add_option("--categories", ev.categories, "comma list of test categories (checkpoint mode)");
  e->add_option("--out,-o", ev.out, "output JSON (default stdout)");
  add_config_flags(e, ev.flags);

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep", "train+eval once per grid value; CSV value,mean,std");
  w->add_option("--data", sw.data, "dataset directory")->required();
  w->add_option("--axis", sw.axis, "k, points, curvature, laplace, aggregator or space")->required();
  w->add_option("--values", sw.values, "comma list of grid values")->required();
  w->add_option("--out,-o", sw.out, "output CSV (default stdout)");
  add_config_flags(w, sw.flags);

  BenchArgs bn;
  auto* b = app.add_subcommand("bench", "parameter count and timing report");
  b->add_option("--data", bn.data, "dataset directory (default: synthetic)");
  b->add_option("--repeat", bn.repeat, "timed repetitions")->check(CLI::PositiveNumber);
  b->add_option("--out,-o", bn.out, "output JSON (default stdout)");
  add_config_flags(b, bn.flags);

  DistArgs di;
  auto* d = app.add_subcommand("dist", "distance between two comma-separated vectors");
  d->add_option("--x", di.x, "first vector")->required();
  d->add_option("--y", di.y, "second vector")->required();
  d->add_option("--space", di.space, "hyp or euc");
  d->add_option("--curvature", di.curvature, "curvature magnitude c");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*p) return cmd_prep(prep);
    if (*f) return cmd_features(feat);
    if (*t) return cmd_train(tr);
    if (*e) return cmd_eval(ev);
    if (*w) return cmd_sweep(sw);
    if (*b) return cmd_bench(bn);
    if (*d) return cmd_dist(di);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kUsage;
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kConfig;
  } catch (const NumericError& err) {
    std::cerr << "numeric error: " << err.what() << "\n";
    return kNumeric;
  } catch (const ParseError& err) {
    std::cerr << "parse error: " << err.what() << "\n";
    return kIo;
  } catch (const IoError& err) {
    std::cerr << "i/o error: " << err.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "i/o error: " << err.what() << "\n";
    return kIo;
  }
  return kUsage;
}
