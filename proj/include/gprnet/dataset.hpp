#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cloudio.hpp"
#include "config.hpp"
#include "episodic.hpp"
#include "error.hpp"
#include "pipeline.hpp"
#include "random.hpp"

namespace gprnet {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes to a sibling temp file, then renames over the target.
inline void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "': " + ec.message());
}

/// A directory of XYZ clouds plus manifest.csv (file,label,category).
struct CloudDataset {
  std::vector<PointCloud> clouds;
  std::map<int, std::string> category_names;
};

inline void write_dataset(const fs::path& dir, const CloudDataset& ds) {
  std::string manifest = "file,label,category\n";
  for (const auto& c : ds.clouds) {
    if (!c.label) throw InvalidArgument("write_dataset: unlabeled cloud '" + c.source_id + "'");
    const std::string file = c.source_id + ".xyz";
    std::ostringstream body;
    write_xyz(body, c);
    write_file_atomic(dir / file, body.str());
    auto name = ds.category_names.find(*c.label);
    manifest += file + "," + std::to_string(*c.label) + "," +
                (name != ds.category_names.end() ? name->second : std::to_string(*c.label)) + "\n";
  }
  write_file_atomic(dir / "manifest.csv", manifest);
}

inline CloudDataset read_dataset(const fs::path& dir) {
  const std::string text = read_file(dir / "manifest.csv");
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line.rfind("file,label", 0) != 0) throw ParseError("manifest.csv: missing header");
  CloudDataset ds;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ls(line);
    for (std::string col; std::getline(ls, col, ',');) cols.push_back(col);
    if (cols.size() < 2) throw ParseError("manifest.csv line " + std::to_string(lineno) + ": expected file,label");
    const int label = static_cast<int>(detail::parse_integer(cols[1], lineno));
    PointCloud cloud = parse_xyz(read_file(dir / cols[0]));
    cloud.label = label;
    cloud.source_id = fs::path(cols[0]).stem().string();
    ds.category_names[label] = cols.size() > 2 ? cols[2] : cols[1];
    ds.clouds.push_back(std::move(cloud));
  }
  return ds;
}

/// Pools every cloud into one global feature row. Clouds larger than
/// points_per_cloud are subsampled with stream derive_seed(seed, kSubsample, i).
inline FeatureDataset featurize(std::span<const PointCloud> clouds, const TrainConfig& cfg, std::uint64_t seed) {
  FeatureDataset out;
  out.features.reserve(clouds.size());
  const FeatureOptions opt = cfg.feature_options();
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    const PointCloud& c = clouds[i];
    if (!c.label) throw InvalidArgument("featurize: cloud '" + c.source_id + "' has no label");
    if (c.size() < cfg.points_per_cloud) {
      throw InvalidArgument("featurize: cloud '" + c.source_id + "' has " + std::to_string(c.size()) +
                            " points, needs " + std::to_string(cfg.points_per_cloud));
    }
    GlobalFeature g;
    if (c.size() > cfg.points_per_cloud) {
      Rng rng(derive_seed(seed, stream::kSubsample, i));
      g = global_feature(subsample(c, cfg.points_per_cloud, rng), opt);
    } else {
      g = global_feature(c, opt);
    }
    out.features.push_back(std::move(g.values));
    out.labels.push_back(*c.label);
  }
  return out;
}

}  // namespace gprnet
