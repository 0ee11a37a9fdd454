#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "random.hpp"

namespace gprnet {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
};

struct PointCloud {
  std::vector<Vec3> points;
  std::optional<int> label;
  std::string source_id;

  std::size_t size() const { return points.size(); }
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

// Non-empty lines with '#' comments stripped, paired with 1-based line numbers.
inline std::vector<std::pair<std::size_t, std::string_view>> content_lines(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++lineno;
    std::string_view line = text.substr(pos, end - pos);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (!split_ws(line).empty()) out.emplace_back(lineno, line);
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

inline double parse_double(std::string_view tok, std::size_t lineno) {
  double v = 0.0;
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ParseError("line " + std::to_string(lineno) + ": non-numeric token '" + std::string(tok) + "'");
  }
  return v;
}

inline long long parse_integer(std::string_view tok, std::size_t lineno) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("line " + std::to_string(lineno) + ": expected integer, got '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace detail

/// Parses an ASCII OFF mesh. Accepts the usual "OFF\n<nv> <nf> <ne>" header and
/// the ModelNet40 variant where the counts follow the magic on the same line.
inline TriangleMesh parse_off(std::string_view text) {
  const auto lines = detail::content_lines(text);
  if (lines.empty()) throw ParseError("empty OFF file");

  auto [first_no, first] = lines.front();
  auto head = detail::split_ws(first);
  if (head.front().substr(0, 3) != "OFF") throw ParseError("missing OFF magic");

  std::vector<std::string_view> counts;
  std::size_t counts_line = first_no;
  std::size_t cursor = 1;
  if (head.front().size() > 3) counts.push_back(head.front().substr(3));
  counts.insert(counts.end(), head.begin() + 1, head.end());
  if (counts.empty()) {
    if (cursor >= lines.size()) throw ParseError("truncated OFF header");
    counts_line = lines[cursor].first;
    counts = detail::split_ws(lines[cursor].second);
    ++cursor;
  }
  if (counts.size() < 2) throw ParseError("malformed OFF header: expected vertex and face counts");
  const long long nv = detail::parse_integer(counts[0], counts_line);
  const long long nf = detail::parse_integer(counts[1], counts_line);
  if (nv < 0 || nf < 0) throw ParseError("malformed OFF header: negative counts");

  TriangleMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  mesh.faces.reserve(static_cast<std::size_t>(nf));
  for (long long v = 0; v < nv; ++v, ++cursor) {
    if (cursor >= lines.size()) throw ParseError("truncated OFF file: missing vertices");
    const auto& [no, line] = lines[cursor];
    auto tok = detail::split_ws(line);
    if (tok.size() < 3) throw ParseError("line " + std::to_string(no) + ": vertex needs 3 coordinates");
    mesh.vertices.push_back({detail::parse_double(tok[0], no), detail::parse_double(tok[1], no),
                             detail::parse_double(tok[2], no)});
  }
  for (long long f = 0; f < nf; ++f, ++cursor) {
    if (cursor >= lines.size()) throw ParseError("truncated OFF file: missing faces");
    const auto& [no, line] = lines[cursor];
    auto tok = detail::split_ws(line);
    const long long arity = detail::parse_integer(tok[0], no);
    if (arity != 3) throw ParseError("line " + std::to_string(no) + ": non-triangle face");
    if (tok.size() < 4) throw ParseError("line " + std::to_string(no) + ": truncated face");
    std::array<std::uint32_t, 3> face{};
    for (int c = 0; c < 3; ++c) {
      const long long idx = detail::parse_integer(tok[1 + c], no);
      if (idx < 0 || idx >= nv) {
        throw ParseError("line " + std::to_string(no) + ": vertex index " + std::to_string(idx) +
                         " out of range");
      }
      face[c] = static_cast<std::uint32_t>(idx);
    }
    mesh.faces.push_back(face);
  }
  return mesh;
}

/// Whitespace-separated rows of at least three numbers; columns past the
/// third (colors, normals) are dropped.
inline PointCloud parse_xyz(std::string_view text) {
  PointCloud cloud;
  for (const auto& [no, line] : detail::content_lines(text)) {
    auto tok = detail::split_ws(line);
    if (tok.size() < 3) {
      throw ParseError("line " + std::to_string(no) + ": expected at least 3 columns, got " +
                       std::to_string(tok.size()));
    }
    Vec3 p{};
    for (std::size_t c = 0; c < tok.size(); ++c) {
      const double v = detail::parse_double(tok[c], no);
      if (c < 3) p[c] = v;
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

/// Writes with 17 significant digits so that parse_xyz reads back the same doubles.
inline void write_xyz(std::ostream& out, const PointCloud& cloud) {
  char buf[96];
  for (const auto& p : cloud.points) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p[0], p[1], p[2]);
    out << buf;
  }
}

/// CSV with header x,y,z (plus label when the cloud carries one).
inline void write_cloud_csv(std::ostream& out, const PointCloud& cloud) {
  const bool labeled = cloud.label.has_value();
  out << (labeled ? "x,y,z,label\n" : "x,y,z\n");
  char buf[96];
  for (const auto& p : cloud.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", p[0], p[1], p[2]);
    out << buf;
    if (labeled) out << ',' << *cloud.label;
    out << '\n';
  }
}

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * norm(cross(b - a, c - a));
}

/// Area-weighted surface sampling with uniform barycentric coordinates.
inline PointCloud sample_mesh(const TriangleMesh& mesh, std::size_t n, Rng& rng) {
  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& [i, j, k] = mesh.faces[f];
    total += triangle_area(mesh.vertices.at(i), mesh.vertices.at(j), mesh.vertices.at(k));
    cumulative[f] = total;
  }
  if (!(total > 0.0)) throw NumericError("sample_mesh: mesh has zero total area");

  PointCloud cloud;
  cloud.points.reserve(n);
  std::uniform_real_distribution<double> pick(0.0, total);
  for (std::size_t s = 0; s < n; ++s) {
    const double u = pick(rng);
    // upper_bound never lands on a zero-area face: its cumulative value equals
    // its predecessor's.
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    const auto& [i, j, k] = mesh.faces[static_cast<std::size_t>(it - cumulative.begin())];
    const double r1 = std::sqrt(uniform01(rng));
    const double r2 = uniform01(rng);
    const Vec3& a = mesh.vertices[i];
    const Vec3& b = mesh.vertices[j];
    const Vec3& c = mesh.vertices[k];
    const double wa = 1.0 - r1;
    const double wb = r1 * (1.0 - r2);
    const double wc = r1 * r2;
    cloud.points.push_back({wa * a[0] + wb * b[0] + wc * c[0], wa * a[1] + wb * b[1] + wc * c[1],
                            wa * a[2] + wb * b[2] + wc * c[2]});
  }
  return cloud;
}

inline Vec3 centroid(std::span<const Vec3> points) {
  Vec3 c{0.0, 0.0, 0.0};
  for (const auto& p : points) c = c + p;
  return (1.0 / static_cast<double>(points.size())) * c;
}

/// Centers on the centroid and scales so the farthest point has norm 1.
inline PointCloud normalize_unit_sphere(PointCloud cloud) {
  if (cloud.points.empty()) throw InvalidArgument("normalize_unit_sphere: empty cloud");
  const Vec3 c = centroid(cloud.points);
  double max_norm = 0.0;
  for (auto& p : cloud.points) {
    p = p - c;
    max_norm = std::max(max_norm, norm(p));
  }
  if (!(max_norm > 0.0)) throw NumericError("normalize_unit_sphere: all points identical");
  const double inv = 1.0 / max_norm;
  for (auto& p : cloud.points) p = inv * p;
  return cloud;
}

/// n distinct points drawn uniformly without replacement, in draw order.
inline PointCloud subsample(const PointCloud& cloud, std::size_t n, Rng& rng) {
  if (n > cloud.size()) {
    throw InvalidArgument("subsample: requested " + std::to_string(n) + " points from a cloud of " +
                          std::to_string(cloud.size()));
  }
  std::vector<std::size_t> idx(cloud.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  PointCloud out;
  out.label = cloud.label;
  out.source_id = cloud.source_id;
  out.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.points.push_back(cloud.points[idx[i]]);
  return out;
}

}  // namespace gprnet
