// Copyright 2026 The pathlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pathlab/track.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "pathlab/angles.hpp"
#include "pathlab/error.hpp"

namespace pathlab::track
{
namespace
{

struct SegmentHit
{
  double distance_sq;
  double t;
  Waypoint point;
};

SegmentHit closest_on_segment(const Waypoint & a, const Waypoint & b, const Waypoint & q)
{
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len_sq = dx * dx + dy * dy;
  double t = ((q.x - a.x) * dx + (q.y - a.y) * dy) / len_sq;
  t = std::clamp(t, 0.0, 1.0);
  const Waypoint p{a.x + t * dx, a.y + t * dy};
  const double ex = q.x - p.x;
  const double ey = q.y - p.y;
  return {ex * ex + ey * ey, t, p};
}

double blend_heading(double from, double to, double weight)
{
  return normalize_angle(from + weight * normalize_angle(to - from));
}

PathProjection make_projection(
  const Track & track, std::size_t segment, const SegmentHit & hit, const Waypoint & q)
{
  PathProjection out;
  const Waypoint & a = track.segment_start(segment);
  const Waypoint & b = track.segment_end(segment);
  const double cross = (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x);
  const double distance = std::sqrt(hit.distance_sq);
  out.lateral_error = cross >= 0.0 ? distance : -distance;
  out.heading_ref = track.segment_heading(segment);
  out.arc_position = track.arc_at(segment) + hit.t * track.segment_length(segment);
  out.nearest_segment_index = segment;
  out.nearest = hit.point;

  const std::size_t n_seg = track.segment_count();
  const double h = track.segment_heading(segment);
  if (hit.t < 0.5) {
    if (track.closed() || segment > 0) {
      const std::size_t prev = (segment + n_seg - 1) % n_seg;
      out.tangent_heading = blend_heading(track.segment_heading(prev), h, 0.5 + hit.t);
    } else {
      out.tangent_heading = h;
    }
  } else {
    if (track.closed() || segment + 1 < n_seg) {
      const std::size_t next = (segment + 1) % n_seg;
      out.tangent_heading = blend_heading(h, track.segment_heading(next), hit.t - 0.5);
    } else {
      out.tangent_heading = h;
    }
  }
  return out;
}

bool finite(const Waypoint & w) { return std::isfinite(w.x) && std::isfinite(w.y); }

}  // namespace

Track::Track(std::vector<Waypoint> waypoints, bool closed, double corridor_half_width)
: waypoints_(std::move(waypoints)), closed_(closed), corridor_half_width_(corridor_half_width)
{
  if (waypoints_.size() < 3) {
    throw ParameterError("track needs at least 3 waypoints, got " + std::to_string(waypoints_.size()));
  }
  if (!(corridor_half_width_ > 0.0)) {
    throw ParameterError("corridor half width must be positive");
  }
  const std::size_t n = waypoints_.size();
  const std::size_t n_seg = closed_ ? n : n - 1;
  segment_lengths_.reserve(n_seg);
  segment_headings_.reserve(n_seg);
  cumulative_.reserve(n_seg + 1);
  cumulative_.push_back(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!finite(waypoints_[i])) {
      throw ParameterError("waypoint " + std::to_string(i) + " is not finite");
    }
  }
  for (std::size_t i = 0; i < n_seg; ++i) {
    const Waypoint & a = waypoints_[i];
    const Waypoint & b = waypoints_[(i + 1) % n];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (!(len > 0.0)) {
      throw ParameterError("waypoints " + std::to_string(i) + " and " +
        std::to_string((i + 1) % n) + " coincide");
    }
    segment_lengths_.push_back(len);
    segment_headings_.push_back(std::atan2(b.y - a.y, b.x - a.x));
    cumulative_.push_back(cumulative_.back() + len);
  }
}

const Waypoint & Track::segment_end(std::size_t segment) const
{
  return waypoints_[(segment + 1) % waypoints_.size()];
}

Waypoint Track::point_at_arc(double s) const
{
  const double total = length();
  if (closed_) {
    s = std::fmod(s, total);
    if (s < 0.0) {
      s += total;
    }
  } else {
    s = std::clamp(s, 0.0, total);
  }
  // first cumulative entry strictly greater than s
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t seg = it == cumulative_.begin() ? 0 :
    static_cast<std::size_t>(std::distance(cumulative_.begin(), it)) - 1;
  seg = std::min(seg, segment_count() - 1);
  const double t = (s - cumulative_[seg]) / segment_lengths_[seg];
  const Waypoint & a = segment_start(seg);
  const Waypoint & b = segment_end(seg);
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}

PathProjection project(const Track & track, const Waypoint & position)
{
  std::size_t best = 0;
  SegmentHit best_hit{std::numeric_limits<double>::infinity(), 0.0, {}};
  for (std::size_t i = 0; i < track.segment_count(); ++i) {
    const SegmentHit hit = closest_on_segment(track.segment_start(i), track.segment_end(i), position);
    if (hit.distance_sq < best_hit.distance_sq) {
      best_hit = hit;
      best = i;
    }
  }
  return make_projection(track, best, best_hit, position);
}

PathProjection ProjectionCursor::project(const Track & track, const Waypoint & position)
{
  const std::size_t n_seg = track.segment_count();
  if (!last_segment_ || 2 * window_ + 1 >= n_seg) {
    PathProjection full = track::project(track, position);
    last_segment_ = full.nearest_segment_index;
    return full;
  }

  const auto w = static_cast<std::ptrdiff_t>(window_);
  const auto center = static_cast<std::ptrdiff_t>(*last_segment_);
  const auto count = static_cast<std::ptrdiff_t>(n_seg);
  std::ptrdiff_t best_offset = 0;
  std::size_t best = 0;
  SegmentHit best_hit{std::numeric_limits<double>::infinity(), 0.0, {}};
  for (std::ptrdiff_t off = -w; off <= w; ++off) {
    std::ptrdiff_t idx = center + off;
    if (track.closed()) {
      idx = ((idx % count) + count) % count;
    } else if (idx < 0 || idx >= count) {
      continue;
    }
    const auto seg = static_cast<std::size_t>(idx);
    const SegmentHit hit = closest_on_segment(track.segment_start(seg), track.segment_end(seg), position);
    if (hit.distance_sq < best_hit.distance_sq) {
      best_hit = hit;
      best = seg;
      best_offset = off;
    }
  }

  const bool on_edge = best_offset == -w || best_offset == w;
  if (on_edge) {
    PathProjection full = track::project(track, position);
    last_segment_ = full.nearest_segment_index;
    return full;
  }
  last_segment_ = best;
  return make_projection(track, best, best_hit, position);
}

Track generate_circle(double radius, double spacing, double corridor_half_width)
{
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ParameterError("circle radius must be positive");
  }
  const double circumference = 2.0 * std::numbers::pi * radius;
  if (!(spacing > 0.0) || !(spacing < circumference)) {
    throw ParameterError("circle spacing must lie in (0, 2*pi*radius)");
  }
  const auto n = static_cast<std::size_t>(std::max(3.0, std::round(circumference / spacing)));
  std::vector<Waypoint> pts;
  pts.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n) -
      0.5 * std::numbers::pi;
    pts.push_back({radius * std::cos(theta), radius * std::sin(theta)});
  }
  return Track(std::move(pts), true, corridor_half_width);
}

Track generate_closed_course(
  std::span<const CourseSegment> segments, double spacing, double corridor_half_width)
{
  if (!(spacing > 0.0)) {
    throw ParameterError("course spacing must be positive");
  }
  std::vector<Waypoint> pts;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  for (const CourseSegment & seg : segments) {
    if (seg.kind == CourseSegment::Kind::kStraight) {
      if (!(seg.length > 0.0)) {
        throw ParameterError("straight segment length must be positive");
      }
      const auto count = static_cast<std::size_t>(std::max(1.0, std::round(seg.length / spacing)));
      const double step = seg.length / static_cast<double>(count);
      for (std::size_t k = 0; k < count; ++k) {
        pts.push_back({x, y});
        x += step * std::cos(heading);
        y += step * std::sin(heading);
      }
    } else {
      if (!(seg.radius > 0.0) || seg.angle == 0.0) {
        throw ParameterError("arc segment needs positive radius and nonzero angle");
      }
      const double arc_len = seg.radius * std::abs(seg.angle);
      const auto count = static_cast<std::size_t>(std::max(1.0, std::round(arc_len / spacing)));
      const double side = seg.angle > 0.0 ? 1.0 : -1.0;
      // centre sits to the left for left turns
      const double cx = x - side * seg.radius * std::sin(heading);
      const double cy = y + side * seg.radius * std::cos(heading);
      const double start_angle = std::atan2(y - cy, x - cx);
      for (std::size_t k = 0; k < count; ++k) {
        const double phi = start_angle + seg.angle * static_cast<double>(k) / static_cast<double>(count);
        pts.push_back({cx + seg.radius * std::cos(phi), cy + seg.radius * std::sin(phi)});
      }
      const double end_angle = start_angle + seg.angle;
      x = cx + seg.radius * std::cos(end_angle);
      y = cy + seg.radius * std::sin(end_angle);
      heading = normalize_angle(heading + seg.angle);
    }
  }
  const double miss = std::hypot(x, y);
  if (pts.size() < 3 || miss > spacing) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "course does not close: end point is %.3f m from start", miss);
    throw ClosureError(buf);
  }
  return Track(std::move(pts), true, corridor_half_width);
}

Track load_track(const std::filesystem::path & path, double corridor_half_width)
{
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open track file " + path.string());
  }
  std::vector<Waypoint> pts;
  bool closed = false;
  bool header_seen = false;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    if (line.front() == '#') {
      if (line.find("closed=true") != std::string::npos) {
        closed = true;
      }
      continue;
    }
    if (!header_seen) {
      if (line != "x,y") {
        throw FormatError(path.string() + ": expected header 'x,y' on line " + std::to_string(row));
      }
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw FormatError(path.string() + ": row " + std::to_string(row) + " has no comma");
    }
    auto parse = [&](std::string_view tok) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw FormatError(path.string() + ": row " + std::to_string(row) +
          " has non-numeric value '" + std::string(tok) + "'");
      }
      return v;
    };
    const std::string_view sv(line);
    pts.push_back({parse(sv.substr(0, comma)), parse(sv.substr(comma + 1))});
  }
  if (!header_seen) {
    throw FormatError(path.string() + ": missing 'x,y' header");
  }
  if (pts.size() < 3) {
    throw FormatError(path.string() + ": need at least 3 waypoints, found " + std::to_string(pts.size()));
  }
  try {
    return Track(std::move(pts), closed, corridor_half_width);
  } catch (const ParameterError & e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_track(const Track & track, const std::filesystem::path & path)
{
  std::ofstream out(path);
  if (!out) {
    throw FormatError("cannot write track file " + path.string());
  }
  if (track.closed()) {
    out << "# closed=true\n";
  }
  out << "x,y\n";
  char buf[80];
  for (const Waypoint & w : track.waypoints()) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", w.x, w.y);
    out << buf;
  }
}

std::vector<Waypoint> waypoints_ahead(
  const Track & track, const PathProjection & projection, const Pose & pose, std::size_t n)
{
  if (n == 0) {
    throw ParameterError("waypoints_ahead needs n >= 1");
  }
  const std::size_t count = track.size();
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);
  std::vector<Waypoint> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t idx = projection.nearest_segment_index + 1 + k;
    if (track.closed()) {
      idx %= count;
    } else if (idx >= count) {
      break;
    }
    const Waypoint & w = track.waypoints()[idx];
    const double dx = w.x - pose.x;
    const double dy = w.y - pose.y;
    out.push_back({c * dx + s * dy, -s * dx + c * dy});
  }
  return out;
}

Track perturb_waypoints(const Track & track, double max_offset, std::uint64_t seed)
{
  if (!(max_offset >= 0.0)) {
    throw ParameterError("max_offset must be non-negative");
  }
  if (max_offset == 0.0) {
    return track;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> offset(-max_offset, max_offset);
  std::vector<Waypoint> pts = track.waypoints();
  for (Waypoint & w : pts) {
    w.x += offset(rng);
    w.y += offset(rng);
  }
  return Track(std::move(pts), track.closed(), track.corridor_half_width());
}

}  // namespace pathlab::track
