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

#ifndef PATHLAB__TRACK_HPP_
#define PATHLAB__TRACK_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace pathlab::track
{

struct Waypoint
{
  double x = 0.0;
  double y = 0.0;
};

struct Pose
{
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

/**
 * @brief Waypoint polyline with a driving corridor.
 *
 * A closed track has an implicit segment from the last waypoint back to the
 * first one. Immutable after construction, so one instance can be shared by
 * any number of episodes.
 */
class Track
{
public:
  Track(std::vector<Waypoint> waypoints, bool closed, double corridor_half_width = 1.5);

  const std::vector<Waypoint> & waypoints() const { return waypoints_; }
  bool closed() const { return closed_; }
  double corridor_half_width() const { return corridor_half_width_; }
  std::size_t size() const { return waypoints_.size(); }

  /// n segments when closed, n - 1 when open.
  std::size_t segment_count() const { return segment_lengths_.size(); }
  double segment_length(std::size_t segment) const { return segment_lengths_[segment]; }
  double segment_heading(std::size_t segment) const { return segment_headings_[segment]; }
  const Waypoint & segment_start(std::size_t segment) const { return waypoints_[segment]; }
  const Waypoint & segment_end(std::size_t segment) const;

  /// Arc length from the first waypoint to waypoint `index`.
  double arc_at(std::size_t index) const { return cumulative_[index]; }
  /// Total polyline length, closing segment included for closed tracks.
  double length() const { return cumulative_.back(); }
  /// Mean distance between consecutive waypoints.
  double mean_spacing() const { return length() / static_cast<double>(segment_count()); }

  /// Point on the polyline at arc length `s`; wraps on closed tracks, clamps on open ones.
  Waypoint point_at_arc(double s) const;

private:
  std::vector<Waypoint> waypoints_;
  bool closed_;
  double corridor_half_width_;
  std::vector<double> segment_lengths_;
  std::vector<double> segment_headings_;
  std::vector<double> cumulative_;  // size() + 1 entries when closed, size() when open
};

/// Result of projecting a position onto a track.
struct PathProjection
{
  double lateral_error = 0.0;  // signed, positive = left of path direction
  double heading_ref = 0.0;    // direction of the nearest segment
  double arc_position = 0.0;   // from track start
  std::size_t nearest_segment_index = 0;
  Waypoint nearest;            // closest point on the polyline
  double tangent_heading = 0.0;  // heading blended across vertices, continuous along the path
};

/// Full search over all segments.
PathProjection project(const Track & track, const Waypoint & position);

/**
 * @brief Per-episode projection state that restricts the search to a window
 * around the previous nearest segment.
 *
 * The first call after construction or reset() does a full search. A result
 * on the window edge also triggers a full search.
 */
class ProjectionCursor
{
public:
  explicit ProjectionCursor(std::size_t window = 20) : window_(window) {}

  PathProjection project(const Track & track, const Waypoint & position);
  void reset() { last_segment_.reset(); }

private:
  std::size_t window_;
  std::optional<std::size_t> last_segment_;
};

/// One piece of a closed course. Positive arc angles turn left.
struct CourseSegment
{
  enum class Kind { kStraight, kArc };

  Kind kind = Kind::kStraight;
  double length = 0.0;  // straight only [m]
  double radius = 0.0;  // arc only [m]
  double angle = 0.0;   // arc only [rad]

  static CourseSegment straight(double length) { return {Kind::kStraight, length, 0.0, 0.0}; }
  static CourseSegment arc(double radius, double angle) { return {Kind::kArc, 0.0, radius, angle}; }
};

/// Closed circle centred at the origin, starting at (0, -radius) and running counter-clockwise.
Track generate_circle(double radius, double spacing, double corridor_half_width = 1.5);

/// Chains segments starting at the origin heading +x. Throws ClosureError if the end misses the start.
Track generate_closed_course(
  std::span<const CourseSegment> segments, double spacing = 1.0,
  double corridor_half_width = 1.5);

/// Reads the `x,y` CSV format; an optional `# closed=true` line marks closed tracks.
Track load_track(const std::filesystem::path & path, double corridor_half_width = 1.5);
void save_track(const Track & track, const std::filesystem::path & path);

/**
 * @brief Up to n waypoints ahead of a projection, expressed in the vehicle frame
 * (x forward, y left).
 *
 * Starts at the end vertex of the nearest segment and wraps on closed tracks.
 * On open tracks the list is shorter than n once the end is reached.
 */
std::vector<Waypoint> waypoints_ahead(
  const Track & track, const PathProjection & projection, const Pose & pose, std::size_t n);

/// Adds independent uniform noise in [-max_offset, max_offset] to every coordinate.
Track perturb_waypoints(const Track & track, double max_offset, std::uint64_t seed);

}  // namespace pathlab::track

#endif  // PATHLAB__TRACK_HPP_
