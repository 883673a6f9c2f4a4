// Copyright 2026 The tgen Authors
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

#ifndef TGEN__VECTORIZE_HPP_
#define TGEN__VECTORIZE_HPP_

#include <string>
#include <vector>

#include "tgen/geometry.hpp"
#include "tgen/scenario.hpp"

namespace tgen
{

// Default chunk length of a lane region, meters.
constexpr double kRegionLength = 5.0;
// A final remnant shorter than this merges into the previous region instead of
// forming an ill-conditioned near-zero frame of its own.
constexpr double kMinRemnant = 0.5;

// Vehicle-to-region validity filters.
constexpr double kMaxLateralDistance = 5.0;           // m from lane center
constexpr double kMaxHeadingOffset = 1.5707963267948966;  // pi/2

/// A ~5 m chunk of a lane centerline; the atomic unit of the representation.
struct Region
{
  int index = 0;
  Vec2 start;  // p_s
  Vec2 end;    // p_e
  LaneType lane_type = LaneType::kCenter;
  LightState light_state = LightState::kUnknown;
  std::string lane_id;

  double chord() const { return (end - start).norm(); }
};

/// Orthonormal frame with origin p_s and +y along p_e - p_s.
struct LocalFrame
{
  Vec2 origin;
  Vec2 y_axis;  // unit
  Vec2 x_axis;  // y rotated -90 degrees

  static LocalFrame from_region(const Region & r);
  static LocalFrame from_pose(const Vec2 & origin, double heading);

  // Heading of the +y axis in world coordinates.
  double frame_heading() const { return std::atan2(y_axis.y, y_axis.x); }
};

struct LocalPose
{
  Vec2 q;      // position in frame coordinates
  double h = 0.0;  // heading offset from the frame's +y, wrapped to (-pi, pi]
};

LocalPose to_local(const LocalFrame & frame, const Vec2 & position, double heading);
void to_world(const LocalFrame & frame, const LocalPose & local, Vec2 & position,
              double & heading);

// Width of the flattened per-region feature row:
// p_s(2) p_e(2) lane_type(4) light(4) m(1) q(2) h(1) vel(1) bbox(2)
constexpr int kFeatureWidth = 19;
constexpr int kVehiclePartOffset = 12;  // column of m

struct VectorFeature
{
  // region part
  Vec2 start;
  Vec2 end;
  LaneType lane_type = LaneType::kCenter;
  LightState light_state = LightState::kUnknown;
  // vehicle part; all exactly zero when occupied == false
  bool occupied = false;
  Vec2 q;
  double h = 0.0;
  double vel = 0.0;
  double bbox_length = 0.0;
  double bbox_width = 0.0;

  void write_row(double * row) const;
};

/// Chunks center-type lanes into regions by arc length. Non-center lanes
/// produce no regions. Indices are stable: lanes in map order, then arc order.
std::vector<Region> chunk_lanes(const LaneMap & map, double seg_len = kRegionLength);

/// Result of assigning snapshot vehicles to regions.
struct Assignment
{
  std::vector<VectorFeature> features;      // exactly one per region
  std::vector<int> vehicle_region;          // per snapshot vehicle; -1 = dropped
  int dropped = 0;                          // filter failures + collisions
};

/// Assigns each vehicle to the region minimizing the distance of its center to
/// the region segment, subject to distance <= 5 m and |h| <= pi/2. Ties go to
/// the lowest region index; when two vehicles claim one region the nearer one
/// wins. Light states come from the snapshot.
Assignment assign_vehicles(const Snapshot & snap, const std::vector<Region> & regions);

/// Row-major I x 19 matrix in the fixed layout above.
std::vector<double> feature_matrix(const std::vector<VectorFeature> & features);

/// Removes snapshot vehicles that assign_vehicles would drop. Used to uphold
/// the Snapshot invariant at extraction time.
void drop_unassignable_vehicles(Snapshot & snap, const std::vector<Region> & regions);

}  // namespace tgen

#endif  // TGEN__VECTORIZE_HPP_
