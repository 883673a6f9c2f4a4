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

#ifndef TGEN__GEOMETRY_HPP_
#define TGEN__GEOMETRY_HPP_

#include <cmath>
#include <vector>

namespace tgen
{

struct Vec2
{
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2 & o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2 & o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2 & o) const { return x * o.x + y * o.y; }
  double cross(const Vec2 & o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
};

using Polyline = std::vector<Vec2>;
using Polygon = std::vector<Vec2>;  // counter-clockwise convex ring

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

// Euclidean distance from point p to segment [a, b].
double point_segment_distance(const Vec2 & p, const Vec2 & a, const Vec2 & b);

// Total arc length of a polyline.
double polyline_length(const Polyline & pts);

// Point at arc position s (clamped to [0, length]) plus the unit tangent of
// the segment it falls on.
struct ArcPoint
{
  Vec2 position;
  Vec2 tangent;
};
ArcPoint polyline_at_arc(const Polyline & pts, double s);

// Oriented rectangle footprint of a vehicle: center, heading (rad from +x),
// full length along heading, full width across.
struct ObbBox
{
  Vec2 center;
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;
};

// CCW corners of the oriented box.
Polygon obb_corners(const ObbBox & box);

// Signed shoelace area; CCW rings are positive.
double polygon_area(const Polygon & poly);

// Sutherland-Hodgman clip of a convex subject polygon against a convex CCW
// clip polygon. Result may be empty.
Polygon clip_convex(const Polygon & subject, const Polygon & clip);

// Exact intersection-over-union of two oriented boxes via polygon clipping.
double obb_iou(const ObbBox & a, const ObbBox & b);

// Intersection area only (cheaper test for "touches at all").
double obb_intersection_area(const ObbBox & a, const ObbBox & b);

}  // namespace tgen

#endif  // TGEN__GEOMETRY_HPP_
