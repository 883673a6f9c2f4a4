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

#include "tgen/geometry.hpp"

#include <algorithm>

namespace tgen
{

double wrap_angle(double a)
{
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  a = std::fmod(a, kTwoPi);
  if (a <= -3.14159265358979323846) {
    a += kTwoPi;
  } else if (a > 3.14159265358979323846) {
    a -= kTwoPi;
  }
  return a;
}

double point_segment_distance(const Vec2 & p, const Vec2 & a, const Vec2 & b)
{
  const Vec2 ab = b - a;
  const double len2 = ab.squared_norm();
  if (len2 <= 0.0) {
    return (p - a).norm();
  }
  double t = (p - a).dot(ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + ab * t)).norm();
}

double polyline_length(const Polyline & pts)
{
  double total = 0.0;
  for (size_t i = 1; i < pts.size(); ++i) {
    total += (pts[i] - pts[i - 1]).norm();
  }
  return total;
}

ArcPoint polyline_at_arc(const Polyline & pts, double s)
{
  ArcPoint out;
  if (pts.empty()) {
    return out;
  }
  if (pts.size() == 1) {
    out.position = pts[0];
    out.tangent = Vec2{1.0, 0.0};
    return out;
  }
  if (s <= 0.0) {
    s = 0.0;
  }
  double acc = 0.0;
  for (size_t i = 1; i < pts.size(); ++i) {
    const Vec2 seg = pts[i] - pts[i - 1];
    const double len = seg.norm();
    if (len <= 0.0) {
      continue;
    }
    if (s <= acc + len || i + 1 == pts.size()) {
      const double t = std::clamp((s - acc) / len, 0.0, 1.0);
      out.position = pts[i - 1] + seg * t;
      out.tangent = seg * (1.0 / len);
      return out;
    }
    acc += len;
  }
  out.position = pts.back();
  out.tangent = Vec2{1.0, 0.0};
  return out;
}

Polygon obb_corners(const ObbBox & box)
{
  const double c = std::cos(box.heading);
  const double s = std::sin(box.heading);
  const double hl = 0.5 * box.length;
  const double hw = 0.5 * box.width;
  // CCW starting from front-left
  const Vec2 fwd{c, s};
  const Vec2 left{-s, c};
  Polygon corners(4);
  corners[0] = box.center + fwd * hl + left * hw;
  corners[1] = box.center - fwd * hl + left * hw;
  corners[2] = box.center - fwd * hl - left * hw;
  corners[3] = box.center + fwd * hl - left * hw;
  return corners;
}

double polygon_area(const Polygon & poly)
{
  double twice = 0.0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2 & a = poly[i];
    const Vec2 & b = poly[(i + 1) % n];
    twice += a.cross(b);
  }
  return 0.5 * twice;
}

namespace
{

// Keeps points on the left side of edge a->b (clip ring is CCW).
Polygon clip_halfplane(const Polygon & subject, const Vec2 & a, const Vec2 & b)
{
  Polygon out;
  const size_t n = subject.size();
  if (n == 0) {
    return out;
  }
  const Vec2 edge = b - a;
  auto side = [&](const Vec2 & p) { return edge.cross(p - a); };
  for (size_t i = 0; i < n; ++i) {
    const Vec2 & cur = subject[i];
    const Vec2 & nxt = subject[(i + 1) % n];
    const double sc = side(cur);
    const double sn = side(nxt);
    if (sc >= 0.0) {
      out.push_back(cur);
    }
    if ((sc > 0.0 && sn < 0.0) || (sc < 0.0 && sn > 0.0)) {
      const double t = sc / (sc - sn);
      out.push_back(cur + (nxt - cur) * t);
    }
  }
  return out;
}

}  // namespace

Polygon clip_convex(const Polygon & subject, const Polygon & clip)
{
  Polygon out = subject;
  const size_t n = clip.size();
  for (size_t i = 0; i < n && !out.empty(); ++i) {
    out = clip_halfplane(out, clip[i], clip[(i + 1) % n]);
  }
  return out;
}

double obb_intersection_area(const ObbBox & a, const ObbBox & b)
{
  if (a.length <= 0.0 || a.width <= 0.0 || b.length <= 0.0 || b.width <= 0.0) {
    return 0.0;
  }
  // Cheap reject: circumscribed circles.
  const double ra = 0.5 * std::hypot(a.length, a.width);
  const double rb = 0.5 * std::hypot(b.length, b.width);
  if ((a.center - b.center).norm() > ra + rb) {
    return 0.0;
  }
  const Polygon inter = clip_convex(obb_corners(a), obb_corners(b));
  if (inter.size() < 3) {
    return 0.0;
  }
  return std::max(0.0, polygon_area(inter));
}

double obb_iou(const ObbBox & a, const ObbBox & b)
{
  const double inter = obb_intersection_area(a, b);
  if (inter <= 0.0) {
    return 0.0;
  }
  const double area_a = a.length * a.width;
  const double area_b = b.length * b.width;
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace tgen
