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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "tgen/geometry.hpp"
#include "tgen/rng.hpp"

using namespace tgen;

TEST_CASE("wrap_angle maps into (-pi, pi]")
{
  CHECK(wrap_angle(0.0) == doctest::Approx(0.0));
  CHECK(wrap_angle(3.14159265358979323846) == doctest::Approx(3.14159265358979323846));
  CHECK(wrap_angle(-3.14159265358979323846) == doctest::Approx(3.14159265358979323846));
  CHECK(wrap_angle(4.0) == doctest::Approx(4.0 - 2.0 * 3.14159265358979323846));
  CHECK(wrap_angle(7.0) == doctest::Approx(7.0 - 2.0 * 3.14159265358979323846));
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double w = wrap_angle(rng.uniform(-50.0, 50.0));
    CHECK(w > -3.14159265358979323846);
    CHECK(w <= 3.14159265358979323846 + 1e-15);
  }
}

TEST_CASE("point_segment_distance")
{
  const Vec2 a{0.0, 0.0};
  const Vec2 b{10.0, 0.0};
  CHECK(point_segment_distance({5.0, 3.0}, a, b) == doctest::Approx(3.0));
  CHECK(point_segment_distance({-4.0, 3.0}, a, b) == doctest::Approx(5.0));
  CHECK(point_segment_distance({13.0, 4.0}, a, b) == doctest::Approx(5.0));
  CHECK(point_segment_distance({2.0, 0.0}, a, a) == doctest::Approx(2.0));
}

TEST_CASE("polyline arc length and interpolation")
{
  const Polyline line{{0.0, 0.0}, {3.0, 0.0}, {3.0, 4.0}};
  CHECK(polyline_length(line) == doctest::Approx(7.0));
  const ArcPoint mid = polyline_at_arc(line, 3.0);
  CHECK(mid.position.x == doctest::Approx(3.0));
  CHECK(mid.position.y == doctest::Approx(0.0));
  const ArcPoint p = polyline_at_arc(line, 5.0);
  CHECK(p.position.x == doctest::Approx(3.0));
  CHECK(p.position.y == doctest::Approx(2.0));
  CHECK(p.tangent.y == doctest::Approx(1.0));
  const ArcPoint end = polyline_at_arc(line, 99.0);
  CHECK(end.position.y == doctest::Approx(4.0));
}

TEST_CASE("obb corners and area")
{
  const ObbBox box{{1.0, 2.0}, 0.0, 4.0, 2.0};
  const Polygon poly = obb_corners(box);
  CHECK(polygon_area(poly) == doctest::Approx(8.0));
  // CCW orientation
  CHECK(polygon_area(poly) > 0.0);
}

TEST_CASE("obb_iou identities")
{
  const ObbBox a{{0.0, 0.0}, 0.3, 4.0, 2.0};
  CHECK(obb_iou(a, a) == doctest::Approx(1.0));

  const ObbBox far{{100.0, 0.0}, 0.0, 4.0, 2.0};
  CHECK(obb_iou(a, far) == 0.0);

  // Axis-aligned half overlap: intersection 4, union 12, IOU 1/3.
  const ObbBox p{{0.0, 0.0}, 0.0, 4.0, 2.0};
  const ObbBox q{{2.0, 0.0}, 0.0, 4.0, 2.0};
  CHECK(obb_iou(p, q) == doctest::Approx(1.0 / 3.0));

  // Touching boxes share only an edge.
  const ObbBox r{{4.0, 0.0}, 0.0, 4.0, 2.0};
  CHECK(obb_iou(p, r) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("obb_iou against a Monte-Carlo area oracle")
{
  Rng rng(17);
  auto inside = [](const ObbBox & b, const Vec2 & p) {
    const double c = std::cos(b.heading), s = std::sin(b.heading);
    const Vec2 d = p - b.center;
    const double lx = c * d.x + s * d.y;
    const double ly = -s * d.x + c * d.y;
    return std::abs(lx) <= 0.5 * b.length && std::abs(ly) <= 0.5 * b.width;
  };
  for (int trial = 0; trial < 20; ++trial) {
    const ObbBox a{{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)}, rng.uniform(-3.0, 3.0),
                   rng.uniform(1.0, 6.0), rng.uniform(1.0, 3.0)};
    const ObbBox b{{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)}, rng.uniform(-3.0, 3.0),
                   rng.uniform(1.0, 6.0), rng.uniform(1.0, 3.0)};
    int hits = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const Vec2 p{rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0)};
      if (inside(a, p) && inside(b, p)) {
        ++hits;
      }
    }
    const double mc_area = 256.0 * hits / n;
    const double exact = obb_intersection_area(a, b);
    CHECK(exact == doctest::Approx(mc_area).epsilon(0.08).scale(1.0));
  }
}

TEST_CASE("clip_convex clips a triangle to a square")
{
  const Polygon square{{0.0, 0.0}, {2.0, 0.0}, {2.0, 2.0}, {0.0, 2.0}};
  const Polygon tri{{1.0, 1.0}, {5.0, 1.0}, {1.0, 5.0}};
  const Polygon out = clip_convex(tri, square);
  CHECK(polygon_area(out) == doctest::Approx(1.0));
  // and a case where the clip window truncates the hypotenuse
  const Polygon tri2{{1.0, 1.0}, {4.0, 1.0}, {1.0, 4.0}};
  const Polygon wide{{0.0, 0.0}, {3.0, 0.0}, {3.0, 3.0}, {0.0, 3.0}};
  CHECK(polygon_area(clip_convex(tri2, wide)) == doctest::Approx(3.5));
}
