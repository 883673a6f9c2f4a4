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

#include "tgen/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tgen/vectorize.hpp"

namespace tgen
{

namespace
{

void fmt(std::string & out, const char * format, double v)
{
  char buf[48];
  std::snprintf(buf, sizeof(buf), format, v);
  out += buf;
}

const char * lane_color(LaneType t)
{
  switch (t) {
    case LaneType::kCenter: return "#9aa0a6";
    case LaneType::kBoundarySolid: return "#fbbc04";
    case LaneType::kBoundaryBroken: return "#dadce0";
    case LaneType::kEdge: return "#202124";
  }
  return "#9aa0a6";
}

// Blue-to-red ramp; equal weights land on one mid color.
std::string heat_color(double t)
{
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(40 + 215 * t);
  const int g = 60;
  const int b = static_cast<int>(255 - 215 * t);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string render_svg(const Scenario & scenario, const RenderOptions & options)
{
  // viewBox: origin-centered square, at least the 120 m crop window.
  double extent = 60.0;
  for (const Lane & lane : scenario.map.lanes) {
    for (const Vec2 & p : lane.polyline) {
      extent = std::max({extent, std::abs(p.x), std::abs(p.y)});
    }
  }
  for (const VehicleTrack & t : scenario.tracks) {
    for (const VehicleState & st : t.states) {
      if (st.valid) {
        extent = std::max({extent, std::abs(st.x), std::abs(st.y)});
      }
    }
  }
  const double side = 2.0 * extent;

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"";
  fmt(svg, "%.3f", -extent);
  fmt(svg, " %.3f", -extent);
  fmt(svg, " %.3f", side);
  fmt(svg, " %.3f", side);
  svg += "\" width=\"800\" height=\"800\">\n";
  svg += "<rect x=\"";
  fmt(svg, "%.3f", -extent);
  fmt(svg, "\" y=\"%.3f", -extent);
  fmt(svg, "\" width=\"%.3f", side);
  fmt(svg, "\" height=\"%.3f", side);
  svg += "\" fill=\"#ffffff\"/>\n";
  // y grows north in scene coordinates, south in SVG; flip once.
  svg += "<g transform=\"scale(1,-1)\">\n";

  // Heat layer under everything else.
  if (!options.heatmap.empty()) {
    const std::vector<Region> regions = chunk_lanes(scenario.map);
    const size_t n = std::min(regions.size(), options.heatmap.size());
    double lo = options.heatmap[0];
    double hi = options.heatmap[0];
    for (size_t i = 0; i < n; ++i) {
      lo = std::min(lo, options.heatmap[i]);
      hi = std::max(hi, options.heatmap[i]);
    }
    for (size_t i = 0; i < n; ++i) {
      const double t = hi > lo ? (options.heatmap[i] - lo) / (hi - lo) : 0.5;
      const Region & r = regions[i];
      svg += "<line x1=\"";
      fmt(svg, "%.3f", r.start.x);
      fmt(svg, "\" y1=\"%.3f", r.start.y);
      fmt(svg, "\" x2=\"%.3f", r.end.x);
      fmt(svg, "\" y2=\"%.3f", r.end.y);
      svg += "\" stroke=\"" + heat_color(t) + "\" stroke-width=\"4.5\" stroke-opacity=\"0.6\"/>\n";
    }
  }

  for (const Lane & lane : scenario.map.lanes) {
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += lane_color(lane.type);
    svg += lane.type == LaneType::kCenter ? "\" stroke-width=\"0.4\"" : "\" stroke-width=\"0.25\"";
    svg += " points=\"";
    for (size_t i = 0; i < lane.polyline.size(); ++i) {
      if (i > 0) {
        svg += ' ';
      }
      fmt(svg, "%.3f", lane.polyline[i].x);
      fmt(svg, ",%.3f", lane.polyline[i].y);
    }
    svg += "\"/>\n";
  }

  if (options.show_trajectories) {
    for (const VehicleTrack & track : scenario.tracks) {
      std::string pts;
      for (const VehicleState & st : track.states) {
        if (!st.valid) {
          continue;
        }
        if (!pts.empty()) {
          pts += ' ';
        }
        fmt(pts, "%.3f", st.x);
        fmt(pts, ",%.3f", st.y);
      }
      if (!pts.empty()) {
        svg += "<polyline fill=\"none\" stroke=\"#4285f4\" stroke-width=\"0.3\" points=\"" +
               pts + "\"/>\n";
      }
    }
  }

  const int t = std::clamp(options.timestep, 0, scenario.horizon - 1);
  for (const VehicleTrack & track : scenario.tracks) {
    const VehicleState & st = track.states[t];
    if (!st.valid) {
      continue;
    }
    svg += "<g transform=\"translate(";
    fmt(svg, "%.3f", st.x);
    fmt(svg, ",%.3f", st.y);
    fmt(svg, ") rotate(%.3f", st.heading * 57.295779513082320877);
    svg += ")\"><rect x=\"";
    fmt(svg, "%.3f", -0.5 * st.length);
    fmt(svg, "\" y=\"%.3f", -0.5 * st.width);
    fmt(svg, "\" width=\"%.3f", st.length);
    fmt(svg, "\" height=\"%.3f", st.width);
    svg += "\" fill=\"#ea4335\" stroke=\"#202124\" stroke-width=\"0.1\"/></g>\n";
  }

  svg += "</g>\n</svg>\n";
  return svg;
}

}  // namespace tgen
