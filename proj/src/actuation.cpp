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

#include "tgen/actuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tgen
{

double idm_accel(double v, const IdmParams & p, const std::optional<Lead> & lead)
{
  double accel = p.max_accel * (1.0 - std::pow(v / p.desired_speed, p.exponent));
  if (lead.has_value()) {
    const double dv = v - lead->speed;
    const double s_star =
      p.min_gap + v * p.time_headway + v * dv / (2.0 * std::sqrt(p.max_accel * p.comfortable_decel));
    const double ratio = s_star / std::max(lead->gap, 1e-9);
    accel -= p.max_accel * ratio * ratio;
  }
  return std::clamp(accel, -2.0 * p.comfortable_decel, p.max_accel);
}

PathFollower PathFollower::from_waypoints(const std::string & id, const Polyline & waypoints,
                                          double initial_speed, double length, double width)
{
  PathFollower f;
  f.id = id;
  f.speed = std::max(0.0, initial_speed);
  f.length = length;
  f.width = width;
  // collapse duplicate points so tangents stay well-defined
  for (const Vec2 & p : waypoints) {
    if (f.path.empty() || (p - f.path.back()).norm() > 1e-9) {
      f.path.push_back(p);
    }
  }
  if (f.path.empty() && !waypoints.empty()) {
    f.path.push_back(waypoints.front());
  }
  f.cum_arc.resize(f.path.size(), 0.0);
  for (size_t i = 1; i < f.path.size(); ++i) {
    f.cum_arc[i] = f.cum_arc[i - 1] + (f.path[i] - f.path[i - 1]).norm();
  }
  return f;
}

void PathFollower::pose(Vec2 & position, double & heading) const
{
  if (path.empty()) {
    position = Vec2{0.0, 0.0};
    heading = 0.0;
    return;
  }
  if (path.size() == 1) {
    position = path[0];
    heading = 0.0;
    return;
  }
  const ArcPoint ap = polyline_at_arc(path, cursor);
  position = ap.position;
  heading = std::atan2(ap.tangent.y, ap.tangent.x);
}

std::optional<Lead> find_lead(const PathFollower & self, const std::vector<PathFollower> & all)
{
  if (self.path.size() < 2 || self.at_end()) {
    return std::nullopt;
  }
  std::optional<Lead> best;
  double best_arc = std::numeric_limits<double>::max();

  for (const PathFollower & other : all) {
    if (&other == &self || other.path.empty()) {
      continue;
    }
    Vec2 pos;
    double heading_unused;
    other.pose(pos, heading_unused);

    // Project the other vehicle's center onto the remaining path.
    double acc = 0.0;
    for (size_t i = 1; i < self.path.size(); ++i) {
      const Vec2 a = self.path[i - 1];
      const Vec2 b = self.path[i];
      const Vec2 ab = b - a;
      const double seg_len = ab.norm();
      if (seg_len <= 0.0) {
        continue;
      }
      const double t = std::clamp((pos - a).dot(ab) / (seg_len * seg_len), 0.0, 1.0);
      const Vec2 proj = a + ab * t;
      const double lateral = (pos - proj).norm();
      const double arc = acc + t * seg_len - self.cursor;
      acc += seg_len;
      if (lateral > 0.5 * kLeadCorridorWidth) {
        continue;
      }
      if (arc <= 0.0 || arc > kLeadLookahead) {
        continue;
      }
      if (arc < best_arc) {
        best_arc = arc;
        Lead lead;
        lead.gap = std::max(kMinLeadGap, arc - 0.5 * (self.length + other.length));
        lead.speed = other.speed;
        best = lead;
      }
    }
  }
  return best;
}

void step_scene(std::vector<PathFollower> & scene, double dt)
{
  if (dt <= 0.0) {
    return;
  }
  std::vector<double> accel(scene.size(), 0.0);
  for (size_t i = 0; i < scene.size(); ++i) {
    if (scene[i].at_end()) {
      continue;
    }
    accel[i] = idm_accel(scene[i].speed, scene[i].params, find_lead(scene[i], scene));
  }
  for (size_t i = 0; i < scene.size(); ++i) {
    PathFollower & f = scene[i];
    if (f.at_end()) {
      f.speed = 0.0;
      continue;
    }
    f.speed = std::max(0.0, f.speed + accel[i] * dt);
    f.cursor = std::min(f.cursor + f.speed * dt, f.path_length());
  }
}

Scenario simulate_scenario(const Scenario & source, const IdmParams & defaults,
                           int horizon_steps)
{
  const int total = horizon_steps > 0 ? horizon_steps + 1 : source.horizon;

  Scenario out;
  out.map = source.map;
  out.dt = source.dt;
  out.ego_id = source.ego_id;
  out.horizon = total;
  // Lights replayed as logged, padded by holding the last state.
  for (TrafficLight & light : out.map.traffic_lights) {
    if (static_cast<int>(light.states.size()) > total) {
      light.states.resize(total);
    }
    while (static_cast<int>(light.states.size()) < total) {
      light.states.push_back(light.states.empty() ? LightState::kUnknown : light.states.back());
    }
  }

  struct Entry
  {
    PathFollower follower;
    int start = 0;
    double entry_heading = 0.0;
  };
  std::vector<Entry> entries;
  for (const VehicleTrack & track : source.tracks) {
    const int first = track.first_valid();
    if (first < 0) {
      continue;
    }
    Polyline waypoints;
    std::vector<double> speeds;
    for (const VehicleState & st : track.states) {
      if (st.valid) {
        waypoints.push_back(Vec2{st.x, st.y});
        speeds.push_back(st.speed);
      }
    }
    Entry e;
    e.follower = PathFollower::from_waypoints(track.id, waypoints, track.states[first].speed,
                                              track.states[first].length,
                                              track.states[first].width);
    e.follower.params = defaults;
    // 90th-percentile source speed keeps playback near the logged kinematics.
    std::sort(speeds.begin(), speeds.end());
    const double p90 = speeds[static_cast<size_t>(0.9 * (speeds.size() - 1))];
    e.follower.params.desired_speed = std::max(5.0, p90);
    e.start = first;
    e.entry_heading = track.states[first].heading;
    entries.push_back(std::move(e));
  }

  std::vector<VehicleTrack> tracks(entries.size());
  for (size_t i = 0; i < entries.size(); ++i) {
    tracks[i].id = entries[i].follower.id;
    tracks[i].states.assign(total, VehicleState{});
  }

  auto record = [&](int t) {
    for (size_t i = 0; i < entries.size(); ++i) {
      if (t < entries[i].start) {
        continue;
      }
      const PathFollower & f = entries[i].follower;
      Vec2 pos;
      double heading;
      f.pose(pos, heading);
      if (f.path.size() == 1) {
        heading = entries[i].entry_heading;
      }
      VehicleState & st = tracks[i].states[t];
      st.x = pos.x;
      st.y = pos.y;
      st.heading = heading;
      st.speed = f.speed;
      st.length = f.length;
      st.width = f.width;
      st.valid = true;
    }
  };

  record(0);
  for (int t = 1; t < total; ++t) {
    // Only vehicles already on stage move; the others join at their start step.
    std::vector<PathFollower> active;
    std::vector<size_t> active_idx;
    for (size_t i = 0; i < entries.size(); ++i) {
      if (t > entries[i].start) {
        active.push_back(entries[i].follower);
        active_idx.push_back(i);
      }
    }
    step_scene(active, source.dt);
    for (size_t k = 0; k < active_idx.size(); ++k) {
      entries[active_idx[k]].follower = active[k];
    }
    record(t);
  }

  out.tracks = std::move(tracks);
  return out;
}

}  // namespace tgen
