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

#include "tgen/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tgen/log.hpp"

namespace tgen
{

LocalFrame LocalFrame::from_region(const Region & r)
{
  LocalFrame f;
  f.origin = r.start;
  const Vec2 d = r.end - r.start;
  const double len = d.norm();
  f.y_axis = len > 0.0 ? d * (1.0 / len) : Vec2{0.0, 1.0};
  f.x_axis = Vec2{f.y_axis.y, -f.y_axis.x};  // -90 degree rotation
  return f;
}

LocalFrame LocalFrame::from_pose(const Vec2 & origin, double heading)
{
  LocalFrame f;
  f.origin = origin;
  f.y_axis = Vec2{std::cos(heading), std::sin(heading)};
  f.x_axis = Vec2{f.y_axis.y, -f.y_axis.x};
  return f;
}

LocalPose to_local(const LocalFrame & frame, const Vec2 & position, double heading)
{
  const Vec2 d = position - frame.origin;
  LocalPose out;
  out.q = Vec2{d.dot(frame.x_axis), d.dot(frame.y_axis)};
  out.h = wrap_angle(heading - frame.frame_heading());
  return out;
}

void to_world(const LocalFrame & frame, const LocalPose & local, Vec2 & position,
              double & heading)
{
  position = frame.origin + frame.x_axis * local.q.x + frame.y_axis * local.q.y;
  heading = wrap_angle(local.h + frame.frame_heading());
}

std::vector<Region> chunk_lanes(const LaneMap & map, double seg_len)
{
  std::vector<Region> regions;
  for (const Lane & lane : map.lanes) {
    if (lane.type != LaneType::kCenter) {
      continue;
    }
    const double total = polyline_length(lane.polyline);
    if (total <= 0.0) {
      continue;
    }
    // Cut points every seg_len of arc; the remnant keeps its own region when
    // it is at least kMinRemnant, otherwise the previous region absorbs it.
    std::vector<double> cuts;
    cuts.push_back(0.0);
    double s = seg_len;
    while (s < total - 1e-9) {
      cuts.push_back(s);
      s += seg_len;
    }
    cuts.push_back(total);
    if (cuts.size() >= 3) {
      const double remnant = cuts[cuts.size() - 1] - cuts[cuts.size() - 2];
      if (remnant < kMinRemnant) {
        cuts.erase(cuts.end() - 2);
      }
    }
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
      Region r;
      r.index = static_cast<int>(regions.size());
      r.start = polyline_at_arc(lane.polyline, cuts[i]).position;
      r.end = polyline_at_arc(lane.polyline, cuts[i + 1]).position;
      r.lane_type = lane.type;
      r.lane_id = lane.id;
      if (r.chord() <= 0.0) {
        continue;  // degenerate geometry (e.g. doubled points)
      }
      r.index = static_cast<int>(regions.size());
      regions.push_back(std::move(r));
    }
  }
  return regions;
}

void VectorFeature::write_row(double * row) const
{
  row[0] = start.x;
  row[1] = start.y;
  row[2] = end.x;
  row[3] = end.y;
  for (int i = 0; i < kLaneTypeCount; ++i) {
    row[4 + i] = i == static_cast<int>(lane_type) ? 1.0 : 0.0;
  }
  for (int i = 0; i < kLightStateCount; ++i) {
    row[8 + i] = i == static_cast<int>(light_state) ? 1.0 : 0.0;
  }
  row[12] = occupied ? 1.0 : 0.0;
  row[13] = occupied ? q.x : 0.0;
  row[14] = occupied ? q.y : 0.0;
  row[15] = occupied ? h : 0.0;
  row[16] = occupied ? vel : 0.0;
  row[17] = occupied ? bbox_length : 0.0;
  row[18] = occupied ? bbox_width : 0.0;
}

namespace
{

struct Candidate
{
  int region = -1;
  double distance = std::numeric_limits<double>::max();
  LocalPose pose;
};

Candidate best_region_for(const PlacedVehicle & v, const std::vector<Region> & regions)
{
  Candidate best;
  const Vec2 p{v.x, v.y};
  for (const Region & r : regions) {
    const double dist = point_segment_distance(p, r.start, r.end);
    if (dist > kMaxLateralDistance) {
      continue;
    }
    const LocalFrame frame = LocalFrame::from_region(r);
    const LocalPose pose = to_local(frame, p, v.heading);
    if (std::abs(pose.h) > kMaxHeadingOffset) {
      continue;
    }
    if (dist < best.distance) {
      best.region = r.index;
      best.distance = dist;
      best.pose = pose;
    }
  }
  return best;
}

}  // namespace

Assignment assign_vehicles(const Snapshot & snap, const std::vector<Region> & regions)
{
  Assignment out;
  out.features.resize(regions.size());
  for (size_t i = 0; i < regions.size(); ++i) {
    const Region & r = regions[i];
    VectorFeature & f = out.features[i];
    f.start = r.start;
    f.end = r.end;
    f.lane_type = r.lane_type;
    f.light_state = snap.light_for(r.lane_id);
  }

  out.vehicle_region.assign(snap.vehicles.size(), -1);
  // region -> (vehicle index, distance) of the current claimant
  std::vector<std::pair<int, double>> claim(regions.size(), {-1, 0.0});

  for (size_t vi = 0; vi < snap.vehicles.size(); ++vi) {
    const Candidate best = best_region_for(snap.vehicles[vi], regions);
    if (best.region < 0) {
      ++out.dropped;
      log_debug("vehicle " + snap.vehicles[vi].id + " fails the validity filters");
      continue;
    }
    auto & holder = claim[best.region];
    if (holder.first >= 0) {
      // nearest vehicle wins the region; the loser is dropped
      if (best.distance < holder.second) {
        out.vehicle_region[holder.first] = -1;
        ++out.dropped;
        log_debug("vehicle " + snap.vehicles[holder.first].id + " displaced from region " +
                  std::to_string(best.region));
        holder = {static_cast<int>(vi), best.distance};
        out.vehicle_region[vi] = best.region;
      } else {
        ++out.dropped;
        log_debug("vehicle " + snap.vehicles[vi].id + " lost region " +
                  std::to_string(best.region));
      }
      continue;
    }
    holder = {static_cast<int>(vi), best.distance};
    out.vehicle_region[vi] = best.region;
  }

  for (size_t vi = 0; vi < snap.vehicles.size(); ++vi) {
    const int ri = out.vehicle_region[vi];
    if (ri < 0) {
      continue;
    }
    const PlacedVehicle & v = snap.vehicles[vi];
    const LocalFrame frame = LocalFrame::from_region(regions[ri]);
    const LocalPose pose = to_local(frame, Vec2{v.x, v.y}, v.heading);
    VectorFeature & f = out.features[ri];
    f.occupied = true;
    f.q = pose.q;
    f.h = pose.h;
    f.vel = v.speed;
    f.bbox_length = v.length;
    f.bbox_width = v.width;
  }
  return out;
}

std::vector<double> feature_matrix(const std::vector<VectorFeature> & features)
{
  std::vector<double> m(features.size() * kFeatureWidth, 0.0);
  for (size_t i = 0; i < features.size(); ++i) {
    features[i].write_row(m.data() + i * kFeatureWidth);
  }
  return m;
}

void drop_unassignable_vehicles(Snapshot & snap, const std::vector<Region> & regions)
{
  const Assignment a = assign_vehicles(snap, regions);
  std::vector<PlacedVehicle> kept;
  kept.reserve(snap.vehicles.size());
  for (size_t i = 0; i < snap.vehicles.size(); ++i) {
    if (a.vehicle_region[i] >= 0) {
      kept.push_back(snap.vehicles[i]);
    }
  }
  snap.vehicles = std::move(kept);
}

}  // namespace tgen
