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

#include "tgen/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tgen/error.hpp"
#include "tgen/log.hpp"

namespace tgen
{

namespace
{

constexpr double kHalfPi = 1.5707963267948966;
// Below this step distance the previous heading is kept.
constexpr double kHeadingStepEps = 1e-3;
// Per-step displacement cap (600 m/s at dt = 0.1). Decoded waypoints of a
// badly out-of-distribution state could otherwise run away and collapse the
// vehicle-frame geometry of later decodes.
constexpr double kMaxStepDistance = 60.0;

/// Scene re-expressed in one vehicle's frame: +y along its heading. The
/// snapshot's map pointer is left null; callers point it at `map` once the
/// object has its final address.
struct LocalScene
{
  LaneMap map;
  Snapshot snap;
  int self_index = -1;
};

LocalScene to_vehicle_frame(const Snapshot & snap, size_t vehicle_index)
{
  const PlacedVehicle & self = snap.vehicles[vehicle_index];
  const LocalFrame frame = LocalFrame::from_pose(Vec2{self.x, self.y}, self.heading);
  const double frame_heading = frame.frame_heading();

  LocalScene out;
  out.self_index = static_cast<int>(vehicle_index);
  for (const Lane & lane : snap.map->lanes) {
    Lane local = lane;
    for (Vec2 & p : local.polyline) {
      const Vec2 d = p - frame.origin;
      p = Vec2{d.dot(frame.x_axis), d.dot(frame.y_axis)};
    }
    // connectivity is irrelevant for encoding; drop dangling references
    out.map.lanes.push_back(std::move(local));
  }
  out.snap.timestep = snap.timestep;
  out.snap.lights = snap.lights;
  for (const PlacedVehicle & v : snap.vehicles) {
    PlacedVehicle local = v;
    const LocalPose pose = to_local(frame, Vec2{v.x, v.y}, v.heading);
    local.x = pose.q.x;
    local.y = pose.q.y;
    // standard angle in the local axes; the ego points along +y
    local.heading = wrap_angle(v.heading - frame_heading + kHalfPi);
    out.snap.vehicles.push_back(std::move(local));
  }
  return out;
}

int nearest_region(const std::vector<Region> & regions, const Vec2 & p)
{
  int best = -1;
  double best_dist = std::numeric_limits<double>::max();
  for (const Region & r : regions) {
    const double d = point_segment_distance(p, r.start, r.end);
    if (d < best_dist) {
      best_dist = d;
      best = r.index;
    }
  }
  return best;
}

}  // namespace

double trajectory_loss(const TrajectoryModes & modes, const std::vector<Vec2> & gt)
{
  if (static_cast<int>(gt.size()) != modes.steps) {
    throw LengthError("trajectory_loss: ground truth must hold L steps");
  }
  int best = 0;
  double best_mse = std::numeric_limits<double>::max();
  for (int k = 0; k < modes.mode_count; ++k) {
    double sum = 0.0;
    for (int t = 0; t < modes.steps; ++t) {
      const Vec2 d = modes.waypoint(k, t) - gt[t];
      sum += d.x * d.x + d.y * d.y;
    }
    const double mse = sum / (2.0 * modes.steps);
    if (mse < best_mse) {
      best_mse = mse;
      best = k;
    }
  }
  return best_mse - std::log(std::max(modes.probs[best], 1e-12));
}

TrajectoryExample make_trajectory_example(const Snapshot & snap,
                                          const std::string & vehicle_id,
                                          const std::vector<Vec2> & future_world)
{
  size_t index = snap.vehicles.size();
  for (size_t i = 0; i < snap.vehicles.size(); ++i) {
    if (snap.vehicles[i].id == vehicle_id) {
      index = i;
      break;
    }
  }
  if (index == snap.vehicles.size()) {
    throw MissingVehicleError("vehicle '" + vehicle_id + "' not in snapshot");
  }

  LocalScene local = to_vehicle_frame(snap, index);
  local.snap.map = &local.map;
  const std::vector<Region> regions = chunk_lanes(local.map);
  if (regions.empty()) {
    throw EmptyError("vehicle-frame scene has no center-lane regions");
  }
  const Assignment assigned = assign_vehicles(local.snap, regions);

  TrajectoryExample out;
  out.region_count = static_cast<int>(regions.size());
  out.features = feature_matrix(assigned.features);
  out.ego_region = assigned.vehicle_region[local.self_index];
  if (out.ego_region < 0) {
    // Off-lane vehicles (long rollouts) still need an embedding; use the
    // nearest region without the validity filters.
    const PlacedVehicle & self = local.snap.vehicles[local.self_index];
    out.ego_region = nearest_region(regions, Vec2{self.x, self.y});
  }

  if (!future_world.empty()) {
    const PlacedVehicle & self = snap.vehicles[index];
    const LocalFrame frame = LocalFrame::from_pose(Vec2{self.x, self.y}, self.heading);
    for (const Vec2 & p : future_world) {
      const LocalPose pose = to_local(frame, p, 0.0);
      out.gt.push_back(pose.q.x);
      out.gt.push_back(pose.q.y);
    }
  }
  return out;
}

TrajectoryModes decode_modes(const Snapshot & snap, const std::string & vehicle_id,
                             const ModelParams & model)
{
  const TrajectoryExample ex = make_trajectory_example(snap, vehicle_id);
  std::vector<float> feat(ex.features.size());
  for (size_t i = 0; i < ex.features.size(); ++i) {
    feat[i] = static_cast<float>(ex.features[i]);
  }

  Tape tape;
  const ParamStore & store = model.store;
  const int input = tape.leaf(Tensor::from_rows(ex.region_count, kFeatureWidth, feat));
  auto [v, c] = encode_context(tape, store, model.cfg, input);
  auto [waypoints, logits] = traj_head_graph(tape, store, model.cfg, v, c, ex.ego_region);
  const int probs = tape.softmax_rows(tape.reshape(logits, 1, model.cfg.mixture_components));

  TrajectoryModes out;
  out.mode_count = model.cfg.mixture_components;
  out.steps = model.cfg.traj_len;
  const Tensor & w = tape.val(waypoints);
  out.waypoints.assign(w.data.begin(), w.data.end());
  const Tensor & p = tape.val(probs);
  out.probs.assign(p.data.begin(), p.data.end());
  return out;
}

int sample_mode(const TrajectoryModes & modes, Rng & rng)
{
  return rng.categorical(modes.probs);
}

Scenario rollout_tracks(const LaneMap & map, const std::vector<RolloutTrack> & tracks,
                        const std::vector<std::pair<std::string, LightState>> & lights,
                        const std::string & ego_id, const RolloutConfig & config,
                        const ModelParams & model, uint64_t seed, RolloutStats * stats)
{
  const int horizon = config.horizon_steps;
  const int seg = std::max(1, config.segment_steps);
  const int total = horizon + 1;

  Scenario out;
  out.map = map;
  out.dt = config.dt;
  out.horizon = total;
  out.ego_id = ego_id;

  // Lights held constant over the rollout.
  out.map.traffic_lights.clear();
  for (const auto & [lane_id, state] : lights) {
    if (state != LightState::kUnknown) {
      out.map.traffic_lights.push_back(TrafficLight{lane_id, std::vector<LightState>(
                                                      static_cast<size_t>(total), state)});
    }
  }

  for (const RolloutTrack & rt : tracks) {
    VehicleTrack track;
    track.id = rt.id;
    track.states.assign(total, VehicleState{});
    const int copy = std::min<int>(static_cast<int>(rt.logged.size()), total);
    for (int t = 0; t < copy; ++t) {
      track.states[t] = rt.logged[t];
    }
    out.tracks.push_back(std::move(track));
  }

  for (int t = 0; t < horizon; ++t) {
    // Scene at step t: every vehicle with a valid state now.
    Snapshot scene;
    scene.map = &out.map;
    scene.timestep = t;
    scene.lights = lights;
    for (const VehicleTrack & track : out.tracks) {
      const VehicleState & st = track.states[t];
      if (st.valid) {
        scene.vehicles.push_back(
          PlacedVehicle{track.id, st.x, st.y, st.heading, st.speed, st.length, st.width});
      }
    }

    for (size_t vi = 0; vi < out.tracks.size(); ++vi) {
      const RolloutTrack & rt = tracks[vi];
      if (rt.anchor >= horizon || t < rt.anchor || (t - rt.anchor) % seg != 0) {
        continue;
      }
      VehicleTrack & track = out.tracks[vi];
      if (!track.states[t].valid) {
        continue;  // vehicle not present yet
      }

      const TrajectoryModes modes = decode_modes(scene, rt.id, model);
      if (stats != nullptr) {
        ++stats->decodes;
      }
      const int segment_index = (t - rt.anchor) / seg;
      Rng rng = derive_stream(
        seed, {hash_string("traj"), hash_string(rt.id), static_cast<uint64_t>(segment_index)});
      const int mode = sample_mode(modes, rng);

      const VehicleState & cur = track.states[t];
      const LocalFrame frame = LocalFrame::from_pose(Vec2{cur.x, cur.y}, cur.heading);
      const int commit = std::min(seg, horizon - t);
      Vec2 prev{cur.x, cur.y};
      double prev_heading = cur.heading;
      for (int j = 0; j < commit; ++j) {
        Vec2 world;
        double unused;
        to_world(frame, LocalPose{modes.waypoint(mode, j), 0.0}, world, unused);
        Vec2 step = world - prev;
        double dist = step.norm();
        if (!std::isfinite(dist)) {
          step = Vec2{0.0, 0.0};
          dist = 0.0;
        } else if (dist > kMaxStepDistance) {
          step = step * (kMaxStepDistance / dist);
          dist = kMaxStepDistance;
        }
        world = prev + step;
        VehicleState & st = track.states[t + 1 + j];
        st.x = world.x;
        st.y = world.y;
        st.heading = dist < kHeadingStepEps ? prev_heading : std::atan2(step.y, step.x);
        st.speed = dist / config.dt;
        st.length = cur.length;
        st.width = cur.width;
        st.valid = true;
        prev = world;
        prev_heading = st.heading;
      }
    }
  }
  return out;
}

Scenario rollout(const Snapshot & snap, const RolloutConfig & config, const ModelParams & model,
                 uint64_t seed, RolloutStats * stats)
{
  std::vector<RolloutTrack> tracks;
  for (const PlacedVehicle & v : snap.vehicles) {
    RolloutTrack rt;
    rt.id = v.id;
    rt.anchor = 0;
    VehicleState st;
    st.x = v.x;
    st.y = v.y;
    st.heading = v.heading;
    st.speed = v.speed;
    st.length = v.length;
    st.width = v.width;
    st.valid = true;
    rt.logged.push_back(st);
    tracks.push_back(std::move(rt));
  }
  const std::string ego = snap.vehicles.empty() ? "" : snap.vehicles.front().id;
  return rollout_tracks(*snap.map, tracks, snap.lights, ego, config, model, seed, stats);
}

}  // namespace tgen
