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

#include "tgen/training.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tgen/error.hpp"
#include "tgen/log.hpp"
#include "tgen/placement.hpp"

namespace fs = std::filesystem;

namespace tgen
{

namespace
{

using nlohmann::json;

std::vector<std::string> sorted_scenario_files(const std::string & dir)
{
  std::vector<std::string> files;
  if (!fs::is_directory(dir)) {
    return files;
  }
  for (const auto & entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string read_file(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TrainConfig TrainConfig::from_json_file(const std::string & path)
{
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception & e) {
    throw SchemaError(std::string("train config: ") + e.what());
  }
  TrainConfig cfg;
  cfg.epochs = doc.value("epochs", cfg.epochs);
  cfg.lr = doc.value("lr", cfg.lr);
  cfg.batch_size = doc.value("batch_size", cfg.batch_size);
  cfg.seed = doc.value("seed", cfg.seed);
  cfg.grad_clip = doc.value("grad_clip", cfg.grad_clip);
  cfg.corpus_dir = doc.value("corpus", cfg.corpus_dir);
  cfg.checkpoint_path = doc.value("checkpoint", cfg.checkpoint_path);
  cfg.init_weights = doc.value("init_weights", cfg.init_weights);
  cfg.snapshot_interval = doc.value("snapshot_interval", cfg.snapshot_interval);
  cfg.model.embed_dim = doc.value("embed_dim", cfg.model.embed_dim);
  cfg.model.encoder_blocks = doc.value("encoder_blocks", cfg.model.encoder_blocks);
  cfg.model.mixture_components = doc.value("mixture_components", cfg.model.mixture_components);
  cfg.model.traj_len = doc.value("traj_len", cfg.model.traj_len);
  if (doc.contains("head_hidden")) {
    cfg.model.head_hidden.clear();
    for (const json & v : doc["head_hidden"]) {
      cfg.model.head_hidden.push_back(v.get<int>());
    }
  }
  if (cfg.epochs <= 0 || cfg.batch_size <= 0 || cfg.model.mixture_components < 1) {
    throw ValueError("train config: counts must be positive");
  }
  return cfg;
}

PlacementDataset build_placement_dataset(const std::string & dir, double interval)
{
  PlacementDataset out;
  for (const std::string & path : sorted_scenario_files(dir)) {
    ++out.report.files;
    Scenario scenario;
    try {
      scenario = parse_scenario(read_file(path)).scenario;
    } catch (const Error & e) {
      ++out.report.skipped_files;
      log_info("skipping '" + path + "': " + e.what());
      continue;
    }
    const std::vector<Region> regions = chunk_lanes(scenario.map);
    for (const Snapshot & snap : split_snapshots(scenario, interval)) {
      const Assignment assigned = assign_vehicles(snap, regions);
      bool occupied = false;
      for (const VectorFeature & f : assigned.features) {
        if (f.occupied) {
          occupied = true;
          break;
        }
      }
      if (!occupied) {
        ++out.report.skipped_records;  // nothing to mask
        continue;
      }
      out.records.push_back(assigned.features);
      ++out.report.records;
    }
  }
  return out;
}

TrajectoryDataset build_trajectory_dataset(const std::string & dir, int traj_len, double dt)
{
  TrajectoryDataset out;
  // Scenarios longer than the training horizon contribute one example per
  // anchor step, so mid-episode states (e.g. mid-braking) are decode inputs
  // during training, not only ground-truth futures.
  const int anchor_stride = std::max(1, traj_len / 3);
  for (const std::string & path : sorted_scenario_files(dir)) {
    ++out.report.files;
    Scenario scenario;
    try {
      scenario = parse_scenario(read_file(path)).scenario;
    } catch (const Error & e) {
      ++out.report.skipped_files;
      log_info("skipping '" + path + "': " + e.what());
      continue;
    }
    (void)dt;
    if (scenario.horizon < traj_len + 1) {
      ++out.report.skipped_records;  // shorter than the training horizon
      continue;
    }
    const VehicleTrack * ego = scenario.find_track(scenario.ego_id);
    if (ego == nullptr) {
      ++out.report.skipped_records;
      continue;
    }
    const std::vector<Region> regions = chunk_lanes(scenario.map);
    for (int anchor = 0; anchor + traj_len < scenario.horizon; anchor += anchor_stride) {
      bool cover = true;
      for (int t = anchor; t <= anchor + traj_len; ++t) {
        if (!ego->states[t].valid) {
          cover = false;
          break;
        }
      }
      if (!cover) {
        ++out.report.skipped_records;
        continue;
      }
      Snapshot snap;
      snap.map = &scenario.map;
      snap.timestep = anchor;
      for (const Lane & lane : scenario.map.lanes) {
        snap.lights.emplace_back(lane.id, scenario.map.light_at(lane.id, anchor));
      }
      for (const VehicleTrack & track : scenario.tracks) {
        if (anchor < static_cast<int>(track.states.size()) && track.states[anchor].valid) {
          const VehicleState & st = track.states[anchor];
          snap.vehicles.push_back(
            PlacedVehicle{track.id, st.x, st.y, st.heading, st.speed, st.length, st.width});
        }
      }
      drop_unassignable_vehicles(snap, regions);
      std::vector<Vec2> future;
      for (int t = anchor + 1; t <= anchor + traj_len; ++t) {
        future.push_back(Vec2{ego->states[t].x, ego->states[t].y});
      }
      try {
        out.records.push_back(make_trajectory_example(snap, scenario.ego_id, future));
        ++out.report.records;
      } catch (const Error & e) {
        ++out.report.skipped_records;  // e.g. ego fails the validity filters
        log_info("skipping ego of '" + path + "': " + e.what());
      }
    }
  }
  return out;
}

TrainResult train(const TrainConfig & cfg, TrainMode mode)
{
  PlacementDataset placement;
  TrajectoryDataset trajectory;
  size_t record_count = 0;
  if (mode == TrainMode::kPlacement) {
    placement = build_placement_dataset(cfg.corpus_dir, cfg.snapshot_interval);
    record_count = placement.records.size();
  } else {
    trajectory = build_trajectory_dataset(cfg.corpus_dir, cfg.model.traj_len);
    record_count = trajectory.records.size();
  }
  if (record_count == 0) {
    throw EmptyError("train: empty dataset in '" + cfg.corpus_dir + "'");
  }
  log_info("training on " + std::to_string(record_count) + " records");

  TrainResult result;
  if (!cfg.init_weights.empty()) {
    result.model = load_model(cfg.init_weights);
  } else {
    init_model_params(result.model, cfg.model, cfg.seed);
  }
  ParamStore & store = result.model.store;

  AdamConfig adam;
  adam.lr = cfg.lr;
  int64_t step = 0;
  std::ostringstream csv;
  csv << "epoch,split,loss\n";

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Shuffle derived from (seed, epoch): reproducible regardless of wall clock.
    std::vector<size_t> order(record_count);
    for (size_t i = 0; i < record_count; ++i) {
      order[i] = i;
    }
    Rng shuffle = derive_stream(cfg.seed, {hash_string("shuffle"), static_cast<uint64_t>(epoch)});
    for (size_t i = record_count; i > 1; --i) {
      std::swap(order[i - 1], order[shuffle.uniform_index(i)]);
    }

    double epoch_loss = 0.0;
    size_t done = 0;
    while (done < record_count) {
      const size_t batch = std::min<size_t>(cfg.batch_size, record_count - done);
      store.zero_grad();
      double batch_loss = 0.0;
      for (size_t b = 0; b < batch; ++b) {
        const size_t idx = order[done + b];
        Tape tape;
        int loss;
        if (mode == TrainMode::kPlacement) {
          Rng mask_rng = derive_stream(
            cfg.seed, {hash_string("mask"), static_cast<uint64_t>(epoch), idx});
          const MaskedExample ex = mask_regions(placement.records[idx], mask_rng);
          loss = placement_loss_graph(tape, store, result.model.cfg, ex);
        } else {
          const TrajectoryExample & ex = trajectory.records[idx];
          std::vector<float> feat(ex.features.size());
          for (size_t i = 0; i < ex.features.size(); ++i) {
            feat[i] = static_cast<float>(ex.features[i]);
          }
          const int features =
            tape.leaf(Tensor::from_rows(ex.region_count, kFeatureWidth, feat));
          loss = trajectory_loss_graph(tape, store, result.model.cfg, features, ex.ego_region,
                                       ex.gt)
                   .first;
        }
        const double value = tape.val(loss).data[0];
        if (!std::isfinite(value)) {
          throw DivergenceError("train: non-finite loss at epoch " + std::to_string(epoch));
        }
        batch_loss += value;
        tape.backward(loss);
      }
      store.scale_grad(1.0f / static_cast<float>(batch));
      if (cfg.grad_clip > 0.0) {
        double norm_sq = 0.0;
        for (const auto & [name, e] : store.entries()) {
          for (float g : e.grad.data) {
            norm_sq += static_cast<double>(g) * g;
          }
        }
        const double norm = std::sqrt(norm_sq);
        if (norm > cfg.grad_clip) {
          store.scale_grad(static_cast<float>(cfg.grad_clip / norm));
        }
      }
      adam_step(store, adam, ++step);
      epoch_loss += batch_loss;
      done += batch;
    }
    epoch_loss /= static_cast<double>(record_count);
    result.epoch_loss.push_back(epoch_loss);
    csv << epoch + 1 << ",train," << epoch_loss << "\n";
    log_info("epoch " + std::to_string(epoch + 1) + " loss " + std::to_string(epoch_loss));

    if (!cfg.checkpoint_path.empty()) {
      save_model(result.model, cfg.checkpoint_path);
      std::ofstream metrics(cfg.checkpoint_path + ".metrics.csv");
      metrics << csv.str();
    }
  }
  result.metrics_csv = csv.str();
  return result;
}

// ---------------------------------------------------------------------------
// synthetic corpora
// ---------------------------------------------------------------------------

namespace
{

LaneMap synthetic_map(const SyntheticSpec & spec)
{
  LaneMap map;
  const double half = 0.5 * spec.lane_length;
  int lane_no = 0;
  for (int i = 0; i < spec.straight_lanes; ++i) {
    Lane lane;
    lane.id = "lane-" + std::to_string(lane_no++);
    lane.type = LaneType::kCenter;
    const double y = (i - 0.5 * (spec.straight_lanes - 1)) * spec.lane_spacing;
    for (double x = -half; x < half + 1e-9; x += 10.0) {
      lane.polyline.push_back(Vec2{std::min(x, half), y});
    }
    if (lane.polyline.size() < 2) {
      lane.polyline = {Vec2{-half, y}, Vec2{half, y}};
    }
    map.lanes.push_back(std::move(lane));
  }
  for (int i = 0; i < spec.curved_lanes; ++i) {
    Lane lane;
    lane.id = "lane-" + std::to_string(lane_no++);
    lane.type = LaneType::kCenter;
    const double radius = spec.curve_radius + i * spec.lane_spacing;
    const double span = spec.lane_length / radius;  // radians of arc
    const int segments = std::max(2, static_cast<int>(spec.lane_length / 5.0));
    for (int s = 0; s <= segments; ++s) {
      const double a = -0.5 * span + span * s / segments;
      lane.polyline.push_back(
        Vec2{radius * std::sin(a), -radius * (1.0 - std::cos(a)) - 2.0 * spec.lane_spacing});
    }
    map.lanes.push_back(std::move(lane));
  }
  return map;
}

struct Placed
{
  int lane = 0;
  double arc = 0.0;
  double speed = 0.0;
  Vec2 position;
  double heading = 0.0;
  double lateral0 = 0.0;       // initial centerline offset, decays to zero
  double heading_tilt = 0.0;   // initial heading perturbation
};

bool lane_bound(SyntheticSpec::Rule rule)
{
  return rule == SyntheticSpec::Rule::kLaneFollow || rule == SyntheticSpec::Rule::kFollowLead;
}

}  // namespace

Scenario make_synthetic_scenario(const SyntheticSpec & spec, uint64_t seed)
{
  Rng rng = derive_stream(seed, {hash_string("synthetic")});
  Scenario s;
  s.map = synthetic_map(spec);
  s.dt = spec.dt;
  s.horizon = std::max(1, spec.steps);

  const std::vector<Region> regions = chunk_lanes(s.map);
  std::vector<Placed> placed;

  if (spec.rule == SyntheticSpec::Rule::kFollowLead) {
    // One slow leader ahead of one fast follower per lane; follower first so
    // the ego (track 0) is the reactive vehicle.
    for (size_t lane = 0; lane < s.map.lanes.size(); ++lane) {
      const double lane_len = polyline_length(s.map.lanes[lane].polyline);
      const double follow_arc = 5.0 + rng.uniform(0.0, 10.0);
      const double gap = 22.0 + rng.uniform(0.0, 14.0);
      Placed follower;
      follower.lane = static_cast<int>(lane);
      follower.arc = follow_arc;
      follower.speed = spec.follow_speed + rng.uniform(-1.0, 1.0);
      placed.push_back(follower);
      Placed leader;
      leader.lane = static_cast<int>(lane);
      leader.arc = std::min(follow_arc + gap, lane_len - 1.0);
      leader.speed = spec.lead_speed + rng.uniform(-1.0, 1.0);
      placed.push_back(leader);
    }
  } else {
    // Fixed local pose inside `vehicles` distinct regions.
    std::vector<int> pool(regions.size());
    for (size_t i = 0; i < pool.size(); ++i) {
      pool[i] = static_cast<int>(i);
    }
    const int count = std::min<int>(spec.vehicles, static_cast<int>(pool.size()));
    for (int i = 0; i < count; ++i) {
      const int j = i + static_cast<int>(rng.uniform_index(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    // Lane-follow keeps one speed per lane so same-lane vehicles never close
    // on each other; the other rules draw per vehicle.
    std::vector<double> lane_speed(s.map.lanes.size());
    for (double & v : lane_speed) {
      v = spec.speed + (spec.speed_jitter > 0.0
                          ? rng.uniform(-spec.speed_jitter, spec.speed_jitter)
                          : 0.0);
    }
    for (int i = 0; i < count; ++i) {
      const Region & r = regions[pool[i]];
      int lane_index = 0;
      for (size_t l = 0; l < s.map.lanes.size(); ++l) {
        if (s.map.lanes[l].id == r.lane_id) {
          lane_index = static_cast<int>(l);
          break;
        }
      }
      Placed p;
      p.lane = lane_index;
      // arc of the region start within its lane, plus the fixed local y
      double arc = 0.0;
      for (const Region & other : regions) {
        if (other.lane_id == r.lane_id && other.index < r.index) {
          arc += (other.end - other.start).norm();
        }
      }
      p.arc = arc + spec.local_y;
      p.speed = spec.rule == SyntheticSpec::Rule::kLaneFollow
                  ? lane_speed[lane_index]
                  : spec.speed + (spec.speed_jitter > 0.0
                                    ? rng.uniform(-spec.speed_jitter, spec.speed_jitter)
                                    : 0.0);
      placed.push_back(p);
    }
  }

  // Initial-state perturbations (lane-bound rules recover from them).
  for (Placed & p : placed) {
    if (spec.heading_jitter > 0.0) {
      p.heading_tilt = rng.uniform(-spec.heading_jitter, spec.heading_jitter);
    }
    if (spec.lateral_jitter > 0.0) {
      p.lateral0 = rng.uniform(-spec.lateral_jitter, spec.lateral_jitter);
    }
  }

  // Leader brake step per lane (kFollowLead): unpredictable from the snapshot.
  std::vector<int> brake_step(placed.size(), -1);
  if (spec.rule == SyntheticSpec::Rule::kFollowLead) {
    for (size_t i = 1; i < placed.size(); i += 2) {
      brake_step[i] = spec.lead_brake_from +
                      static_cast<int>(rng.uniform_index(
                        std::max(1, spec.lead_brake_to - spec.lead_brake_from)));
    }
  }

  // The perturbation fades over ~2 s of the ground-truth future.
  auto lateral_at = [&](const Placed & p, int t) {
    return spec.local_x + p.lateral0 * std::max(0.0, 1.0 - t / 20.0);
  };
  auto lane_pose = [&](const Placed & p, int t, double & heading_out) {
    const Polyline & line = s.map.lanes[p.lane].polyline;
    const ArcPoint ap = polyline_at_arc(line, p.arc);
    const Vec2 lateral{ap.tangent.y, -ap.tangent.x};
    heading_out = std::atan2(ap.tangent.y, ap.tangent.x);
    return ap.position + lateral * lateral_at(p, t);
  };

  // Initial poses.
  for (Placed & p : placed) {
    if (lane_bound(spec.rule)) {
      double tangent_heading;
      p.position = lane_pose(p, 0, tangent_heading);
      p.heading = wrap_angle(tangent_heading + spec.heading_offset + p.heading_tilt);
    } else {
      const Polyline & line = s.map.lanes[p.lane].polyline;
      const ArcPoint ap = polyline_at_arc(line, p.arc);
      const Vec2 lateral{ap.tangent.y, -ap.tangent.x};
      p.position = ap.position + lateral * spec.local_x;
      p.heading = wrap_angle(std::atan2(ap.tangent.y, ap.tangent.x) + spec.heading_offset +
                             p.heading_tilt);
    }
  }

  // Roll the analytic trajectory rules forward.
  std::vector<VehicleTrack> tracks(placed.size());
  std::vector<Placed> state = placed;
  for (int t = 0; t < s.horizon; ++t) {
    for (size_t i = 0; i < state.size(); ++i) {
      VehicleState st;
      st.x = state[i].position.x;
      st.y = state[i].position.y;
      st.heading = state[i].heading;
      st.speed = state[i].speed;
      st.length = spec.length;
      st.width = spec.width;
      st.valid = true;
      tracks[i].states.push_back(st);
    }
    if (t + 1 >= s.horizon) {
      break;
    }
    for (size_t i = 0; i < state.size(); ++i) {
      Placed & p = state[i];
      switch (spec.rule) {
        case SyntheticSpec::Rule::kConstantVelocity:
          p.position = p.position + Vec2{std::cos(p.heading), std::sin(p.heading)} *
                                      (p.speed * spec.dt);
          break;
        case SyntheticSpec::Rule::kConstantTurn:
          p.position = p.position + Vec2{std::cos(p.heading), std::sin(p.heading)} *
                                      (p.speed * spec.dt);
          p.heading = wrap_angle(p.heading + spec.turn_rate * spec.dt);
          break;
        case SyntheticSpec::Rule::kLaneFollow:
        case SyntheticSpec::Rule::kFollowLead: {
          if (spec.rule == SyntheticSpec::Rule::kFollowLead) {
            const bool is_leader = (i % 2) == 1;
            if (is_leader) {
              if (brake_step[i] >= 0 && t >= brake_step[i]) {
                p.speed = std::max(0.0, p.speed - spec.brake_decel * spec.dt);
              }
            } else {
              const Placed & lead = state[i + 1];
              const double gap = lead.arc - p.arc - spec.length;
              if (gap < spec.brake_gap && p.speed > lead.speed) {
                p.speed = std::max(lead.speed, p.speed - spec.brake_decel * spec.dt);
              }
            }
          }
          p.arc += p.speed * spec.dt;
          double tangent_heading;
          p.position = lane_pose(p, t + 1, tangent_heading);
          p.heading = tangent_heading;
          break;
        }
      }
    }
  }

  // Lane-bound rules: headings along the realized path, matching how rolled
  // scenarios reconstruct them.
  if (lane_bound(spec.rule)) {
    for (VehicleTrack & track : tracks) {
      for (size_t t = 1; t < track.states.size(); ++t) {
        const Vec2 step{track.states[t].x - track.states[t - 1].x,
                        track.states[t].y - track.states[t - 1].y};
        track.states[t].heading =
          step.norm() < 1e-3 ? track.states[t - 1].heading : std::atan2(step.y, step.x);
      }
    }
  }

  for (size_t i = 0; i < tracks.size(); ++i) {
    tracks[i].id = "v" + std::to_string(i);
  }
  s.tracks = std::move(tracks);
  s.ego_id = s.tracks.empty() ? "" : s.tracks.front().id;
  return s;
}

int make_synthetic(const SyntheticSpec & spec, uint64_t seed, const std::string & out_dir)
{
  fs::create_directories(out_dir);
  for (int i = 0; i < spec.scenario_count; ++i) {
    const Scenario s = make_synthetic_scenario(spec, hash_combine(seed, i));
    char name[64];
    std::snprintf(name, sizeof(name), "scenario_%04d.json", i);
    std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
    if (!out) {
      throw Error("cannot write under '" + out_dir + "'");
    }
    const std::string bytes = write_scenario(s);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  return spec.scenario_count;
}

SyntheticSpec synthetic_spec_from_json_file(const std::string & path)
{
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception & e) {
    throw SchemaError(std::string("synthetic spec: ") + e.what());
  }
  SyntheticSpec spec;
  spec.scenario_count = doc.value("scenario_count", spec.scenario_count);
  spec.steps = doc.value("steps", spec.steps);
  spec.dt = doc.value("dt", spec.dt);
  spec.straight_lanes = doc.value("straight_lanes", spec.straight_lanes);
  spec.curved_lanes = doc.value("curved_lanes", spec.curved_lanes);
  spec.lane_length = doc.value("lane_length", spec.lane_length);
  spec.lane_spacing = doc.value("lane_spacing", spec.lane_spacing);
  spec.curve_radius = doc.value("curve_radius", spec.curve_radius);
  spec.vehicles = doc.value("vehicles", spec.vehicles);
  spec.local_x = doc.value("local_x", spec.local_x);
  spec.local_y = doc.value("local_y", spec.local_y);
  spec.heading_offset = doc.value("heading_offset", spec.heading_offset);
  spec.speed = doc.value("speed", spec.speed);
  spec.speed_jitter = doc.value("speed_jitter", spec.speed_jitter);
  spec.length = doc.value("length", spec.length);
  spec.width = doc.value("width", spec.width);
  spec.heading_jitter = doc.value("heading_jitter", spec.heading_jitter);
  spec.lateral_jitter = doc.value("lateral_jitter", spec.lateral_jitter);
  const std::string rule = doc.value("rule", std::string("constant_velocity"));
  if (rule == "constant_velocity") {
    spec.rule = SyntheticSpec::Rule::kConstantVelocity;
  } else if (rule == "constant_turn") {
    spec.rule = SyntheticSpec::Rule::kConstantTurn;
  } else if (rule == "lane_follow") {
    spec.rule = SyntheticSpec::Rule::kLaneFollow;
  } else if (rule == "follow_lead") {
    spec.rule = SyntheticSpec::Rule::kFollowLead;
  } else {
    throw ValueError("synthetic spec: unknown rule '" + rule + "'");
  }
  spec.turn_rate = doc.value("turn_rate", spec.turn_rate);
  spec.brake_gap = doc.value("brake_gap", spec.brake_gap);
  spec.brake_decel = doc.value("brake_decel", spec.brake_decel);
  spec.lead_speed = doc.value("lead_speed", spec.lead_speed);
  spec.follow_speed = doc.value("follow_speed", spec.follow_speed);
  spec.lead_brake_from = doc.value("lead_brake_from", spec.lead_brake_from);
  spec.lead_brake_to = doc.value("lead_brake_to", spec.lead_brake_to);
  return spec;
}

}  // namespace tgen
