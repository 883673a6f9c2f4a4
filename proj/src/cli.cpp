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

#include "tgen/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tgen/actuation.hpp"
#include "tgen/error.hpp"
#include "tgen/log.hpp"
#include "tgen/metrics.hpp"
#include "tgen/placement.hpp"
#include "tgen/render.hpp"
#include "tgen/scenario.hpp"
#include "tgen/training.hpp"
#include "tgen/trajectory.hpp"

namespace fs = std::filesystem;

namespace tgen::cli
{

namespace
{

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

void write_file(const std::string & path, const std::string & bytes)
{
  if (fs::path(path).has_parent_path()) {
    fs::create_directories(fs::path(path).parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write '" + path + "'");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Scenario load_scenario(const std::string & path)
{
  return parse_scenario(read_file(path)).scenario;
}

std::vector<std::string> scenario_files(const std::string & dir)
{
  std::vector<std::string> files;
  if (fs::is_regular_file(dir)) {
    files.push_back(dir);
    return files;
  }
  if (!fs::is_directory(dir)) {
    throw Error("'" + dir + "' is neither a file nor a directory");
  }
  for (const auto & entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

Snapshot snapshot_at(const Scenario & s, int timestep)
{
  Snapshot snap;
  snap.map = &s.map;
  snap.timestep = timestep;
  for (const Lane & lane : s.map.lanes) {
    snap.lights.emplace_back(lane.id, s.map.light_at(lane.id, timestep));
  }
  for (const VehicleTrack & track : s.tracks) {
    if (timestep < static_cast<int>(track.states.size()) && track.states[timestep].valid) {
      const VehicleState & st = track.states[timestep];
      snap.vehicles.push_back(
        PlacedVehicle{track.id, st.x, st.y, st.heading, st.speed, st.length, st.width});
    }
  }
  return snap;
}

Scenario snapshot_to_scenario(const Snapshot & snap, double dt, const std::string & ego)
{
  Scenario out;
  out.map = *snap.map;
  out.dt = dt;
  out.horizon = 1;
  out.map.traffic_lights.clear();
  for (const auto & [lane_id, state] : snap.lights) {
    if (state != LightState::kUnknown) {
      out.map.traffic_lights.push_back(TrafficLight{lane_id, {state}});
    }
  }
  for (const PlacedVehicle & v : snap.vehicles) {
    VehicleTrack track;
    track.id = v.id;
    VehicleState st;
    st.x = v.x;
    st.y = v.y;
    st.heading = v.heading;
    st.speed = v.speed;
    st.length = v.length;
    st.width = v.width;
    st.valid = true;
    track.states.push_back(st);
    out.tracks.push_back(std::move(track));
  }
  out.ego_id = out.tracks.empty() ? ego : out.tracks.front().id;
  return out;
}

int to_steps(double seconds, double dt)
{
  return std::max(0, static_cast<int>(std::lround(seconds / dt)));
}

struct CommonFlags
{
  std::string map_path;
  std::string scenario_path;
  std::string out_path;
  std::string weights_path;
  std::string config_path;
  std::string real_dir;
  std::string gen_dir;
  std::string heatmap;
  int num = 8;
  uint64_t seed = 0;
  double horizon = 9.0;
  double interval = 0.0;  // 0 = single decode (l = horizon)
  double iou_threshold = 0.1;
  double sigma = 1.0;
  int timestep = 0;
};

RolloutConfig rollout_config(const CommonFlags & flags, double dt)
{
  RolloutConfig cfg;
  cfg.dt = dt;
  cfg.horizon_steps = to_steps(flags.horizon, dt);
  cfg.segment_steps =
    flags.interval > 0.0 ? to_steps(flags.interval, dt) : std::max(1, cfg.horizon_steps);
  return cfg;
}

ModelParams load_weights_or_default(const std::string & path, uint64_t seed)
{
  if (!path.empty()) {
    return load_model(path);
  }
  log_info("no --weights given; using randomly initialized model");
  ModelParams model;
  ModelConfig cfg;
  cfg.embed_dim = 64;
  cfg.mixture_components = 3;
  cfg.head_hidden = {64};
  init_model_params(model, cfg, seed);
  return model;
}

int cmd_ingest(const CommonFlags & flags)
{
  int kept = 0, rejected = 0;
  for (const std::string & path : scenario_files(flags.scenario_path)) {
    Scenario s;
    try {
      s = load_scenario(path);
    } catch (const Error & e) {
      log_error("skipping '" + path + "': " + e.what());
      ++rejected;
      continue;
    }
    const auto cropped = filter_and_crop(s);
    if (!cropped.has_value()) {
      ++rejected;
      continue;
    }
    write_file((fs::path(flags.out_path) / fs::path(path).filename()).string(),
               write_scenario(*cropped));
    ++kept;
  }
  std::cout << "ingested " << kept << " scenario(s), rejected " << rejected << "\n";
  return 0;
}

int cmd_make_synthetic(const CommonFlags & flags)
{
  SyntheticSpec spec;
  if (!flags.config_path.empty()) {
    spec = synthetic_spec_from_json_file(flags.config_path);
  }
  const int files = make_synthetic(spec, flags.seed, flags.out_path);
  std::cout << "wrote " << files << " scenario(s) to " << flags.out_path << "\n";
  return 0;
}

int cmd_train(const CommonFlags & flags, TrainMode mode)
{
  TrainConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = TrainConfig::from_json_file(flags.config_path);
  }
  if (flags.seed != 0) {
    cfg.seed = flags.seed;
  }
  if (!flags.out_path.empty()) {
    cfg.checkpoint_path = flags.out_path;
  }
  const TrainResult result = train(cfg, mode);
  std::cout << "trained " << result.epoch_loss.size() << " epoch(s); final loss "
            << result.epoch_loss.back() << "\n";
  return 0;
}

int cmd_generate(const CommonFlags & flags)
{
  const Scenario source = load_scenario(flags.map_path);
  const ModelParams model = load_weights_or_default(flags.weights_path, flags.seed);
  const GenerationResult gen = generate_snapshot(source.map, flags.num, flags.seed, model);
  if (gen.exhausted) {
    log_error("placement exhausted; generated " + std::to_string(gen.snapshot.vehicles.size()) +
              " of " + std::to_string(flags.num) + " vehicles");
  }
  const RolloutConfig cfg = rollout_config(flags, source.dt);
  Scenario out;
  if (cfg.horizon_steps == 0) {
    out = snapshot_to_scenario(gen.snapshot, source.dt, source.ego_id);
  } else {
    out = rollout(gen.snapshot, cfg, model, flags.seed);
  }
  write_file(flags.out_path, write_scenario(out));
  return 0;
}

int cmd_augment(const CommonFlags & flags)
{
  const Scenario source = load_scenario(flags.scenario_path);
  const ModelParams model = load_weights_or_default(flags.weights_path, flags.seed);
  const Snapshot existing = snapshot_at(source, flags.timestep);
  const GenerationResult gen =
    generate_snapshot(source.map, flags.num, flags.seed, model, &existing);
  if (gen.exhausted) {
    log_error("placement exhausted; snapshot holds " +
              std::to_string(gen.snapshot.vehicles.size()) + " vehicles");
  }

  const RolloutConfig cfg = [&] {
    RolloutConfig c = rollout_config(flags, source.dt);
    if (flags.horizon <= 0.0) {
      c.horizon_steps = source.horizon - 1;
      c.segment_steps = flags.interval > 0.0 ? to_steps(flags.interval, source.dt)
                                             : std::max(1, c.horizon_steps);
    }
    return c;
  }();

  // Logged tracks replay; generated vehicles start at the snapshot step.
  std::vector<RolloutTrack> tracks;
  for (const VehicleTrack & track : source.tracks) {
    RolloutTrack rt;
    rt.id = track.id;
    rt.logged = track.states;
    rt.anchor = cfg.horizon_steps;  // full replay
    tracks.push_back(std::move(rt));
  }
  for (const PlacedVehicle & v : gen.snapshot.vehicles) {
    if (source.find_track(v.id) != nullptr) {
      continue;  // context vehicle, already replayed
    }
    RolloutTrack rt;
    rt.id = v.id;
    rt.anchor = flags.timestep;
    rt.logged.assign(flags.timestep + 1, VehicleState{});
    VehicleState st;
    st.x = v.x;
    st.y = v.y;
    st.heading = v.heading;
    st.speed = v.speed;
    st.length = v.length;
    st.width = v.width;
    st.valid = true;
    rt.logged[flags.timestep] = st;
    tracks.push_back(std::move(rt));
  }

  const Scenario out = rollout_tracks(source.map, tracks, existing.lights, source.ego_id, cfg,
                                      model, flags.seed);
  write_file(flags.out_path, write_scenario(out));
  return 0;
}

int cmd_inpaint(const CommonFlags & flags)
{
  const Scenario source = load_scenario(flags.scenario_path);
  const ModelParams model = load_weights_or_default(flags.weights_path, flags.seed);

  RolloutConfig cfg = rollout_config(flags, source.dt);
  if (flags.horizon <= 0.0) {
    cfg.horizon_steps = source.horizon - 1;
    cfg.segment_steps =
      flags.interval > 0.0 ? to_steps(flags.interval, source.dt) : std::max(1, cfg.horizon_steps);
  }

  // Each fragmented track continues from its last valid state.
  std::vector<RolloutTrack> tracks;
  for (const VehicleTrack & track : source.tracks) {
    const int last = track.last_valid();
    if (last < 0) {
      continue;
    }
    RolloutTrack rt;
    rt.id = track.id;
    rt.logged = track.states;
    rt.anchor = last;
    tracks.push_back(std::move(rt));
  }
  const Snapshot lights_source = snapshot_at(source, 0);
  const Scenario out = rollout_tracks(source.map, tracks, lights_source.lights, source.ego_id,
                                      cfg, model, flags.seed);
  write_file(flags.out_path, write_scenario(out));
  return 0;
}

int cmd_simulate(const CommonFlags & flags)
{
  const Scenario source = load_scenario(flags.scenario_path);
  const int horizon = flags.horizon > 0.0 ? to_steps(flags.horizon, source.dt) : -1;
  const Scenario out = simulate_scenario(source, IdmParams{}, horizon);
  write_file(flags.out_path, write_scenario(out));
  return 0;
}

std::vector<std::pair<Scenario, Scenario>> load_pairs(const std::string & real_dir,
                                                      const std::string & gen_dir)
{
  const std::vector<std::string> real_files = scenario_files(real_dir);
  const std::vector<std::string> gen_files = scenario_files(gen_dir);
  if (real_files.size() != gen_files.size()) {
    throw AlignError("evaluate: " + std::to_string(real_files.size()) + " real vs " +
                     std::to_string(gen_files.size()) + " generated file(s)");
  }
  std::vector<std::pair<Scenario, Scenario>> pairs;
  for (size_t i = 0; i < real_files.size(); ++i) {
    if (fs::path(real_files[i]).filename() != fs::path(gen_files[i]).filename()) {
      throw AlignError("evaluate: mismatched pair '" + real_files[i] + "' vs '" +
                       gen_files[i] + "'");
    }
    pairs.emplace_back(load_scenario(real_files[i]), load_scenario(gen_files[i]));
  }
  return pairs;
}

int cmd_evaluate(const CommonFlags & flags)
{
  const auto pairs = load_pairs(flags.real_dir, flags.gen_dir);
  std::vector<Snapshot> real, gen;
  // Snapshots borrow the scenario maps; keep the pair list alive throughout.
  for (const auto & [r, g] : pairs) {
    real.push_back(snapshot_at(r, 0));
    gen.push_back(snapshot_at(g, 0));
  }
  MmdConfig cfg;
  cfg.sigma = flags.sigma;
  const MmdReport report = scene_mmd_report(real, gen, cfg);
  std::cout << report.table();
  if (report.skipped > 0) {
    std::cout << "(skipped " << report.skipped << " empty pair(s))\n";
  }
  if (!flags.out_path.empty()) {
    write_file(flags.out_path, report.csv());
  }
  return 0;
}

int cmd_evaluate_traj(const CommonFlags & flags)
{
  const auto pairs = load_pairs(flags.real_dir, flags.gen_dir);
  double ade_sum = 0.0, fde_sum = 0.0, scr_sum = 0.0;
  int ade_count = 0;
  for (const auto & [real, gen] : pairs) {
    for (const VehicleTrack & track : gen.tracks) {
      const VehicleTrack * truth = real.find_track(track.id);
      if (truth == nullptr) {
        continue;
      }
      std::vector<Vec2> pred_pos, true_pos;
      const int steps = std::min(track.states.size(), truth->states.size());
      for (int t = 0; t < steps; ++t) {
        if (track.states[t].valid && truth->states[t].valid) {
          pred_pos.push_back(Vec2{track.states[t].x, track.states[t].y});
          true_pos.push_back(Vec2{truth->states[t].x, truth->states[t].y});
        }
      }
      if (pred_pos.empty()) {
        continue;
      }
      const auto [ade, fde] = ade_fde(pred_pos, true_pos);
      ade_sum += ade;
      fde_sum += fde;
      ++ade_count;
    }
    scr_sum += scr(gen, flags.iou_threshold);
  }
  if (ade_count == 0) {
    throw EmptyError("evaluate-traj: no comparable tracks");
  }
  std::cout << "ADE " << ade_sum / ade_count << " m, FDE " << fde_sum / ade_count << " m, SCR "
            << 100.0 * scr_sum / static_cast<double>(pairs.size()) << " %\n";
  return 0;
}

int cmd_render(const CommonFlags & flags)
{
  const Scenario scenario = load_scenario(flags.scenario_path);
  RenderOptions options;
  options.timestep = flags.timestep;
  options.show_trajectories = scenario.horizon > 1;
  if (!flags.heatmap.empty()) {
    if (flags.heatmap == "model") {
      const ModelParams model = load_weights_or_default(flags.weights_path, flags.seed);
      const Snapshot snap = snapshot_at(scenario, flags.timestep);
      const std::vector<Region> regions = chunk_lanes(scenario.map);
      const Assignment assigned = assign_vehicles(snap, regions);
      const PlacementEval eval = eval_placement(model, feature_matrix(assigned.features),
                                                static_cast<int>(regions.size()));
      for (int i = 0; i < eval.logits.rows(); ++i) {
        options.heatmap.push_back(eval.logits.at(i, 0));
      }
    } else {
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(read_file(flags.heatmap));
      } catch (const nlohmann::json::exception & e) {
        throw SchemaError(std::string("heatmap file: ") + e.what());
      }
      for (const auto & v : doc) {
        options.heatmap.push_back(v.get<double>());
      }
    }
  }
  write_file(flags.out_path, render_svg(scenario, options));
  return 0;
}

}  // namespace

int run(const std::vector<std::string> & args)
{
  CLI::App app{"traffic scenario generation toolkit"};
  app.require_subcommand(1);
  CommonFlags flags;

  auto * ingest = app.add_subcommand("ingest", "validate, filter and crop scenario files");
  ingest->add_option("--scenario", flags.scenario_path, "scenario file or directory")
    ->required();
  ingest->add_option("--out", flags.out_path, "output directory")->required();

  auto * synth = app.add_subcommand("make-synthetic", "write a synthetic corpus");
  synth->add_option("--config", flags.config_path, "synthetic spec (json)");
  synth->add_option("--seed", flags.seed, "rng seed");
  synth->add_option("--out", flags.out_path, "output directory")->required();

  auto * train_p = app.add_subcommand("train-placement", "train the placement decoder");
  train_p->add_option("--config", flags.config_path, "train config (json)");
  train_p->add_option("--seed", flags.seed, "seed override");
  train_p->add_option("--out", flags.out_path, "checkpoint path override");

  auto * train_t = app.add_subcommand("train-trajectory", "train the trajectory decoder");
  train_t->add_option("--config", flags.config_path, "train config (json)");
  train_t->add_option("--seed", flags.seed, "seed override");
  train_t->add_option("--out", flags.out_path, "checkpoint path override");

  auto * generate = app.add_subcommand("generate", "sample a scenario onto a map");
  generate->add_option("--map", flags.map_path, "map-bearing scenario file")->required();
  generate->add_option("--num", flags.num, "target vehicle count")->required();
  generate->add_option("--seed", flags.seed, "rng seed");
  generate->add_option("--out", flags.out_path, "output scenario file")->required();
  generate->add_option("--weights", flags.weights_path, "model weights");
  generate->add_option("--horizon", flags.horizon, "rollout seconds (0 = snapshot only)");
  generate->add_option("--interval", flags.interval, "re-sampling interval seconds");

  auto * augment = app.add_subcommand("augment", "add vehicles to an existing scenario");
  augment->add_option("--scenario", flags.scenario_path, "input scenario")->required();
  augment->add_option("--num", flags.num, "target total vehicle count")->required();
  augment->add_option("--seed", flags.seed, "rng seed");
  augment->add_option("--out", flags.out_path, "output scenario file")->required();
  augment->add_option("--weights", flags.weights_path, "model weights");
  augment->add_option("--horizon", flags.horizon, "rollout seconds (0 = source horizon)");
  augment->add_option("--interval", flags.interval, "re-sampling interval seconds");
  augment->add_option("--timestep", flags.timestep, "snapshot step to augment");
  augment->get_option("--horizon")->default_val(0.0);

  auto * inpaint = app.add_subcommand("inpaint", "extend fragmented trajectories");
  inpaint->add_option("--scenario", flags.scenario_path, "input scenario")->required();
  inpaint->add_option("--seed", flags.seed, "rng seed");
  inpaint->add_option("--out", flags.out_path, "output scenario file")->required();
  inpaint->add_option("--weights", flags.weights_path, "model weights");
  inpaint->add_option("--horizon", flags.horizon, "target seconds (0 = source horizon)");
  inpaint->add_option("--interval", flags.interval, "re-sampling interval seconds");
  inpaint->get_option("--horizon")->default_val(0.0);

  auto * simulate = app.add_subcommand("simulate", "re-simulate tracks with IDM control");
  simulate->add_option("--scenario", flags.scenario_path, "input scenario")->required();
  simulate->add_option("--out", flags.out_path, "output scenario file")->required();
  simulate->add_option("--horizon", flags.horizon, "simulated seconds (0 = source horizon)");
  simulate->get_option("--horizon")->default_val(0.0);

  auto * evaluate = app.add_subcommand("evaluate", "attribute MMD between two corpora");
  evaluate->add_option("--real", flags.real_dir, "reference corpus")->required();
  evaluate->add_option("--gen", flags.gen_dir, "generated corpus")->required();
  evaluate->add_option("--sigma", flags.sigma, "kernel bandwidth");
  evaluate->add_option("--out", flags.out_path, "write the CSV report here");

  auto * evaluate_traj = app.add_subcommand("evaluate-traj", "ADE/FDE and collision rate");
  evaluate_traj->add_option("--real", flags.real_dir, "reference corpus")->required();
  evaluate_traj->add_option("--gen", flags.gen_dir, "generated corpus")->required();
  evaluate_traj->add_option("--iou-threshold", flags.iou_threshold, "collision IOU threshold");

  auto * render = app.add_subcommand("render", "render a scenario to SVG");
  render->add_option("--scenario", flags.scenario_path, "input scenario")->required();
  render->add_option("--out", flags.out_path, "output SVG file")->required();
  render->add_option("--timestep", flags.timestep, "timestep to draw");
  render->add_option("--heatmap", flags.heatmap, "region weights json, or 'model'");
  render->add_option("--weights", flags.weights_path, "model weights (heatmap=model)");
  render->add_option("--seed", flags.seed, "seed for the fallback model");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError & e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);  // --help
      return 0;
    }
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    if (app.got_subcommand(ingest)) return cmd_ingest(flags);
    if (app.got_subcommand(synth)) return cmd_make_synthetic(flags);
    if (app.got_subcommand(train_p)) return cmd_train(flags, TrainMode::kPlacement);
    if (app.got_subcommand(train_t)) return cmd_train(flags, TrainMode::kTrajectory);
    if (app.got_subcommand(generate)) return cmd_generate(flags);
    if (app.got_subcommand(augment)) return cmd_augment(flags);
    if (app.got_subcommand(inpaint)) return cmd_inpaint(flags);
    if (app.got_subcommand(simulate)) return cmd_simulate(flags);
    if (app.got_subcommand(evaluate)) return cmd_evaluate(flags);
    if (app.got_subcommand(evaluate_traj)) return cmd_evaluate_traj(flags);
    if (app.got_subcommand(render)) return cmd_render(flags);
  } catch (const Error & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace tgen::cli
