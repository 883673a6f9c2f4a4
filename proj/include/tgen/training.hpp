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

#ifndef TGEN__TRAINING_HPP_
#define TGEN__TRAINING_HPP_

#include <string>
#include <vector>

#include "tgen/model.hpp"
#include "tgen/scenario.hpp"
#include "tgen/trajectory.hpp"
#include "tgen/vectorize.hpp"

namespace tgen
{

struct TrainConfig
{
  int epochs = 30;
  double lr = 3e-4;
  int batch_size = 32;
  uint64_t seed = 0;
  double grad_clip = 10.0;         // global gradient-norm cap; <= 0 disables
  ModelConfig model;
  std::string corpus_dir;
  std::string checkpoint_path;     // weights written here every epoch
  std::string init_weights;        // optional warm start
  double snapshot_interval = 2.0;  // placement mode

  static TrainConfig from_json_file(const std::string & path);
};

enum class TrainMode { kPlacement, kTrajectory };

struct DatasetReport
{
  int files = 0;
  int skipped_files = 0;
  int records = 0;
  int skipped_records = 0;
};

struct PlacementDataset
{
  // Full (unmasked) per-snapshot features; masking happens per visit.
  std::vector<std::vector<VectorFeature>> records;
  DatasetReport report;
};

struct TrajectoryDataset
{
  std::vector<TrajectoryExample> records;
  DatasetReport report;
};

/// Reads every *.json scenario under `dir` (sorted by filename) and shapes it
/// for the requested decoder. Unreadable files are skipped and counted.
PlacementDataset build_placement_dataset(const std::string & dir, double interval = 2.0);
TrajectoryDataset build_trajectory_dataset(const std::string & dir, int traj_len = 90,
                                           double dt = 0.1);

struct TrainResult
{
  ModelParams model;
  std::vector<double> epoch_loss;
  std::string metrics_csv;  // epoch,split,loss lines
};

/// Deterministic training loop: data order derived from (seed, epoch), Adam
/// steps per batch, checkpoint written every epoch when a path is set. Throws
/// DivergenceError when the loss stops being finite, EmptyError on an empty
/// dataset.
TrainResult train(const TrainConfig & cfg, TrainMode mode);

// ---------------------------------------------------------------------------
// Synthetic corpora with analytically known statistics
// ---------------------------------------------------------------------------

struct SyntheticSpec
{
  int scenario_count = 100;
  int steps = 1;       // T
  double dt = 0.1;

  // map template
  int straight_lanes = 3;
  int curved_lanes = 0;
  double lane_length = 100.0;
  double lane_spacing = 4.0;
  double curve_radius = 80.0;

  // placement rule: fixed local pose, jittered speed
  int vehicles = 8;
  double local_x = 0.0;
  double local_y = 2.5;
  double heading_offset = 0.0;
  double speed = 10.0;
  double speed_jitter = 0.0;
  double length = 4.6;
  double width = 2.0;

  // Initial-state perturbations for the lane-bound rules: the ground-truth
  // future recovers the lane, so models trained on these corpora learn to
  // correct the pose noise that re-anchored rollouts feed back.
  double heading_jitter = 0.0;   // rad, initial heading only
  double lateral_jitter = 0.0;   // m, decays to the centerline over ~2 s

  enum class Rule { kConstantVelocity, kConstantTurn, kLaneFollow, kFollowLead };
  Rule rule = Rule::kConstantVelocity;
  double turn_rate = 0.0;  // rad/s, kConstantTurn

  // kFollowLead: a slow leader ahead of a fast follower per lane; the follower
  // brakes when the bumper gap closes below brake_gap. The leader itself
  // brakes to a stop at a random step, so futures are not predictable from
  // the initial snapshot.
  double brake_gap = 20.0;
  double brake_decel = 4.0;
  double lead_speed = 4.0;
  double follow_speed = 12.0;
  int lead_brake_from = 10;   // leader brake step drawn from [from, to)
  int lead_brake_to = 60;
};

Scenario make_synthetic_scenario(const SyntheticSpec & spec, uint64_t seed);

/// Writes scenario_%04d.json files under `out_dir`; returns the file count.
int make_synthetic(const SyntheticSpec & spec, uint64_t seed, const std::string & out_dir);

SyntheticSpec synthetic_spec_from_json_file(const std::string & path);

}  // namespace tgen

#endif  // TGEN__TRAINING_HPP_
