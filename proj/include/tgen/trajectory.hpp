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

#ifndef TGEN__TRAJECTORY_HPP_
#define TGEN__TRAJECTORY_HPP_

#include <string>
#include <utility>
#include <vector>

#include "tgen/encoder.hpp"
#include "tgen/rng.hpp"
#include "tgen/scenario.hpp"
#include "tgen/vectorize.hpp"

namespace tgen
{

/// K candidate L-step trajectories for one vehicle, in its own frame (origin
/// at the vehicle, +y along its heading), with mode probabilities.
struct TrajectoryModes
{
  int mode_count = 0;  // K
  int steps = 0;       // L
  std::vector<double> waypoints;  // K * L * 2, row-major (mode, step, xy)
  std::vector<double> probs;      // K, sums to 1

  Vec2 waypoint(int mode, int step) const
  {
    const size_t base = (static_cast<size_t>(mode) * steps + step) * 2;
    return Vec2{waypoints[base], waypoints[base + 1]};
  }
};

struct RolloutConfig
{
  int horizon_steps = 90;   // H; the output scenario has H+1 steps
  int segment_steps = 90;   // l; waypoints committed per decode
  double dt = 0.1;
};

struct RolloutStats
{
  int64_t decodes = 0;
};

// ---------------------------------------------------------------------------
// Decode graph (templated; shared by training and inference)
// ---------------------------------------------------------------------------

/// Head decode from per-region embeddings: input is (v'_ego ++ c'), output K
/// modes. The head emits per-step displacements which are accumulated into
/// absolute waypoints. Returns (waypoints node K x 2L, mode logits node K x 1).
template <class T, class Store>
std::pair<int, int> traj_head_graph(TapeT<T> & tape, Store & store, const ModelConfig & cfg,
                                    int v_node, int c_node, int ego_region)
{
  const int k = cfg.mixture_components;
  const int len = cfg.traj_len;
  const int v_ego = tape.gather_rows(v_node, {ego_region});
  const int joint = tape.concat_cols(v_ego, c_node);
  const int raw = mlp_apply(tape, store, "head.traj", cfg.traj_spec(), joint);
  const int modes = tape.reshape(raw, k, 2 * len + 1);
  const int deltas = tape.slice_cols(modes, 0, 2 * len);
  const int logits = tape.slice_cols(modes, 2 * len, 2 * len + 1);

  // Prefix-sum matrix: waypoint t accumulates displacements 0..t (x and y
  // interleaved).
  TensorT<T> acc = TensorT<T>::zeros(2 * len, 2 * len);
  for (int s = 0; s < len; ++s) {
    for (int t = s; t < len; ++t) {
      acc.at(2 * s, 2 * t) = T(1);
      acc.at(2 * s + 1, 2 * t + 1) = T(1);
    }
  }
  const int waypoints = tape.matmul(deltas, tape.leaf(std::move(acc)));
  return {waypoints, logits};
}

/// Min-of-K loss graph: squared error of the closest mode plus cross entropy
/// of the mode logits toward that mode. `gt` is the flattened (x, y) ground
/// truth of length 2L in the vehicle frame. Returns (loss node, chosen mode).
template <class T, class Store>
std::pair<int, int> trajectory_loss_graph(TapeT<T> & tape, Store & store,
                                          const ModelConfig & cfg, int features, int ego_region,
                                          const std::vector<double> & gt)
{
  const int len = cfg.traj_len;
  if (static_cast<int>(gt.size()) != 2 * len) {
    throw LengthError("trajectory_loss_graph: ground truth must hold L steps");
  }
  auto [v, c] = encode_context(tape, store, cfg, features);
  auto [waypoints, logits] = traj_head_graph(tape, store, cfg, v, c, ego_region);

  std::vector<T> gt_cast(gt.size());
  for (size_t i = 0; i < gt.size(); ++i) {
    gt_cast[i] = static_cast<T>(gt[i]);
  }
  const int gt_row = tape.leaf(TensorT<T>::from_rows(1, 2 * len, gt_cast));
  const int per_mode = tape.mean_rows(tape.square(tape.sub(waypoints, gt_row)));  // K x 1

  // Closest mode by value; ties go to the lowest index.
  const auto & mse = tape.val(per_mode);
  int best = 0;
  for (int i = 1; i < mse.rows(); ++i) {
    if (mse.at(i, 0) < mse.at(best, 0)) {
      best = i;
    }
  }
  const int mse_best = tape.gather_rows(per_mode, {best});
  const int lse = tape.logsumexp_rows(tape.reshape(logits, 1, cfg.mixture_components));
  const int ce = tape.sub(lse, tape.gather_rows(logits, {best}));
  return {tape.add(mse_best, ce), best};
}

// ---------------------------------------------------------------------------
// Value-side loss (independent of the tape; used by tests and evaluation)
// ---------------------------------------------------------------------------

/// Mean squared error of the closest mode plus -log prob of that mode.
double trajectory_loss(const TrajectoryModes & modes, const std::vector<Vec2> & gt);

// ---------------------------------------------------------------------------
// Inference
// ---------------------------------------------------------------------------

/// Scene re-expressed in one vehicle's frame, ready for the decoder: features,
/// the vehicle's region row, and (for training) the local-frame ground truth.
struct TrajectoryExample
{
  int region_count = 0;
  std::vector<double> features;  // region_count x 19
  int ego_region = -1;
  std::vector<double> gt;        // 2 * future size, flattened (x, y)
};

/// Builds the vehicle-frame example. The vehicle itself needs no validity
/// filter pass: when dropped by the filters it falls back to the nearest
/// region. Throws MissingVehicleError / EmptyError (no regions).
TrajectoryExample make_trajectory_example(const Snapshot & snap,
                                          const std::string & vehicle_id,
                                          const std::vector<Vec2> & future_world = {});

/// Re-expresses the scene in the vehicle's frame, encodes it, and decodes K
/// candidate trajectories. Throws MissingVehicleError when `vehicle_id` is not
/// in the snapshot.
TrajectoryModes decode_modes(const Snapshot & snap, const std::string & vehicle_id,
                             const ModelParams & model);

/// Categorical draw over mode probabilities.
int sample_mode(const TrajectoryModes & modes, Rng & rng);

/// Rolls every snapshot vehicle forward for `horizon_steps`, re-decoding every
/// `segment_steps` and committing only that prefix. Light states are held at
/// their snapshot values. The result has T = horizon_steps + 1 steps.
Scenario rollout(const Snapshot & snap, const RolloutConfig & config, const ModelParams & model,
                 uint64_t seed, RolloutStats * stats = nullptr);

/// Mixed replay/generation engine behind rollout, augment and inpaint. Each
/// track replays its logged states through `anchor` (step index of the last
/// authoritative state) and is generated beyond it. Tracks with anchor >=
/// horizon_steps replay fully.
struct RolloutTrack
{
  std::string id;
  std::vector<VehicleState> logged;  // padded/truncated to the target horizon
  int anchor = 0;
};

Scenario rollout_tracks(const LaneMap & map, const std::vector<RolloutTrack> & tracks,
                        const std::vector<std::pair<std::string, LightState>> & lights,
                        const std::string & ego_id, const RolloutConfig & config,
                        const ModelParams & model, uint64_t seed,
                        RolloutStats * stats = nullptr);

}  // namespace tgen

#endif  // TGEN__TRAJECTORY_HPP_
