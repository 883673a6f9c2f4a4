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

#include "tgen/placement.hpp"

#include <algorithm>
#include <cmath>

#include "tgen/error.hpp"
#include "tgen/log.hpp"

namespace tgen
{

MaskedExample mask_regions(const std::vector<VectorFeature> & features, Rng & rng)
{
  std::vector<int> occupied;
  for (size_t i = 0; i < features.size(); ++i) {
    if (features[i].occupied) {
      occupied.push_back(static_cast<int>(i));
    }
  }
  if (occupied.empty()) {
    throw EmptyError("mask_regions: no occupied region");
  }

  // Mask count uniform in {1, ..., #occupied}; subset by partial shuffle.
  const int count = 1 + static_cast<int>(rng.uniform_index(occupied.size()));
  for (int i = 0; i < count; ++i) {
    const int j = i + static_cast<int>(rng.uniform_index(occupied.size() - i));
    std::swap(occupied[i], occupied[j]);
  }
  std::vector<int> masked(occupied.begin(), occupied.begin() + count);
  std::sort(masked.begin(), masked.end());

  MaskedExample ex;
  ex.region_count = static_cast<int>(features.size());
  ex.features = feature_matrix(features);
  ex.occupancy.resize(features.size());
  for (size_t i = 0; i < features.size(); ++i) {
    ex.occupancy[i] = features[i].occupied ? 1.0 : 0.0;
  }
  ex.masked = masked;
  for (int idx : masked) {
    const VectorFeature & f = features[idx];
    ex.q.push_back(f.q.x);
    ex.q.push_back(f.q.y);
    ex.h.push_back(f.h);
    ex.vel.push_back(f.vel);
    ex.bbox.push_back(f.bbox_length);
    ex.bbox.push_back(f.bbox_width);
    // zero the vehicle part of the input row
    double * row = ex.features.data() + static_cast<size_t>(idx) * kFeatureWidth;
    std::fill(row + kVehiclePartOffset, row + kFeatureWidth, 0.0);
  }
  return ex;
}

PlacementEval eval_placement(const ModelParams & model, const std::vector<double> & features,
                             int region_count)
{
  std::vector<float> feat(features.size());
  for (size_t i = 0; i < features.size(); ++i) {
    feat[i] = static_cast<float>(features[i]);
  }
  Tape tape;
  const ParamStore & store = model.store;
  const int input = tape.leaf(Tensor::from_rows(region_count, kFeatureWidth, feat));
  auto [v, c] = encode_context(tape, store, model.cfg, input);
  (void)c;
  PlacementEval out;
  out.logits = tape.val(placement_logits_graph(tape, store, model.cfg, v));
  out.raw_pos = tape.val(mlp_apply(tape, store, "head.pos", model.cfg.bivariate_spec(), v));
  out.raw_heading =
    tape.val(mlp_apply(tape, store, "head.heading", model.cfg.univariate_spec(), v));
  out.raw_speed =
    tape.val(mlp_apply(tape, store, "head.speed", model.cfg.univariate_spec(), v));
  out.raw_size = tape.val(mlp_apply(tape, store, "head.size", model.cfg.bivariate_spec(), v));
  return out;
}

namespace
{

GmmParams row_gmm(const Tensor & raw, int row, int k, int dim)
{
  const int stride = dim == 1 ? 3 : 6;
  std::vector<double> vals(static_cast<size_t>(k) * stride);
  for (int i = 0; i < k * stride; ++i) {
    vals[i] = raw.at(row, i);
  }
  return GmmParams::from_raw(vals.data(), k, dim);
}

}  // namespace

SampledVehicle sample_vehicle(const PlacementEval & eval, const std::vector<Region> & regions,
                              std::vector<int> & candidates,
                              const std::vector<ObbBox> & existing, Rng & rng,
                              const std::string & id)
{
  const int k_mix = eval.raw_heading.cols() / 3;
  while (!candidates.empty()) {
    // Softmax over the candidate set only.
    double mx = -std::numeric_limits<double>::infinity();
    for (int c : candidates) {
      mx = std::max(mx, static_cast<double>(eval.logits.at(c, 0)));
    }
    std::vector<double> probs(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i) {
      probs[i] = std::exp(static_cast<double>(eval.logits.at(candidates[i], 0)) - mx);
    }
    const size_t pick = static_cast<size_t>(rng.categorical(probs));
    const int region_index = candidates[pick];
    const Region & region = regions[region_index];
    const LocalFrame frame = LocalFrame::from_region(region);

    const GmmParams pos = row_gmm(eval.raw_pos, region_index, k_mix, 2);
    const GmmParams heading = row_gmm(eval.raw_heading, region_index, k_mix, 1);
    const GmmParams speed = row_gmm(eval.raw_speed, region_index, k_mix, 1);
    const GmmParams size = row_gmm(eval.raw_size, region_index, k_mix, 2);

    for (int attempt = 0; attempt < kMaxAttributeResamples; ++attempt) {
      double q[2], h, vel, bbox[2];
      gmm_sample(pos, rng, q);
      gmm_sample(heading, rng, &h);
      gmm_sample(speed, rng, &vel);
      gmm_sample(size, rng, bbox);

      // Region rectangle bound and the heading validity filter.
      if (std::abs(q[0]) > kRegionHalfWidth || q[1] < -kRegionMargin ||
          q[1] > region.chord() + kRegionMargin || std::abs(h) > kMaxHeadingOffset) {
        continue;
      }

      PlacedVehicle v;
      v.id = id;
      v.speed = std::max(0.0, vel);
      v.length = std::clamp(bbox[0], kMinVehicleLength, kMaxVehicleLength);
      v.width = std::clamp(bbox[1], kMinVehicleWidth, kMaxVehicleWidth);
      Vec2 world;
      double world_heading;
      to_world(frame, LocalPose{Vec2{q[0], q[1]}, h}, world, world_heading);
      v.x = world.x;
      v.y = world.y;
      v.heading = world_heading;

      const ObbBox box{Vec2{v.x, v.y}, v.heading, v.length, v.width};
      bool overlaps = false;
      for (const ObbBox & other : existing) {
        if (obb_intersection_area(box, other) > 0.0) {
          overlaps = true;
          break;
        }
      }
      if (overlaps) {
        continue;
      }
      return SampledVehicle{region_index, v};
    }
    // Region failed every attribute draw; drop it and redraw the region.
    candidates.erase(candidates.begin() + pick);
    log_debug("placement: abandoning region " + std::to_string(region_index));
  }
  throw ExhaustedError("sample_vehicle: no candidate region left");
}

GenerationResult generate_snapshot(const LaneMap & map, int n, uint64_t seed,
                                   const ModelParams & model, const Snapshot * existing)
{
  GenerationResult result;
  Snapshot & snap = result.snapshot;
  if (existing != nullptr) {
    snap = *existing;
  } else {
    snap.timestep = 0;
  }
  snap.map = &map;
  if (snap.lights.empty()) {
    for (const Lane & lane : map.lanes) {
      snap.lights.emplace_back(lane.id, map.light_at(lane.id, snap.timestep));
    }
  }

  const std::vector<Region> regions = chunk_lanes(map);
  Rng rng = derive_stream(seed, {hash_string("placement")});

  std::vector<ObbBox> boxes;
  for (const PlacedVehicle & v : snap.vehicles) {
    boxes.push_back(ObbBox{Vec2{v.x, v.y}, v.heading, v.length, v.width});
  }

  // Occupied or abandoned regions are never re-selected within one run.
  std::vector<char> excluded(regions.size(), 0);
  int next_id = 0;
  while (static_cast<int>(snap.vehicles.size()) < n) {
    const Assignment assigned = assign_vehicles(snap, regions);
    std::vector<int> candidates;
    for (size_t i = 0; i < regions.size(); ++i) {
      if (!assigned.features[i].occupied && !excluded[i]) {
        candidates.push_back(static_cast<int>(i));
      }
    }
    const std::vector<int> before = candidates;
    const PlacementEval eval =
      eval_placement(model, feature_matrix(assigned.features), static_cast<int>(regions.size()));
    int placed_region = -1;
    try {
      const SampledVehicle sampled = sample_vehicle(eval, regions, candidates, boxes, rng,
                                                    "gen-" + std::to_string(next_id));
      ++next_id;
      placed_region = sampled.region;
      snap.vehicles.push_back(sampled.vehicle);
      boxes.push_back(ObbBox{Vec2{sampled.vehicle.x, sampled.vehicle.y},
                             sampled.vehicle.heading, sampled.vehicle.length,
                             sampled.vehicle.width});
    } catch (const ExhaustedError &) {
      log_info("generation exhausted after " + std::to_string(snap.vehicles.size()) +
               " vehicles");
      result.exhausted = true;
      break;
    }
    // The chosen region and any region the sampler abandoned stay excluded:
    // rejection only gets harder as the scene fills up.
    std::vector<char> still(regions.size(), 0);
    for (int c : candidates) {
      still[c] = 1;
    }
    for (int c : before) {
      if (!still[c]) {
        excluded[c] = 1;
      }
    }
    excluded[placed_region] = 1;
  }
  return result;
}

}  // namespace tgen
