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

#include "test_support.hpp"
#include "tgen/placement.hpp"

using namespace tgen;

namespace
{

// Raw head rows for a tight mixture at the given attribute values.
void fill_bivariate_row(Tensor & raw, int row, int k, double x, double y,
                        double log_sigma = -9.0)
{
  for (int i = 0; i < k; ++i) {
    raw.at(row, i * 6 + 0) = 0.0f;
    raw.at(row, i * 6 + 1) = static_cast<float>(x);
    raw.at(row, i * 6 + 2) = static_cast<float>(y);
    raw.at(row, i * 6 + 3) = static_cast<float>(log_sigma);
    raw.at(row, i * 6 + 4) = static_cast<float>(log_sigma);
    raw.at(row, i * 6 + 5) = 0.0f;
  }
}

void fill_univariate_row(Tensor & raw, int row, int k, double mu, double log_sigma = -9.0)
{
  for (int i = 0; i < k; ++i) {
    raw.at(row, i * 3 + 0) = 0.0f;
    raw.at(row, i * 3 + 1) = static_cast<float>(mu);
    raw.at(row, i * 3 + 2) = static_cast<float>(log_sigma);
  }
}

// Hand-built evaluation for sampler tests: every region proposes a vehicle at
// local (0, 2.5) heading along the lane at 10 m/s, size 4.5 x 2.
PlacementEval tight_eval(int regions, const std::vector<double> & logits, int k = 2)
{
  PlacementEval eval;
  eval.logits = Tensor::zeros(regions, 1);
  for (int i = 0; i < regions; ++i) {
    eval.logits.at(i, 0) = static_cast<float>(logits[i]);
  }
  eval.raw_pos = Tensor::zeros(regions, k * 6);
  eval.raw_heading = Tensor::zeros(regions, k * 3);
  eval.raw_speed = Tensor::zeros(regions, k * 3);
  eval.raw_size = Tensor::zeros(regions, k * 6);
  for (int i = 0; i < regions; ++i) {
    fill_bivariate_row(eval.raw_pos, i, k, 0.0, 2.5);
    fill_univariate_row(eval.raw_heading, i, k, 0.0);
    fill_univariate_row(eval.raw_speed, i, k, 10.0);
    fill_bivariate_row(eval.raw_size, i, k, 4.5, 2.0);
  }
  return eval;
}

std::vector<Region> line_regions(int count)
{
  LaneMap map;
  Lane lane;
  lane.id = "l0";
  lane.type = LaneType::kCenter;
  lane.polyline = {{0.0, 0.0}, {count * 5.0, 0.0}};
  map.lanes.push_back(lane);
  return chunk_lanes(map);  // regions hold copies, no reference to the map
}

}  // namespace

TEST_CASE("mask_regions: a single occupied region is always masked")
{
  std::vector<VectorFeature> features(4);
  features[2].occupied = true;
  features[2].q = {0.5, 2.0};
  features[2].vel = 7.0;
  features[2].bbox_length = 4.0;
  features[2].bbox_width = 1.8;
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const MaskedExample ex = mask_regions(features, rng);
    REQUIRE(ex.masked.size() == 1);
    CHECK(ex.masked[0] == 2);
    CHECK(ex.occupancy[2] == 1.0);
    // masked input rows zero the vehicle part
    for (int c = kVehiclePartOffset; c < kFeatureWidth; ++c) {
      CHECK(ex.features[2 * kFeatureWidth + c] == 0.0);
    }
    CHECK(ex.vel[0] == doctest::Approx(7.0));
  }
}

TEST_CASE("mask_regions: mask count is uniform over {1..occupied}")
{
  std::vector<VectorFeature> features(6);
  for (int i : {0, 3, 5}) {
    features[i].occupied = true;
    features[i].bbox_length = 4.0;
    features[i].bbox_width = 2.0;
  }
  Rng rng(11);
  int counts[4] = {0, 0, 0, 0};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const MaskedExample ex = mask_regions(features, rng);
    REQUIRE(ex.masked.size() >= 1);
    REQUIRE(ex.masked.size() <= 3);
    ++counts[ex.masked.size()];
  }
  // three-sigma binomial band around n/3
  const double expect = n / 3.0;
  const double sigma = std::sqrt(n * (1.0 / 3.0) * (2.0 / 3.0));
  for (int c = 1; c <= 3; ++c) {
    CHECK(std::abs(counts[c] - expect) < 3.0 * sigma);
  }
}

TEST_CASE("mask_regions: empty occupancy is an error")
{
  std::vector<VectorFeature> features(3);
  Rng rng(1);
  CHECK_THROWS_AS(mask_regions(features, rng), EmptyError);
}

TEST_CASE("placement loss: saturated logits make the BCE term vanish")
{
  const ModelConfig cfg = test::tiny_config(8, 2);
  ModelParams model;
  init_model_params(model, cfg, 5);
  // place head forced to +20 on every region
  for (size_t l = 0;; ++l) {
    const std::string base = "head.place.l" + std::to_string(l);
    if (!model.store.contains(base + ".w")) {
      break;
    }
    auto & w = model.store.at(base + ".w");
    std::fill(w.value.data.begin(), w.value.data.end(), 0.0f);
    auto & b = model.store.at(base + ".b");
    std::fill(b.value.data.begin(), b.value.data.end(), 0.0f);
  }
  {
    // final layer bias = 20
    size_t last = 0;
    while (model.store.contains("head.place.l" + std::to_string(last + 1) + ".w")) {
      ++last;
    }
    model.store.at("head.place.l" + std::to_string(last) + ".b").value.data[0] = 20.0f;
  }

  // one occupied region, masked; ground truth all-occupied
  std::vector<VectorFeature> features(1);
  features[0].occupied = true;
  features[0].q = {0.0, 2.5};
  features[0].vel = 10.0;
  features[0].bbox_length = 4.5;
  features[0].bbox_width = 2.0;
  Rng rng(2);
  const MaskedExample ex = mask_regions(features, rng);

  // BCE part alone: rebuild the loss with no masked rows
  MaskedExample bce_only = ex;
  bce_only.masked.clear();
  Tape tape;
  const int loss = placement_loss_graph(tape, model.store, cfg, bce_only);
  CHECK(tape.val(loss).data[0] < 1e-6);
}

TEST_CASE("placement loss: univariate head at the truth with sigma = 1/sqrt(2 pi)")
{
  // log N(mu; mu, sigma_eff) = 0 when the effective sigma is 1/sqrt(2 pi);
  // solve the raw log-scale through the training variance floor
  const double var = 1.0 / (2.0 * 3.14159265358979323846) -
                     kTrainSigmaFloor * kTrainSigmaFloor;
  const double log_sigma = 0.5 * std::log(var);
  TapeT<double> tape;
  TensorT<double> raw = TensorT<double>::zeros(1, 3);
  raw.at(0, 1) = 7.25;  // mu == target
  raw.at(0, 2) = log_sigma;
  const int nll = gmm_nll_graph(tape, tape.leaf(raw), {7.25}, 1, 1);
  CHECK(tape.val(nll).at(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("placement loss: finite value and finite-difference gradients")
{
  const ModelConfig cfg = test::tiny_config(6, 2, 3, 2);
  ModelParamsT<double> model;
  init_model_params(model, cfg, 31);

  Rng rng(4);
  std::vector<VectorFeature> features(5);
  for (int i = 0; i < 5; ++i) {
    features[i].start = {5.0 * i, 0.0};
    features[i].end = {5.0 * (i + 1), 0.0};
    if (i % 2 == 0) {
      features[i].occupied = true;
      features[i].q = {rng.uniform(-1.0, 1.0), rng.uniform(0.0, 5.0)};
      features[i].h = rng.uniform(-1.0, 1.0);
      features[i].vel = rng.uniform(0.0, 20.0);
      features[i].bbox_length = rng.uniform(3.5, 5.5);
      features[i].bbox_width = rng.uniform(1.5, 2.5);
    }
  }
  Rng mask_rng(6);
  const MaskedExample ex = mask_regions(features, mask_rng);

  auto build = [&](TapeT<double> & tape) {
    return placement_loss_graph(tape, model.store, cfg, ex);
  };
  {
    TapeT<double> tape;
    CHECK(std::isfinite(tape.val(build(tape)).data[0]));
  }
  CHECK(test::max_grad_rel_error(model.store, build, 1e-3, 25) < 1e-4);
}

TEST_CASE("sample_vehicle: softmax statistics over the candidate set")
{
  const std::vector<Region> regions = line_regions(3);

  SUBCASE("dominant logit wins essentially always")
  {
    Rng rng(8);
    int hits = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const PlacementEval eval = tight_eval(3, {10.0, -10.0, -10.0});
      std::vector<int> candidates{0, 1, 2};
      const SampledVehicle v = sample_vehicle(eval, regions, candidates, {}, rng, "t");
      if (v.region == 0) {
        ++hits;
      }
    }
    CHECK(static_cast<double>(hits) / n > 0.9999);
  }

  SUBCASE("equal logits are uniform within three sigma")
  {
    const std::vector<Region> four = line_regions(4);
    Rng rng(9);
    int counts[4] = {0, 0, 0, 0};
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const PlacementEval eval = tight_eval(4, {0.3, 0.3, 0.3, 0.3});
      std::vector<int> candidates{0, 1, 2, 3};
      const SampledVehicle v = sample_vehicle(eval, four, candidates, {}, rng, "t");
      ++counts[v.region];
    }
    const double expect = 0.25 * n;
    const double sigma = std::sqrt(n * 0.25 * 0.75);
    for (int c = 0; c < 4; ++c) {
      CHECK(std::abs(counts[c] - expect) < 3.0 * sigma);
    }
  }

  SUBCASE("excluded regions are never drawn")
  {
    Rng rng(10);
    for (int i = 0; i < 5000; ++i) {
      const PlacementEval eval = tight_eval(3, {5.0, 5.0, 5.0});
      std::vector<int> candidates{0, 2};  // region 1 occupied
      const SampledVehicle v = sample_vehicle(eval, regions, candidates, {}, rng, "t");
      CHECK(v.region != 1);
    }
  }
}

TEST_CASE("sample_vehicle: tight mixtures land at the region midpoint")
{
  const std::vector<Region> regions = line_regions(1);
  const PlacementEval eval = tight_eval(1, {0.0});
  Rng rng(12);
  std::vector<int> candidates{0};
  const SampledVehicle v = sample_vehicle(eval, regions, candidates, {}, rng, "t");
  CHECK(v.region == 0);
  CHECK(std::abs(v.vehicle.x - 2.5) < 1e-3);
  CHECK(std::abs(v.vehicle.y) < 1e-3);
  CHECK(std::abs(wrap_angle(v.vehicle.heading)) < 1e-3);
  CHECK(std::abs(v.vehicle.speed - 10.0) < 1e-3);
  CHECK(std::abs(v.vehicle.length - 4.5) < 1e-3);
  CHECK(std::abs(v.vehicle.width - 2.0) < 1e-3);
}

TEST_CASE("sample_vehicle: empty candidates raise ExhaustedError")
{
  const std::vector<Region> regions = line_regions(2);
  const PlacementEval eval = tight_eval(2, {0.0, 0.0});
  Rng rng(1);
  std::vector<int> none;
  CHECK_THROWS_AS(sample_vehicle(eval, regions, none, {}, rng, "t"), ExhaustedError);
}

TEST_CASE("sample_vehicle: negative mean speed clamps to zero")
{
  const std::vector<Region> regions = line_regions(1);
  PlacementEval eval = tight_eval(1, {0.0});
  fill_univariate_row(eval.raw_speed, 0, 2, -5.0, -7.0);
  Rng rng(2);
  std::vector<int> candidates{0};
  const SampledVehicle v = sample_vehicle(eval, regions, candidates, {}, rng, "t");
  CHECK(v.vehicle.speed == 0.0);
}

TEST_CASE("sample_vehicle: overlap rejection abandons a blocked region")
{
  const std::vector<Region> regions = line_regions(2);
  const PlacementEval eval = tight_eval(2, {10.0, 0.0});
  // a parked vehicle exactly where region 0 would put the sample
  const ObbBox blocker{{2.5, 0.0}, 0.0, 4.5, 2.0};
  Rng rng(3);
  std::vector<int> candidates{0, 1};
  const SampledVehicle v = sample_vehicle(eval, regions, candidates, {blocker}, rng, "t");
  CHECK(v.region == 1);
  CHECK(candidates == std::vector<int>{1});
}

TEST_CASE("generate_snapshot: n = 0 returns the existing context unchanged")
{
  const ModelConfig cfg = test::tiny_config(8);
  ModelParams model;
  init_model_params(model, cfg, 3);
  const LaneMap map = test::straight_map(2, 60.0);

  const GenerationResult empty = generate_snapshot(map, 0, 7, model);
  CHECK(empty.snapshot.vehicles.empty());
  CHECK_FALSE(empty.exhausted);

  Snapshot existing;
  existing.map = &map;
  existing.vehicles.push_back(PlacedVehicle{"keep", 0.0, -2.0, 0.0, 3.0, 4.5, 2.0});
  const GenerationResult kept = generate_snapshot(map, 0, 7, model, &existing);
  REQUIRE(kept.snapshot.vehicles.size() == 1);
  CHECK(kept.snapshot.vehicles[0].id == "keep");
  CHECK(kept.snapshot.vehicles[0].x == 0.0);
}

TEST_CASE("generate_snapshot: deterministic under a fixed seed")
{
  const ModelConfig cfg = test::tiny_config(8);
  ModelParams model;
  init_model_params(model, cfg, 3);
  const LaneMap map = test::straight_map(2, 60.0);

  const GenerationResult a = generate_snapshot(map, 5, 99, model);
  const GenerationResult b = generate_snapshot(map, 5, 99, model);
  REQUIRE(a.snapshot.vehicles.size() == b.snapshot.vehicles.size());
  for (size_t i = 0; i < a.snapshot.vehicles.size(); ++i) {
    CHECK(a.snapshot.vehicles[i].x == b.snapshot.vehicles[i].x);
    CHECK(a.snapshot.vehicles[i].y == b.snapshot.vehicles[i].y);
    CHECK(a.snapshot.vehicles[i].heading == b.snapshot.vehicles[i].heading);
  }
  const GenerationResult c = generate_snapshot(map, 5, 100, model);
  bool same = a.snapshot.vehicles.size() == c.snapshot.vehicles.size();
  if (same) {
    for (size_t i = 0; i < a.snapshot.vehicles.size(); ++i) {
      same = same && a.snapshot.vehicles[i].x == c.snapshot.vehicles[i].x;
    }
  }
  CHECK_FALSE(same);
}

TEST_CASE("generate_snapshot: no overlaps and filters hold by construction")
{
  const ModelConfig cfg = test::tiny_config(8);
  ModelParams model;
  init_model_params(model, cfg, 21);
  const LaneMap map = test::straight_map(2, 100.0);  // 40 regions

  const GenerationResult gen = generate_snapshot(map, 5, 5, model);
  REQUIRE(gen.snapshot.vehicles.size() == 5);

  // brute-force pairwise IOU
  for (size_t i = 0; i < 5; ++i) {
    const PlacedVehicle & a = gen.snapshot.vehicles[i];
    const ObbBox box_a{{a.x, a.y}, a.heading, a.length, a.width};
    for (size_t j = i + 1; j < 5; ++j) {
      const PlacedVehicle & b = gen.snapshot.vehicles[j];
      const ObbBox box_b{{b.x, b.y}, b.heading, b.length, b.width};
      CHECK(obb_iou(box_a, box_b) < 1e-12);
    }
  }

  // assigning the generated vehicles back to regions drops none
  const Assignment back = assign_vehicles(gen.snapshot, chunk_lanes(map));
  for (int r : back.vehicle_region) {
    CHECK(r >= 0);
  }
  CHECK(back.dropped == 0);
}

TEST_CASE("generate_snapshot: a saturated map exhausts")
{
  const ModelConfig cfg = test::tiny_config(8);
  ModelParams model;
  init_model_params(model, cfg, 4);
  LaneMap map;
  Lane lane;
  lane.id = "l0";
  lane.type = LaneType::kCenter;
  lane.polyline = {{0.0, 0.0}, {10.0, 0.0}};  // 2 regions
  map.lanes.push_back(lane);

  const GenerationResult gen = generate_snapshot(map, 10, 1, model);
  CHECK(gen.exhausted);
  CHECK(gen.snapshot.vehicles.size() < 10);
}
