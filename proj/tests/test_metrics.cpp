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
#include "tgen/metrics.hpp"

using namespace tgen;

namespace
{

std::vector<std::vector<double>> rows(std::initializer_list<std::vector<double>> init)
{
  return {init};
}

Snapshot snapshot_of(const LaneMap & map, std::vector<PlacedVehicle> vehicles)
{
  Snapshot snap;
  snap.map = &map;
  snap.vehicles = std::move(vehicles);
  return snap;
}

}  // namespace

TEST_CASE("mmd2: identical multisets score zero")
{
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::vector<double>> x;
    for (int i = 0; i < 20; ++i) {
      x.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
    }
    CHECK(std::abs(mmd2(x, x)) < 1e-9);
  }
}

TEST_CASE("mmd2: singleton closed form")
{
  const std::vector<std::vector<double>> x = rows({{0.2, -0.4}});
  const std::vector<std::vector<double>> y = rows({{-0.1, 0.5}});
  const double l1 = std::abs(0.2 - -0.1) + std::abs(-0.4 - 0.5);
  const double d = 0.5 * l1;
  MmdConfig cfg;
  cfg.sigma = 0.7;
  const double expect = 2.0 - 2.0 * std::exp(-d * d / (2.0 * 0.7 * 0.7));
  CHECK(mmd2(x, y, cfg) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("mmd2: symmetry, non-negativity, empties")
{
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> x, y;
    const int nx = 1 + static_cast<int>(rng.uniform_index(12));
    const int ny = 1 + static_cast<int>(rng.uniform_index(12));
    for (int i = 0; i < nx; ++i) {
      x.push_back({rng.uniform(-1.0, 1.0)});
    }
    for (int i = 0; i < ny; ++i) {
      y.push_back({rng.uniform(-1.0, 1.0)});
    }
    const double xy = mmd2(x, y);
    CHECK(xy >= 0.0);
    CHECK(xy == mmd2(y, x));
  }
  CHECK_THROWS_AS(mmd2({}, rows({{1.0}})), EmptyError);
}

TEST_CASE("scene_mmd_report: identical corpora score zero everywhere")
{
  const LaneMap map = test::straight_map();
  std::vector<Snapshot> real, gen;
  Rng rng(7);
  for (int s = 0; s < 4; ++s) {
    std::vector<PlacedVehicle> vehicles;
    for (int v = 0; v < 6; ++v) {
      vehicles.push_back(PlacedVehicle{"v" + std::to_string(v), rng.uniform(-50.0, 50.0),
                                       rng.uniform(-5.0, 5.0), rng.uniform(-3.0, 3.0),
                                       rng.uniform(0.0, 20.0), 4.5, 2.0});
    }
    real.push_back(snapshot_of(map, vehicles));
    gen.push_back(snapshot_of(map, vehicles));
  }
  const MmdReport report = scene_mmd_report(real, gen);
  CHECK(report.pos < 1e-9);
  CHECK(report.heading < 1e-9);
  CHECK(report.speed < 1e-9);
  CHECK(report.size < 1e-9);
  CHECK(report.pairs == 4);
}

TEST_CASE("scene_mmd_report: a speed shift moves only the speed score materially")
{
  const LaneMap map = test::straight_map();
  std::vector<Snapshot> real, gen;
  Rng rng(9);
  for (int s = 0; s < 4; ++s) {
    std::vector<PlacedVehicle> vehicles;
    for (int v = 0; v < 8; ++v) {
      vehicles.push_back(PlacedVehicle{"v" + std::to_string(v), rng.uniform(-50.0, 50.0),
                                       rng.uniform(-5.0, 5.0), rng.uniform(-3.0, 3.0),
                                       rng.uniform(0.0, 15.0), 4.5, 2.0});
    }
    real.push_back(snapshot_of(map, vehicles));
    std::vector<PlacedVehicle> shifted = vehicles;
    for (PlacedVehicle & v : shifted) {
      v.speed += 10.0;
    }
    gen.push_back(snapshot_of(map, shifted));
  }
  const MmdReport report = scene_mmd_report(real, gen);
  CHECK(report.speed > report.pos);
  CHECK(report.speed > report.heading);
  CHECK(report.speed > report.size);
  CHECK(report.speed > 0.01);
}

TEST_CASE("scene_mmd_report: alignment and CSV schema")
{
  const LaneMap map = test::straight_map();
  std::vector<Snapshot> one{snapshot_of(map, {PlacedVehicle{"v", 0, 0, 0, 1, 4, 2}})};
  std::vector<Snapshot> two{snapshot_of(map, {PlacedVehicle{"v", 0, 0, 0, 1, 4, 2}}),
                            snapshot_of(map, {PlacedVehicle{"v", 0, 0, 0, 1, 4, 2}})};
  CHECK_THROWS_AS(scene_mmd_report(one, two), AlignError);

  const MmdReport report = scene_mmd_report(one, {one[0]});
  CHECK(report.csv().rfind("attribute,score\nPos,", 0) == 0);
  CHECK(report.csv().find("Heading,") != std::string::npos);
  CHECK(report.csv().find("Speed,") != std::string::npos);
  CHECK(report.csv().find("Size,") != std::string::npos);
  const std::string table = report.table();
  CHECK(table.find("Pos") < table.find("Heading"));
  CHECK(table.find("Heading") < table.find("Speed"));
  CHECK(table.find("Speed") < table.find("Size"));
}

TEST_CASE("scr: coincident pair among four vehicles")
{
  Scenario s;
  s.map = test::straight_map();
  s.dt = 0.1;
  s.horizon = 1;
  const double xs[4] = {0.0, 0.0, 20.0, -20.0};  // first two coincide
  for (int i = 0; i < 4; ++i) {
    VehicleTrack t;
    t.id = "v" + std::to_string(i);
    t.states = {test::state_at(xs[i], 0.0)};
    s.tracks.push_back(t);
  }
  s.ego_id = "v0";
  CHECK(scr(s) == doctest::Approx(0.5));
}

TEST_CASE("scr: disjoint scene scores zero")
{
  Scenario s = test::simple_scenario(6);  // 8 m spacing, 4.5 m long vehicles
  CHECK(scr(s) == 0.0);
}

TEST_CASE("scr: half-overlap construction is flagged at threshold 0.1")
{
  Scenario s;
  s.map = test::straight_map();
  s.dt = 0.1;
  s.horizon = 1;
  VehicleTrack a, b;
  a.id = "a";
  a.states = {test::state_at(0.0, 0.0, 0.0, 0.0, 4.0, 2.0)};
  b.id = "b";
  b.states = {test::state_at(2.0, 0.0, 0.0, 0.0, 4.0, 2.0)};  // IOU = 1/3
  s.tracks = {a, b};
  s.ego_id = "a";
  CHECK(scr(s, 0.1) == doctest::Approx(1.0));
  // monotone: raising the threshold above 1/3 clears both
  CHECK(scr(s, 0.34) == 0.0);
}

TEST_CASE("scr: monotone in the threshold over random scenes")
{
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    Scenario s;
    s.map = test::straight_map();
    s.dt = 0.1;
    s.horizon = 1;
    for (int i = 0; i < 8; ++i) {
      VehicleTrack t;
      t.id = "v" + std::to_string(i);
      t.states = {test::state_at(rng.uniform(-10.0, 10.0), rng.uniform(-3.0, 3.0),
                                 rng.uniform(-3.0, 3.0))};
      s.tracks.push_back(t);
    }
    s.ego_id = "v0";
    double prev = 1.1;
    for (double thr : {0.0, 0.1, 0.3, 0.6, 0.9}) {
      const double value = scr(s, thr);
      CHECK(value <= prev + 1e-12);
      prev = value;
    }
  }
}

TEST_CASE("ade_fde: exact cases")
{
  const std::vector<Vec2> gt{{0, 0}, {1, 0}, {2, 0}};
  CHECK(ade_fde(gt, gt) == std::pair<double, double>{0.0, 0.0});

  std::vector<Vec2> off = gt;
  for (Vec2 & p : off) {
    p.x += 1.0;
  }
  const auto [ade, fde] = ade_fde(off, gt);
  CHECK(ade == doctest::Approx(1.0));
  CHECK(fde == doctest::Approx(1.0));

  // linearly growing offset 0..2
  std::vector<Vec2> grow = gt;
  for (size_t i = 0; i < grow.size(); ++i) {
    grow[i].y += static_cast<double>(i);
  }
  const auto [ade2, fde2] = ade_fde(grow, gt);
  CHECK(ade2 == doctest::Approx(1.0));
  CHECK(fde2 == doctest::Approx(2.0));

  CHECK_THROWS_AS(ade_fde(off, std::vector<Vec2>{{0, 0}}), LengthError);
}

TEST_CASE("ade_fde: joint translation invariance and the FDE bound")
{
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec2> pred, gt;
    const int n = 1 + static_cast<int>(rng.uniform_index(30));
    for (int i = 0; i < n; ++i) {
      pred.push_back({rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)});
      gt.push_back({rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)});
    }
    const auto [ade, fde] = ade_fde(pred, gt);
    CHECK(fde <= n * ade + 1e-12);

    const Vec2 shift{rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0)};
    std::vector<Vec2> pred2 = pred, gt2 = gt;
    for (int i = 0; i < n; ++i) {
      pred2[i] = pred2[i] + shift;
      gt2[i] = gt2[i] + shift;
    }
    const auto [ade2, fde2] = ade_fde(pred2, gt2);
    CHECK(ade2 == doctest::Approx(ade).epsilon(1e-9));
    CHECK(fde2 == doctest::Approx(fde).epsilon(1e-9));
  }
}

TEST_CASE("collect_attributes: normalization ranges")
{
  const LaneMap map = test::straight_map();
  const Snapshot snap = snapshot_of(
    map, {PlacedVehicle{"fast", 100.0, -90.0, 2.0, 80.0, 20.0, 5.0}});
  const AttributeSamples a = collect_attributes(snap);
  CHECK(a.pos[0][0] == 1.0);   // clamped
  CHECK(a.pos[0][1] == -1.0);  // clamped
  CHECK(a.speed[0] == 1.0);    // clamped
  CHECK(a.heading[0] == doctest::Approx(2.0 / 3.14159265358979323846));
  CHECK(a.size[0][0] == doctest::Approx(20.0 / 15.0));
  CHECK(a.size[0][1] == doctest::Approx(5.0 / 4.0));
}
