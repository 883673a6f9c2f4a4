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

#ifndef TGEN__SCENARIO_HPP_
#define TGEN__SCENARIO_HPP_

#include <optional>
#include <string>
#include <vector>

#include "tgen/geometry.hpp"

namespace tgen
{

enum class LaneType { kCenter = 0, kBoundarySolid = 1, kBoundaryBroken = 2, kEdge = 3 };
constexpr int kLaneTypeCount = 4;

enum class LightState { kUnknown = 0, kGreen = 1, kYellow = 2, kRed = 3 };
constexpr int kLightStateCount = 4;

const char * to_string(LaneType t);
const char * to_string(LightState s);
LaneType lane_type_from_string(const std::string & s);
LightState light_state_from_string(const std::string & s);

struct Lane
{
  std::string id;
  LaneType type = LaneType::kCenter;
  Polyline polyline;  // >= 2 points, meters
  std::vector<std::string> successors;
  std::string left;   // empty = none
  std::string right;  // empty = none
};

struct TrafficLight
{
  std::string lane_id;
  std::vector<LightState> states;  // one per scenario step
};

struct LaneMap
{
  std::vector<Lane> lanes;
  std::vector<TrafficLight> traffic_lights;

  const Lane * find_lane(const std::string & id) const;
  // State of the light controlling `lane_id` at step t, kUnknown if none.
  LightState light_at(const std::string & lane_id, int t) const;
  // Axis-aligned bounds of all lane points. Invalid (min > max) for empty maps.
  void bounds(Vec2 & lo, Vec2 & hi) const;
};

struct VehicleState
{
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // rad in (-pi, pi]
  double speed = 0.0;    // m/s, >= 0
  double length = 0.0;   // m, > 0 when valid
  double width = 0.0;    // m, > 0 when valid
  bool valid = false;
};

struct VehicleTrack
{
  std::string id;
  std::vector<VehicleState> states;  // exactly T entries

  int first_valid() const;  // -1 if none
  int last_valid() const;   // -1 if none
};

/// A traffic scenario: HD map plus per-vehicle state tracks over T steps.
/// Immutable by convention after construction / parsing.
struct Scenario
{
  LaneMap map;
  std::vector<VehicleTrack> tracks;
  double dt = 0.1;      // seconds per step
  std::string ego_id;
  int horizon = 1;      // T, number of state slots per track

  const VehicleTrack * find_track(const std::string & id) const;
};

// One vehicle of a snapshot, already validated against the region filters.
struct PlacedVehicle
{
  std::string id;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;
  double length = 0.0;
  double width = 0.0;
};

/// All valid vehicles on the map at one timestep, plus the light states then.
struct Snapshot
{
  const LaneMap * map = nullptr;
  std::vector<PlacedVehicle> vehicles;
  int timestep = 0;
  // Light state per map lane id at `timestep`; parallel to lane lookup order.
  std::vector<std::pair<std::string, LightState>> lights;

  LightState light_for(const std::string & lane_id) const;
};

struct ParseResult
{
  Scenario scenario;
  int warnings = 0;  // unknown fields, out-of-bounds positions
};

// ---------------------------------------------------------------------------
// Interchange format (UTF-8 text document, schema in README)
// ---------------------------------------------------------------------------

// Throws SchemaError / ValueError / RefError. Unknown fields are counted, not
// fatal.
ParseResult parse_scenario(const std::string & bytes);

// Canonical serialization: fixed key order, floats at 9 significant digits,
// byte-identical across runs for equal scenarios.
std::string write_scenario(const Scenario & s);

// Field-level equality with relative float tolerance (used by round-trip
// checks; exact layout equality is not required).
bool scenario_approx_equal(const Scenario & a, const Scenario & b, double rtol = 1e-6);

// ---------------------------------------------------------------------------
// Dataset shaping
// ---------------------------------------------------------------------------

/// Restricts the scenario to an axis-aligned square of side `side` centered on
/// the ego vehicle's first valid pose; re-expresses coordinates relative to the
/// square center. Returns nullopt when fewer than `min_agents` tracks survive.
std::optional<Scenario> filter_and_crop(const Scenario & s, double side = 120.0,
                                        int min_agents = 8);

/// Snapshots at t = 0, interval, 2*interval, ... within [0, T*dt). At least one
/// snapshot for any valid scenario. Vehicles failing the region validity
/// filters are dropped from each snapshot. Throws IntervalError when the
/// interval is not a positive multiple of dt.
std::vector<Snapshot> split_snapshots(const Scenario & s, double interval = 2.0);

}  // namespace tgen

#endif  // TGEN__SCENARIO_HPP_
