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

#ifndef TGEN__ACTUATION_HPP_
#define TGEN__ACTUATION_HPP_

#include <optional>
#include <string>
#include <vector>

#include "tgen/geometry.hpp"
#include "tgen/scenario.hpp"

namespace tgen
{

/// Intelligent-driver-model parameters (standard literature values).
struct IdmParams
{
  double desired_speed = 15.0;     // v0, m/s
  double min_gap = 2.0;            // s0, m
  double time_headway = 1.5;       // T, s
  double max_accel = 2.0;          // a, m/s^2
  double comfortable_decel = 4.0;  // b, m/s^2
  double exponent = 4.0;           // delta
};

struct Lead
{
  double gap = 0.0;     // bumper-to-bumper arc distance, m
  double speed = 0.0;   // m/s
};

/// IDM acceleration. Free road: a (1 - (v/v0)^d). With a lead vehicle the
/// interaction term -(s*/gap)^2 is added, s* = s0 + v T + v dv / (2 sqrt(ab)).
/// Clamped to [-2b, a].
double idm_accel(double v, const IdmParams & params, const std::optional<Lead> & lead);

/// A vehicle bound to a reference path, actuated longitudinally by IDM.
struct PathFollower
{
  std::string id;
  Polyline path;                 // reference waypoints
  std::vector<double> cum_arc;   // prefix arc lengths, same size as path
  double cursor = 0.0;           // arc position, monotone non-decreasing
  double speed = 0.0;
  double length = 4.5;
  double width = 2.0;
  IdmParams params;              // per-vehicle desired speed lives here

  static PathFollower from_waypoints(const std::string & id, const Polyline & waypoints,
                                     double initial_speed, double length, double width);

  double path_length() const { return cum_arc.empty() ? 0.0 : cum_arc.back(); }
  void pose(Vec2 & position, double & heading) const;
  bool at_end() const { return cursor >= path_length() - 1e-9; }
};

constexpr double kLeadCorridorWidth = 3.5;  // m, centered on the path
constexpr double kLeadLookahead = 50.0;     // m of remaining arc
constexpr double kMinLeadGap = 0.1;         // m floor on the reported gap

/// Nearest vehicle ahead on the remaining path, within the corridor and the
/// lookahead. Gap subtracts both half-lengths and is floored at kMinLeadGap.
std::optional<Lead> find_lead(const PathFollower & self, const std::vector<PathFollower> & all);

/// One synchronous step: accelerations from the pre-step state, then
/// v <- max(0, v + a dt), cursor <- cursor + v dt. Vehicles at their path end
/// hold position with v = 0. Deterministic; dt = 0 is a no-op.
void step_scene(std::vector<PathFollower> & scene, double dt);

/// Re-simulates a scenario: every track follows its logged polyline while IDM
/// controls speed against detected leaders. Desired speed per vehicle is the
/// 90th-percentile speed of its source track, floored at 5 m/s. Vehicles enter
/// at their first valid step.
Scenario simulate_scenario(const Scenario & source, const IdmParams & defaults = {},
                           int horizon_steps = -1);

}  // namespace tgen

#endif  // TGEN__ACTUATION_HPP_
