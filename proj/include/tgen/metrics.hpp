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

#ifndef TGEN__METRICS_HPP_
#define TGEN__METRICS_HPP_

#include <array>
#include <string>
#include <vector>

#include "tgen/geometry.hpp"
#include "tgen/scenario.hpp"

namespace tgen
{

// Attribute normalization constants (kept fixed so scores are reproducible).
constexpr double kPosNorm = 60.0;     // crop half-side
constexpr double kSpeedNorm = 30.0;   // m/s
constexpr double kLengthNorm = 15.0;  // m
constexpr double kWidthNorm = 4.0;    // m

/// Per-scenario collections of normalized vehicle attributes.
struct AttributeSamples
{
  std::vector<std::array<double, 2>> pos;      // [-1, 1]^2 after clamping
  std::vector<double> heading;                 // rad / pi
  std::vector<double> speed;                   // clamped to [0, 1]
  std::vector<std::array<double, 2>> size;     // length/15, width/4
};

AttributeSamples collect_attributes(const Snapshot & snap);

struct MmdConfig
{
  double sigma = 1.0;
  bool biased = true;  // V-statistic; the unbiased variant is for comparison
};

/// Squared maximum mean discrepancy with a Gaussian kernel over half the L1
/// distance of normalized attribute vectors. Biased estimator is >= 0 and
/// symmetric in (X, Y). Throws EmptyError on empty input.
double mmd2(const std::vector<std::vector<double>> & x,
            const std::vector<std::vector<double>> & y, const MmdConfig & cfg = {});

struct MmdReport
{
  double pos = 0.0;
  double heading = 0.0;
  double speed = 0.0;
  double size = 0.0;
  int pairs = 0;    // scenario pairs scored
  int skipped = 0;  // pairs with an empty side

  std::string csv() const;    // header `attribute,score`
  std::string table() const;  // aligned text, Pos Heading Speed Size order
};

/// Averages per-attribute MMD across aligned scenario pairs. Lists must match
/// one-to-one (AlignError otherwise); pairs with no vehicles on either side
/// are skipped and counted.
MmdReport scene_mmd_report(const std::vector<Snapshot> & real,
                           const std::vector<Snapshot> & gen, const MmdConfig & cfg = {});

/// Scenario collision rate: fraction of vehicles whose oriented bounding box
/// overlaps another vehicle's with IOU above the threshold at any timestep.
double scr(const Scenario & scenario, double iou_threshold = 0.1);

/// Average and final displacement error between two equal-length position
/// sequences. Throws LengthError on mismatch or empty input.
std::pair<double, double> ade_fde(const std::vector<Vec2> & pred, const std::vector<Vec2> & gt);

}  // namespace tgen

#endif  // TGEN__METRICS_HPP_
