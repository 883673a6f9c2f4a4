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

#ifndef TGEN__RENDER_HPP_
#define TGEN__RENDER_HPP_

#include <string>
#include <vector>

#include "tgen/scenario.hpp"

namespace tgen
{

struct RenderOptions
{
  int timestep = 0;
  bool show_trajectories = false;
  // Optional per-region weights (e.g. placement logits); colors the region
  // segments. Empty = no heat layer.
  std::vector<double> heatmap;
};

/// Deterministic SVG: lanes as polylines, vehicles as oriented rectangles,
/// optional trajectories and region heat layer. The viewBox is the square
/// crop window (side >= 120 m) centered at the origin.
std::string render_svg(const Scenario & scenario, const RenderOptions & options = {});

}  // namespace tgen

#endif  // TGEN__RENDER_HPP_
