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

#include <string>
#include <vector>

#include "test_support.hpp"
#include "tgen/render.hpp"

using namespace tgen;

namespace
{

size_t count_occurrences(const std::string & hay, const std::string & needle)
{
  size_t count = 0;
  size_t pos = 0;
  while ((pos = hay.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

// Minimal well-formedness scan: tags balance and a single root element.
bool well_formed_xml(const std::string & doc)
{
  std::vector<std::string> stack;
  size_t pos = 0;
  int roots = 0;
  while ((pos = doc.find('<', pos)) != std::string::npos) {
    const size_t end = doc.find('>', pos);
    if (end == std::string::npos) {
      return false;
    }
    std::string tag = doc.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag.empty() || tag[0] == '?' || tag[0] == '!') {
      continue;
    }
    if (tag[0] == '/') {
      const std::string name = tag.substr(1);
      if (stack.empty() || stack.back() != name) {
        return false;
      }
      stack.pop_back();
      if (stack.empty()) {
        ++roots;
      }
      continue;
    }
    if (tag.back() == '/') {
      if (stack.empty()) {
        ++roots;
      }
      continue;
    }
    const size_t space = tag.find_first_of(" \t\n");
    stack.push_back(space == std::string::npos ? tag : tag.substr(0, space));
  }
  return stack.empty() && roots == 1;
}

}  // namespace

TEST_CASE("render_svg: byte-identical across runs")
{
  const Scenario s = test::simple_scenario(8, 5);
  RenderOptions options;
  options.show_trajectories = true;
  CHECK(render_svg(s, options) == render_svg(s, options));
}

TEST_CASE("render_svg: empty tracks render only lane geometry")
{
  Scenario s;
  s.map = test::straight_map(3);
  s.dt = 0.1;
  s.horizon = 1;
  const std::string svg = render_svg(s);
  CHECK(count_occurrences(svg, "<polyline") == 3);
  CHECK(count_occurrences(svg, "rotate(") == 0);
  CHECK(well_formed_xml(svg));
}

TEST_CASE("render_svg: vehicles appear as oriented rectangles")
{
  const Scenario s = test::simple_scenario(4, 1);
  const std::string svg = render_svg(s);
  CHECK(count_occurrences(svg, "rotate(") == 4);
  CHECK(well_formed_xml(svg));
}

TEST_CASE("render_svg: equal heat weights share one color")
{
  const Scenario s = test::simple_scenario(8, 1);
  RenderOptions options;
  options.heatmap.assign(40, 0.7);
  const std::string svg = render_svg(s, options);
  // every heat line uses the same ramp color
  const size_t lines = count_occurrences(svg, "<line");
  CHECK(lines > 0);
  size_t colored = 0;
  size_t pos = 0;
  std::string first_color;
  while ((pos = svg.find("<line", pos)) != std::string::npos) {
    const size_t c = svg.find("stroke=\"", pos);
    REQUIRE(c != std::string::npos);
    const std::string color = svg.substr(c + 8, 7);
    if (first_color.empty()) {
      first_color = color;
    }
    CHECK(color == first_color);
    ++colored;
    pos = c;
  }
  CHECK(colored == lines);
  CHECK(well_formed_xml(svg));
}

TEST_CASE("render_svg: viewBox covers at least the 120 m crop square")
{
  Scenario s;
  s.map = test::straight_map(1, 40.0);
  s.dt = 0.1;
  s.horizon = 1;
  const std::string svg = render_svg(s);
  CHECK(svg.find("viewBox=\"-60.000 -60.000 120.000 120.000\"") != std::string::npos);
}

TEST_CASE("render_svg: timestep selects the drawn states")
{
  Scenario s = test::simple_scenario(2, 3);
  s.tracks[0].states[2].x = 55.5;
  RenderOptions options;
  options.timestep = 2;
  const std::string svg = render_svg(s, options);
  CHECK(svg.find("translate(55.500") != std::string::npos);
}
